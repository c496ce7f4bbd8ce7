#pragma once

// Built-in consistency suite: dual-implementation oracles and invariants that
// need no reference data. Each check reports its worst deviation.

#include "core.hpp"
#include "goodcavity.hpp"
#include "lamb.hpp"
#include "moments.hpp"
#include "motion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace cqlaser::selftest {

struct Check {
    std::string name;
    bool passed = false;
    double worst = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct SamplePoint {
    SystemParams params;
    double x = 0.0;
};

/// Fixed-seed random (x, Delta) points over one period, |Delta| <= delta_max.
[[nodiscard]] inline std::vector<SamplePoint> random_points(const SystemParams& base, double delta_max,
                                                            std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, half_period(base));
    std::uniform_real_distribution<double> ud(-delta_max, delta_max);
    std::vector<SamplePoint> pts(n);
    for (auto& s : pts) {
        s.x = ux(rng);
        s.params = base;
        s.params.delta = ud(rng);
    }
    return pts;
}

/// Max |a - b| / max(|b|, floor), the floor being `rel_floor` times the largest |b|.
[[nodiscard]] inline double max_relative_deviation(const std::vector<double>& a, const std::vector<double>& b,
                                                   double rel_floor = 1e-8)
{
    double scale = 0.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    const double floor = std::max(rel_floor * scale, std::numeric_limits<double>::min());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
    return worst;
}

[[nodiscard]] inline Check make_check(std::string name, double worst, double tol, std::string detail = {})
{
    Check c;
    c.name = std::move(name);
    c.worst = worst;
    c.tolerance = tol;
    c.passed = std::isfinite(worst) && worst < tol;
    c.detail = std::move(detail);
    return c;
}

/// Parameter families used by the suite: the (gamma, g) = (10, 50) detuning
/// family and the (gamma, Delta) = (5, 250) coupling family.
[[nodiscard]] inline std::vector<SystemParams> reference_families()
{
    SystemParams a;
    a.gamma = 10.0;
    a.g = 50.0;
    a.nu = 30.0;
    a.delta = 100.0;
    SystemParams b;
    b.gamma = 5.0;
    b.g = 20.0;
    b.nu = 20.0;
    b.delta = 250.0;
    return {a, b};
}

[[nodiscard]] inline double continuity_worst(const SystemParams& base, int nx, const std::vector<double>& deltas)
{
    double worst = 0.0;
    for (double d : deltas) {
        SystemParams p = base;
        p.delta = d;
        for (int i = 0; i < nx; ++i) {
            const double x = half_period(p) * i / nx;
            const auto l = lamb::lamb_steady_state(p, x);
            worst = std::max(worst, std::abs(continuity_residual(0.5 * (1.0 + l.z), l.N, p)));
            const auto m = moments::solve_self_consistent(p, x);
            worst = std::max(worst, std::abs(continuity_residual(m.P, m.N, p)));
        }
    }
    return worst;
}

[[nodiscard]] inline double friction_dual_worst(const std::vector<SamplePoint>& pts)
{
    std::vector<double> closed, matrix;
    for (const auto& s : pts) {
        closed.push_back(motion::friction(s.params, s.x));
        matrix.push_back(motion::friction_matrix(s.params, s.x));
    }
    return max_relative_deviation(closed, matrix);
}

[[nodiscard]] inline double diffusion_dual_worst(const std::vector<SamplePoint>& pts, double* min_value = nullptr)
{
    std::vector<double> closed, assembled;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : pts) {
        closed.push_back(motion::diffusion_field(s.params, s.x));
        assembled.push_back(motion::diffusion_field_assembled(s.params, s.x));
        lo = std::min({lo, closed.back(), assembled.back()});
    }
    if (min_value) *min_value = lo;
    return max_relative_deviation(closed, assembled);
}

[[nodiscard]] inline std::vector<Check> run_all()
{
    std::vector<Check> out;
    const auto families = reference_families();
    const std::vector<double> deltas{-200, -100, -50, -10, 0, 10, 50, 100, 200};

    {
        SystemParams strong;
        strong.gamma = 10;
        strong.nu = 20;
        strong.g = 100;
        SystemParams moderate;
        moderate.gamma = 20;
        moderate.nu = 25;
        moderate.g = 20;
        const double w = std::max(continuity_worst(strong, 64, deltas), continuity_worst(moderate, 64, deltas));
        out.push_back(make_check("continuity residual, lamb and moment steady states", w, 1e-10));
    }

    double fr = 0.0, df = 0.0, dmin = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 7;
    for (const auto& fam : families) {
        const auto pts = random_points(fam, 300.0, 32, seed++);
        fr = std::max(fr, friction_dual_worst(pts));
        double lo = 0.0;
        df = std::max(df, diffusion_dual_worst(pts, &lo));
        dmin = std::min(dmin, lo);
    }
    out.push_back(make_check("friction closed form vs matrix route", fr, 1e-6));
    out.push_back(make_check("diffusion closed form vs covariance assembly", df, 1e-6));
    out.push_back(make_check("diffusion non-negative", dmin >= 0.0 ? 0.0 : -dmin, 1e-300,
                             "min D = " + std::to_string(dmin)));

    {
        double w = 0.0;
        for (const auto& fam : families)
            for (const auto& s : random_points(fam, 300.0, 16, 99)) {
                const double zq = moments::solve_self_consistent(s.params, s.x).Z;
                const double zi = moments::solve_by_iteration(s.params, s.x).Z;
                w = std::max(w, std::abs(zq - zi));
            }
        out.push_back(make_check("inversion: quadratic root vs fixed-point iteration", w, 1e-10));
    }

    {
        double w = 0.0;
        for (const auto& fam : families)
            for (const auto& s : random_points(fam, 300.0, 16, 5)) {
                const double Z = moments::solve_self_consistent(s.params, s.x).Z;
                const double an = moments::inversion_gradient(s.params, s.x, Z);
                const double h = 1e-6 * s.params.wavelength();
                const double fd = (moments::solve_self_consistent(s.params, s.x + h).Z -
                                   moments::solve_self_consistent(s.params, s.x - h).Z) /
                                  (2.0 * h);
                w = std::max(w, std::abs(an - fd) / std::max(std::abs(an), 1e-6));
            }
        out.push_back(make_check("inversion gradient: implicit vs central difference", w, 1e-6));
    }

    {
        double w = 0.0;
        for (const auto& fam : families)
            for (const auto& s : random_points(fam, 300.0, 16, 11)) {
                SystemParams m = s.params;
                m.delta = -m.delta;
                w = std::max(w, std::abs(moments::mean_force(s.params, s.x) + moments::mean_force(m, s.x)));
                w = std::max(w, std::abs(lamb::force_lamb(s.params, s.x) + lamb::force_lamb(m, s.x)));
            }
        out.push_back(make_check("mean force odd in detuning", w, 1e-12));
    }

    {
        double w = 0.0;
        for (const auto& fam : families)
            for (const auto& s : random_points(fam, 300.0, 16, 13)) {
                const auto sol = moments::solve_self_consistent(s.params, s.x);
                const auto sys = moments::system_matrix(s.params, s.x, sol.Z);
                const auto X0 = moments::adiabatic_moments(s.params, coupling(s.params, s.x), sol.Z);
                const moments::Vector4 r = sys.M * X0.as_vector() + sys.v;
                w = std::max({w, r.cwiseAbs().maxCoeff(), std::abs(X0.Phi - sol.N) / std::max(sol.N, 1e-12)});
            }
        out.push_back(make_check("zeroth-order moments solve M X0 + v = 0", w, 1e-9));
    }

    {
        double w = 0.0;
        for (const auto& fam : families)
            for (const auto& s : random_points(fam, 300.0, 16, 17)) {
                const double Z = moments::solve_self_consistent(s.params, s.x).Z;
                const double G = coupling(s.params, s.x);
                const auto a = motion::noise_response_row(s.params, G, Z);
                const auto b = motion::noise_response_coefficients(s.params, G, Z);
                w = std::max(w, (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff());
            }
        out.push_back(make_check("noise response: printed coefficients vs -M^-1 row", w, 1e-10));
    }

    {
        // co-rotating frame: the orbit's time derivative is -i w (alpha, s) with z fixed
        SystemParams strong;
        strong.gamma = 10;
        strong.nu = 20;
        strong.g = 100;
        double w = 0.0;
        for (double d : deltas) {
            strong.delta = d;
            for (int i = 0; i < 32; ++i) {
                const double x = half_period(strong) * i / 32;
                const auto o = lamb::lasing_orbit(strong, x);
                const lamb::LambState st{o.alpha, o.s, o.z};
                const auto r = lamb::lamb_rhs(st, strong, x);
                const lamb::complex iw(0.0, -o.frequency);
                w = std::max({w, std::abs(r.alpha - iw * o.alpha), std::abs(r.s - iw * o.s), std::abs(r.z)});
            }
        }
        out.push_back(make_check("lamb lasing orbit solves the c-number equations", w, 1e-10));
    }

    {
        double w = 0.0;
        for (double y = 0.1; y <= 10.0; y *= 1.3) {
            const auto m = goodcavity::gc_min_temperature(y);
            w = std::max(w, std::abs(goodcavity::gc_temperature({m.a, y}) - m.kT));
        }
        out.push_back(make_check("good-cavity minimum identity", w, 1e-12));
    }
    return out;
}

[[nodiscard]] inline std::string describe(const Check& c)
{
    std::ostringstream os;
    os << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  (worst " << c.worst << ", tol " << c.tolerance << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    return os.str();
}

} // namespace cqlaser::selftest
