#pragma once

// kappa -> 0 limit with the emission rate scaled as W = a kappa and pumping
// ratio y = nu / Delta (gamma = 0). Temperatures in units of hbar kappa.

#include "core.hpp"
#include "motion.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cqlaser::goodcavity {

struct OperatingPoint {
    double a = 1.0; // W / kappa
    double y = 1.0; // nu / Delta
};

inline void require_positive(const OperatingPoint& op)
{
    if (!(op.a > 0.0) || !(op.y > 0.0))
        throw std::invalid_argument("good-cavity operating point needs a > 0 and y > 0");
}

/// kT / (hbar kappa) = (2a^2 + (a-1)^2 y^2) / (2 a y).
[[nodiscard]] inline double gc_temperature(const OperatingPoint& op)
{
    require_positive(op);
    const double am1 = op.a - 1.0;
    return (2.0 * op.a * op.a + am1 * am1 * op.y * op.y) / (2.0 * op.a * op.y);
}

struct MinimumTemperature {
    double kT = 0.0;
    double a = 0.0;
};

/// Minimum over a: kT = sqrt(y^2 + 2) - y at a* = y / sqrt(y^2 + 2).
[[nodiscard]] inline MinimumTemperature gc_min_temperature(double y)
{
    if (!(y > 0.0)) throw std::invalid_argument("gc_min_temperature: y must be > 0");
    const double r = std::sqrt(y * y + 2.0);
    // sqrt(y^2+2) - y = 2 / (sqrt(y^2+2) + y), stable for large y
    return {2.0 / (r + y), y / r};
}

/// Parameters of the scaled family at kappa/nu = `ratio`: kappa from `base`,
/// nu = kappa/ratio, Delta = nu/y, gamma = 0, and g such that W(x_ref) = a kappa.
[[nodiscard]] inline SystemParams family_member(const SystemParams& base, const OperatingPoint& op,
                                                double ratio, double x_ref)
{
    require_positive(op);
    if (base.gamma > 0.0)
        throw std::invalid_argument("good-cavity family requires gamma = 0");
    if (!(ratio > 0.0)) throw std::invalid_argument("kappa/nu ratio must be > 0");
    SystemParams p = base;
    p.gamma = 0.0;
    p.nu = p.kappa / ratio;
    p.delta = p.nu / op.y;
    const double Gam = p.total_damping();
    const double G2 = op.a * p.kappa * (Gam * Gam + p.delta * p.delta) / Gam;
    const double c = std::cos(p.wavenumber * x_ref);
    if (std::abs(c) < 1e-12) throw std::invalid_argument("x_ref must not be a node");
    p.g = std::sqrt(G2) / std::abs(c);
    return p;
}

struct ConvergencePoint {
    double kappa_over_nu = 0.0;
    double kT_full = 0.0; // pointwise motion pipeline at x_ref
    double kT_limit = 0.0;
    double rel_error = 0.0;
};

/// Full-pipeline pointwise temperature vs the closed form along the kappa -> 0 family.
[[nodiscard]] inline std::vector<ConvergencePoint>
gc_convergence_check(const SystemParams& base, const OperatingPoint& op,
                     const std::vector<double>& kappa_over_nu = {1e-1, 1e-2, 1e-3},
                     double x_ref = pi / 8.0)
{
    const double limit = gc_temperature(op);
    std::vector<ConvergencePoint> out;
    out.reserve(kappa_over_nu.size());
    for (double r : kappa_over_nu) {
        const auto p = family_member(base, op, r, x_ref);
        ConvergencePoint c;
        c.kappa_over_nu = r;
        c.kT_full = motion::local_temperature(p, x_ref) / p.kappa;
        c.kT_limit = limit;
        c.rel_error = std::abs(c.kT_full - limit) / limit;
        out.push_back(c);
    }
    return out;
}

} // namespace cqlaser::goodcavity
