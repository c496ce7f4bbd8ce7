#pragma once

// Semiclassical Langevin trajectories of the atom in the adiabatic light field:
//
//   p <- p + [F(x) + beta(x) p/m] dt + sqrt(2 D(x) dt) xi,   x <- x + (p/m) dt
//
// with the freshly updated p in the position step. F, beta and D = D_field + D_rec
// come from the moment model, tabulated once per period and interpolated.

#include "core.hpp"
#include "lamb.hpp"
#include "moments.hpp"
#include "motion.hpp"
#include "parallel.hpp"
#include "trajectory.hpp"

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cqlaser::stochsim {

struct LocalCoefficients {
    double F = 0.0;
    double beta = 0.0;
    double D = 0.0;
    double N = 0.0;
    double Z = 0.0;
};

template <class T>
concept MotionField = requires(const T& f, double x) {
    { f.coefficients(x) } -> std::same_as<LocalCoefficients>;
};

/// Periodic table of LocalCoefficients with 4-point cubic interpolation.
class ForceTable {
public:
    ForceTable(double period, std::vector<LocalCoefficients> samples)
        : period_(period), samples_(std::move(samples))
    {
        if (!(period_ > 0.0) || samples_.size() < 4)
            throw std::invalid_argument("ForceTable needs period > 0 and >= 4 samples");
        h_ = period_ / static_cast<double>(samples_.size());
    }

    static ForceTable from_function(double period, std::size_t points,
                                    const std::function<LocalCoefficients(double)>& fn)
    {
        std::vector<LocalCoefficients> s(points);
        const double h = period / static_cast<double>(points);
        for (std::size_t i = 0; i < points; ++i) s[i] = fn(static_cast<double>(i) * h);
        return {period, std::move(s)};
    }

    /// Moment-model coefficients over one lambda/2 period.
    static ForceTable from_params(const SystemParams& p, std::size_t points = 1024,
                                  unsigned threads = 1)
    {
        const double L = half_period(p);
        const double h = L / static_cast<double>(points);
        auto s = parallel_map(points, threads, [&](std::size_t i) {
            const double x = static_cast<double>(i) * h;
            const auto sol = moments::solve_self_consistent(p, x);
            return LocalCoefficients{moments::mean_force(p, x), motion::friction(p, x),
                                     motion::diffusion_field(p, x) + motion::diffusion_recoil(p, x),
                                     sol.N, sol.Z};
        });
        return {L, std::move(s)};
    }

    [[nodiscard]] LocalCoefficients coefficients(double x) const
    {
        double u = std::fmod(x, period_);
        if (u < 0.0) u += period_;
        const double s = u / h_;
        const auto n = static_cast<long>(samples_.size());
        long i = static_cast<long>(std::floor(s));
        const double t = s - static_cast<double>(i);
        auto at = [&](long j) -> const LocalCoefficients& { return samples_[static_cast<std::size_t>(((j % n) + n) % n)]; };
        // cubic Lagrange weights on nodes i-1, i, i+1, i+2
        const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        const auto& a = at(i - 1);
        const auto& b = at(i);
        const auto& c = at(i + 1);
        const auto& d = at(i + 2);
        auto mix = [&](double LocalCoefficients::*m) {
            return w0 * a.*m + w1 * b.*m + w2 * c.*m + w3 * d.*m;
        };
        return {mix(&LocalCoefficients::F), mix(&LocalCoefficients::beta), mix(&LocalCoefficients::D),
                mix(&LocalCoefficients::N), mix(&LocalCoefficients::Z)};
    }

    [[nodiscard]] double period() const { return period_; }
    [[nodiscard]] const std::vector<LocalCoefficients>& samples() const { return samples_; }

    [[nodiscard]] double max_abs_friction() const
    {
        double m = 0.0;
        for (const auto& s : samples_) m = std::max(m, std::abs(s.beta));
        return m;
    }

    [[nodiscard]] double mean_friction() const
    {
        double acc = 0.0;
        for (const auto& s : samples_) acc += s.beta;
        return acc / static_cast<double>(samples_.size());
    }

    /// U'' at the grid origin (an antinode for the moment-model table), -dF/dx by central difference.
    [[nodiscard]] double curvature_at_origin() const
    {
        return -(samples_[1].F - samples_.back().F) / (2.0 * h_);
    }

private:
    double period_;
    std::vector<LocalCoefficients> samples_;
    double h_ = 0.0;
};

static_assert(MotionField<ForceTable>);

[[nodiscard]] inline std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-trajectory generator: stream i of seed s is seeded with splitmix64(s ^ i).
[[nodiscard]] inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index)
{
    return std::mt19937_64(splitmix64(seed ^ index));
}

struct PhaseSpacePoint {
    double x = 0.0;
    double p = 0.0;
};

struct SimulationOptions {
    std::size_t stride = 1;         // record every `stride` steps
    unsigned noise_substeps = 1;    // normals drawn per step, combined as sum/sqrt(n)
    std::uint64_t stream = 0;       // trajectory index within the ensemble
    double max_friction_rate = 0.0; // max |beta|/m for the stability guard (0: skip)
    double oscillation_rate = 0.0;  // omega_osc for the stability guard (0: skip)
};

/// Euler-Maruyama integration in an arbitrary motion field.
template <MotionField Field>
[[nodiscard]] Trajectory simulate_in_field(const Field& field, double mass, PhaseSpacePoint init,
                                           std::uint64_t seed, double dt, double t_end,
                                           const SimulationOptions& opt = {})
{
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("simulate: dt and t_end must be > 0");
    const double fastest = std::max(opt.max_friction_rate, opt.oscillation_rate);
    if (fastest > 0.0 && dt * fastest >= 0.1) {
        std::ostringstream msg;
        msg << "simulate: dt = " << dt << " too large for friction/oscillation rate " << fastest
            << "; use dt < " << 0.1 / fastest;
        throw std::invalid_argument(msg.str());
    }
    const std::size_t stride = opt.stride == 0 ? 1 : opt.stride;
    const unsigned sub = opt.noise_substeps == 0 ? 1 : opt.noise_substeps;
    const double sub_norm = 1.0 / std::sqrt(static_cast<double>(sub));

    auto rng = make_stream(seed, opt.stream);
    std::normal_distribution<double> normal(0.0, 1.0);

    Trajectory traj;
    traj.seed = seed;
    traj.dt = dt;
    traj.mode = TrajectoryMode::AdiabaticStochastic;

    double x = init.x;
    double p = init.p;
    auto record = [&](double t) {
        const auto c = field.coefficients(x);
        traj.samples.push_back({t, x, p, c.N, c.Z});
    };

    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    traj.samples.reserve(steps / stride + 2);
    record(0.0);
    for (std::size_t i = 1; i <= steps; ++i) {
        const auto c = field.coefficients(x);
        double xi = 0.0;
        for (unsigned k = 0; k < sub; ++k) xi += normal(rng);
        xi *= sub_norm;
        p += (c.F + c.beta * p / mass) * dt + std::sqrt(2.0 * std::max(c.D, 0.0) * dt) * xi;
        x += p / mass * dt;
        if (i % stride == 0 || i == steps) record(static_cast<double>(i) * dt);
    }
    return traj;
}

/// Stability-guard rates for a moment-model table: (max|beta|/m, omega_osc at the antinode).
[[nodiscard]] inline SimulationOptions guarded_options(const ForceTable& table, double mass,
                                                       SimulationOptions opt = {})
{
    opt.max_friction_rate = table.max_abs_friction() / mass;
    opt.oscillation_rate = std::sqrt(std::abs(table.curvature_at_origin()) / mass);
    return opt;
}

struct LambModeOptions {
    lamb::LambState internal{{0.1, 0.0}, {0.0, 0.0}, 0.0};
};

/// One trajectory in either mode. Stochastic mode uses the moment-model table
/// (built here unless supplied); lamb mode integrates the deterministic coupled
/// c-number dynamics and ignores the seed.
[[nodiscard]] inline Trajectory simulate(const SystemParams& params, PhaseSpacePoint init,
                                         std::uint64_t seed, double dt, double t_end,
                                         TrajectoryMode mode, const SimulationOptions& opt = {},
                                         const ForceTable* table = nullptr,
                                         const LambModeOptions& lamb_opt = {})
{
    if (mode == TrajectoryMode::FullLamb) {
        auto traj = lamb::integrate_coupled(params, {init.x, init.p, lamb_opt.internal}, dt, t_end,
                                            opt.stride);
        traj.seed = seed;
        return traj;
    }
    std::optional<ForceTable> own;
    if (!table) {
        own.emplace(ForceTable::from_params(params));
        table = &*own;
    }
    auto traj = simulate_in_field(*table, params.mass(), init, seed, dt, t_end,
                                  guarded_options(*table, params.mass(), opt));
    traj.heating_warning = !(table->mean_friction() < 0.0);
    return traj;
}

/// n_traj stochastic trajectories; trajectory i uses stream i. Deterministic in (seed, dt, params).
[[nodiscard]] inline std::vector<Trajectory>
simulate_ensemble(const SystemParams& params, const ForceTable& table, PhaseSpacePoint init,
                  std::uint64_t seed, double dt, double t_end, std::size_t n_traj,
                  SimulationOptions opt = {}, unsigned threads = 1)
{
    return parallel_map(n_traj, threads, [&](std::size_t i) {
        SimulationOptions o = opt;
        o.stream = i;
        return simulate(params, init, seed, dt, t_end, TrajectoryMode::AdiabaticStochastic, o, &table);
    });
}

struct EnsembleStats {
    double kT_emp = 0.0;
    double kT_se = 0.0;
    double loc = 0.0;
    double loc_se = 0.0;
    std::size_t n_traj = 0;
    double window = 0.0;
};

/// Late-window estimators. kT_emp is the mean over trajectories of the time
/// average of p^2/m over the last `window` fraction of samples; standard errors
/// come from batch means (one batch per trajectory, or ten batches within a
/// single trajectory).
[[nodiscard]] inline EnsembleStats ensemble_stats(const std::vector<Trajectory>& trajs, double window,
                                                  const SystemParams& p)
{
    if (trajs.empty()) throw std::invalid_argument("ensemble_stats: no trajectories");
    if (!(window > 0.0 && window <= 1.0))
        throw std::invalid_argument("ensemble_stats: window must be in (0, 1]");

    const double m = p.mass();
    const double well = half_period(p);
    auto localized = [&](double x) {
        const double d = x - std::round(x / well) * well;
        return std::abs(d) <= 0.25 * well ? 1.0 : 0.0;
    };

    std::vector<double> kt_batches;
    std::vector<double> loc_batches;
    auto add_batches = [&](const Trajectory& tr, std::size_t batches) {
        const auto n = tr.samples.size();
        if (n == 0) throw std::invalid_argument("ensemble_stats: empty trajectory");
        auto count = static_cast<std::size_t>(std::ceil(window * static_cast<double>(n)));
        count = std::clamp<std::size_t>(count, 1, n);
        const std::size_t first = n - count;
        batches = std::min(batches, count);
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t lo = first + b * count / batches;
            const std::size_t hi = first + (b + 1) * count / batches;
            double kt = 0.0;
            double loc = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                kt += tr.samples[i].p * tr.samples[i].p / m;
                loc += localized(tr.samples[i].x);
            }
            const auto len = static_cast<double>(hi - lo);
            kt_batches.push_back(kt / len);
            loc_batches.push_back(loc / len);
        }
    };
    const std::size_t per_traj = trajs.size() == 1 ? 10 : 1;
    for (const auto& tr : trajs) add_batches(tr, per_traj);

    auto mean_se = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        if (v.size() < 2) return std::pair{mean, 0.0};
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size() - 1);
        return std::pair{mean, std::sqrt(var / static_cast<double>(v.size()))};
    };

    EnsembleStats s;
    std::tie(s.kT_emp, s.kT_se) = mean_se(kt_batches);
    std::tie(s.loc, s.loc_se) = mean_se(loc_batches);
    s.n_traj = trajs.size();
    s.window = window;
    return s;
}

} // namespace cqlaser::stochsim
