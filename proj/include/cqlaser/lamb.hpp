#pragma once

// Factorized c-number model of the pumped atom + cavity mode: field amplitude
// alpha, polarization s and inversion z obey
//
//   d alpha/dt = -kappa alpha + G s
//   d s/dt     = (i Delta - gamma - nu) s + G z alpha
//   d z/dt     = -2(gamma+nu) z - 2G(alpha* s + s* alpha) + 2(nu - gamma)
//
// The closed-form steady state below (threshold, emission rate W, z = kappa/W)
// neglects kappa against gamma+nu in the polarization response. The exact
// long-time solution of the equations is the rotating lasing orbit returned by
// lasing_orbit(); both coincide for Delta = 0 and differ by O(kappa/(gamma+nu))
// otherwise.

#include "core.hpp"
#include "trajectory.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace cqlaser::lamb {

using complex = std::complex<double>;

struct LambState {
    complex alpha{};
    complex s{};
    double z = 0.0;
};

struct LambSteady {
    complex alpha{}; // real and >= 0 by phase convention
    complex s{};
    double z = 0.0;
    double N = 0.0;
    bool above_threshold = false;
};

[[nodiscard]] inline LambState lamb_rhs(const LambState& st, const SystemParams& p, double x)
{
    const double G = coupling(p, x);
    const double a = p.atomic_damping();
    LambState d;
    d.alpha = -p.kappa * st.alpha + G * st.s;
    d.s = complex(-a, p.delta) * st.s + G * st.z * st.alpha;
    const double cross = 2.0 * std::real(std::conj(st.alpha) * st.s); // alpha* s + s* alpha
    d.z = -2.0 * a * st.z - 2.0 * G * cross + 2.0 * (p.nu - p.gamma);
    return d;
}

/// Lasing threshold G_th = sqrt(kappa((gamma+nu)^2 + Delta^2)/(nu - gamma)); empty when nu <= gamma.
[[nodiscard]] inline std::optional<double> threshold_coupling(const SystemParams& p)
{
    if (!(p.nu > p.gamma)) return std::nullopt;
    const double a = p.atomic_damping();
    return std::sqrt(p.kappa * (a * a + p.delta * p.delta) / (p.nu - p.gamma));
}

/// Emission rate into the mode, W = (gamma+nu) G^2 / ((gamma+nu)^2 + Delta^2).
[[nodiscard]] inline double emission_rate_lamb(const SystemParams& p, double x)
{
    const double G = coupling(p, x);
    const double a = p.atomic_damping();
    const double den = a * a + p.delta * p.delta;
    if (den == 0.0) return 0.0;
    return a * G * G / den;
}

[[nodiscard]] inline LambSteady below_threshold_state(const SystemParams& p)
{
    LambSteady out;
    const double a = p.atomic_damping();
    out.z = a > 0.0 ? (p.nu - p.gamma) / a : 0.0;
    return out;
}

/// Closed-form steady state at fixed x. At G == G_th the sub-threshold branch is returned.
[[nodiscard]] inline LambSteady lamb_steady_state(const SystemParams& p, double x)
{
    const auto gth = threshold_coupling(p);
    const double G = coupling(p, x);
    if (!gth || !(std::abs(G) > *gth)) return below_threshold_state(p);

    const double W = emission_rate_lamb(p, x);
    LambSteady out;
    out.above_threshold = true;
    out.z = p.kappa / W;
    const double P = 0.5 * (1.0 + out.z);
    out.N = std::max(0.0, (p.nu * (1.0 - P) - p.gamma * P) / p.kappa);
    out.alpha = std::sqrt(out.N);
    out.s = p.kappa * out.alpha / G;
    return out;
}

/// Exact stationary solution of the c-number equations. Above threshold the
/// field and polarization rotate, alpha(t) = alpha e^{-i w t}, with the pulled
/// frequency w = -kappa Delta / (kappa + gamma + nu); N and z are constant.
struct LasingOrbit {
    double N = 0.0;
    double z = 0.0;
    double frequency = 0.0;
    complex alpha{}; // phase at t = 0, real >= 0
    complex s{};
    bool above_threshold = false;
};

/// Inversion that clamps the exact lasing orbit for coupling G (may exceed the
/// sub-threshold inversion, in which case there is no lasing).
[[nodiscard]] inline double orbit_clamped_inversion(const SystemParams& p, double G)
{
    const double a = p.atomic_damping();
    const double b = p.kappa + a;
    return p.kappa * a * (b * b + p.delta * p.delta) / (G * G * b * b);
}

/// Exact threshold of the c-number equations (instability of the non-lasing state).
[[nodiscard]] inline std::optional<double> exact_threshold_coupling(const SystemParams& p)
{
    if (!(p.nu > p.gamma)) return std::nullopt;
    const double a = p.atomic_damping();
    const double b = p.kappa + a;
    return std::sqrt(p.kappa * a * a * (b * b + p.delta * p.delta) / ((p.nu - p.gamma) * b * b));
}

[[nodiscard]] inline LasingOrbit lasing_orbit(const SystemParams& p, double x)
{
    LasingOrbit out;
    const auto below = below_threshold_state(p);
    out.z = below.z;
    const double G = coupling(p, x);
    const auto gth = exact_threshold_coupling(p);
    if (!gth || !(std::abs(G) > *gth)) return out;

    const double a = p.atomic_damping();
    out.above_threshold = true;
    out.frequency = -p.kappa * p.delta / (p.kappa + a);
    out.z = orbit_clamped_inversion(p, G);
    out.N = std::max(0.0, ((p.nu - p.gamma) - a * out.z) / (2.0 * p.kappa));
    out.alpha = std::sqrt(out.N);
    out.s = complex(p.kappa, -out.frequency) * out.alpha / G;
    return out;
}

/// Steady mean force 2 kappa Delta/(gamma+nu) * (grad G / G) * N; zero below threshold.
/// 2 kappa Delta/(gamma+nu) (grad G / G) N for a given photon number N.
[[nodiscard]] inline double force_at_photon_number(const SystemParams& p, double x, double N)
{
    const double G = coupling(p, x);
    if (G == 0.0 || N == 0.0) return 0.0;
    return 2.0 * p.kappa * p.delta / p.atomic_damping() * grad_coupling(p, x) / G * N;
}

[[nodiscard]] inline double force_lamb(const SystemParams& p, double x)
{
    const auto st = lamb_steady_state(p, x);
    if (!st.above_threshold) return 0.0;
    return force_at_photon_number(p, x, st.N);
}

/// Force expectation (grad G) <Lambda> = (grad G)(-i)(alpha* s - s* alpha) = 2 (grad G) Im(alpha* s).
[[nodiscard]] inline double instantaneous_force(const LambState& st, const SystemParams& p, double x)
{
    return 2.0 * grad_coupling(p, x) * std::imag(std::conj(st.alpha) * st.s);
}

/// Atom-field interaction energy <H> = -Delta (1+z)/2 + iG(alpha* s - s* alpha).
[[nodiscard]] inline double interaction_energy(const LambState& st, const SystemParams& p, double x)
{
    const double G = coupling(p, x);
    return -p.delta * 0.5 * (1.0 + st.z) - 2.0 * G * std::imag(std::conj(st.alpha) * st.s);
}

// Packed real state for the integrators: (Re a, Im a, Re s, Im s, z).
using PackedState = std::array<double, 5>;

[[nodiscard]] inline PackedState pack(const LambState& s)
{
    return {s.alpha.real(), s.alpha.imag(), s.s.real(), s.s.imag(), s.z};
}

[[nodiscard]] inline LambState unpack(const PackedState& y)
{
    return {complex(y[0], y[1]), complex(y[2], y[3]), y[4]};
}

/// Integrate the internal equations at fixed x with an adaptive Dormand-Prince 5(4) stepper.
[[nodiscard]] inline LambState integrate_fixed_position(const SystemParams& p, double x,
                                                        LambState init, double t_end,
                                                        double abs_tol = 1e-9,
                                                        double rel_tol = 1e-9)
{
    namespace odeint = boost::numeric::odeint;
    PackedState y = pack(init);
    auto rhs = [&](const PackedState& yy, PackedState& dy, double) {
        dy = pack(lamb_rhs(unpack(yy), p, x));
    };
    odeint::integrate_adaptive(
        odeint::make_controlled<odeint::runge_kutta_dopri5<PackedState>>(abs_tol, rel_tol), rhs,
        y, 0.0, t_end, 1e-3);
    return unpack(y);
}

struct CoupledInit {
    double x = 0.0;
    double p = 0.0;
    LambState internal{};
};

/// Largest dt accepted by integrate_coupled.
[[nodiscard]] inline double max_stable_step(const SystemParams& p)
{
    const double a = p.atomic_damping();
    const double fastest = std::max({p.total_damping(), 2.0 * p.kappa, 2.0 * a, std::abs(p.delta)});
    return fastest > 0.0 ? 0.1 / fastest : std::numeric_limits<double>::infinity();
}

/// Deterministic atom + field dynamics: x' = p/m, p' = F_inst, internal state
/// by the c-number equations; fixed-step RK4. Samples every `stride` steps
/// (first and last step always recorded).
[[nodiscard]] inline Trajectory integrate_coupled(const SystemParams& p, const CoupledInit& init,
                                                  double dt, double t_end, std::size_t stride = 1)
{
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("integrate_coupled: dt and t_end must be > 0");
    if (dt > max_stable_step(p)) {
        std::ostringstream msg;
        msg << "integrate_coupled: dt = " << dt << " violates the stability guard; use dt <= "
            << max_stable_step(p);
        throw std::invalid_argument(msg.str());
    }
    if (stride == 0) stride = 1;

    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 7>; // packed internal state, x, p
    const double m = p.mass();
    auto rhs = [&](const State& y, State& dy, double) {
        const double x = y[5];
        const LambState st{complex(y[0], y[1]), complex(y[2], y[3]), y[4]};
        const auto d = pack(lamb_rhs(st, p, x));
        for (int i = 0; i < 5; ++i) dy[i] = d[i];
        dy[5] = y[6] / m;
        dy[6] = instantaneous_force(st, p, x);
    };

    State y{};
    const auto packed = pack(init.internal);
    for (int i = 0; i < 5; ++i) y[i] = packed[i];
    y[5] = init.x;
    y[6] = init.p;

    Trajectory traj;
    traj.dt = dt;
    traj.mode = TrajectoryMode::FullLamb;
    auto record = [&](double t) {
        traj.samples.push_back({t, y[5], y[6], y[0] * y[0] + y[1] * y[1], y[4]});
    };

    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    traj.samples.reserve(steps / stride + 2);
    odeint::runge_kutta4<State> stepper;
    record(0.0);
    for (std::size_t i = 1; i <= steps; ++i) {
        const double t = static_cast<double>(i - 1) * dt;
        stepper.do_step(rhs, y, t, dt);
        if (i % stride == 0 || i == steps) record(static_cast<double>(i) * dt);
    }
    return traj;
}

} // namespace cqlaser::lamb
