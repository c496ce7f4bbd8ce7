#pragma once

// Second-order moment model. Xi = (Phi, Pi, Sigma, Lambda) = (a+a, s+s-,
// a+s- + s+a, (a+s- - s+a)/i) obeys d Xi/dt = M Xi + v once the commutator
// i[Sigma, Lambda] is factorized as 2 Z Phi + 2 Pi with a c-number inversion Z,
// which is then fixed self-consistently by the continuity equation.
//
// D(Z) = det(M)/4 = kappa (gamma+nu)(Gamma^2 + Delta^2) + Gamma G^2 (kappa - (gamma+nu) Z)
// is affine in Z, so self-consistency is a quadratic in Z.

#include "core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cqlaser::moments {

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;

struct MomentVector {
    double Phi = 0.0;
    double Pi = 0.0;
    double Sigma = 0.0;
    double Lambda = 0.0;

    [[nodiscard]] Vector4 as_vector() const { return {Phi, Pi, Sigma, Lambda}; }
    [[nodiscard]] static MomentVector from(const Vector4& v) { return {v(0), v(1), v(2), v(3)}; }
};

struct MomentSolution {
    double x = 0.0;
    double N = 0.0;
    double P = 0.0;
    double Z = 0.0;
    double W = 0.0;
    double detM4 = 0.0;
    double Sigma = 0.0;
    double Lambda = 0.0;
};

class NoPhysicalRoot : public std::runtime_error {
public:
    explicit NoPhysicalRoot(const std::string& what) : std::runtime_error(what) {}
};

struct LinearSystem {
    Matrix4 M;
    Vector4 v;
};

[[nodiscard]] inline LinearSystem system_matrix_for_coupling(const SystemParams& p, double G, double Z)
{
    const double Gam = p.total_damping();
    const double a = p.atomic_damping();
    LinearSystem s;
    // clang-format off
    s.M << -2.0 * p.kappa, 0.0,        G,    0.0,
            0.0,          -2.0 * a,   -G,    0.0,
            2.0 * Z * G,   2.0 * G,   -Gam, -p.delta,
            0.0,           0.0,        p.delta, -Gam;
    // clang-format on
    s.v << 0.0, 2.0 * p.nu, 0.0, 0.0;
    return s;
}

[[nodiscard]] inline LinearSystem system_matrix(const SystemParams& p, double x, double Z)
{
    return system_matrix_for_coupling(p, coupling(p, x), Z);
}

/// det(M)/4 as a polynomial in (G^2, Z).
[[nodiscard]] inline double det_m4(const SystemParams& p, double G2, double Z)
{
    const double Gam = p.total_damping();
    const double a = p.atomic_damping();
    return p.kappa * a * (Gam * Gam + p.delta * p.delta) + Gam * G2 * (p.kappa - a * Z);
}

/// W = Gamma G^2 / (Gamma^2 + Delta^2).
[[nodiscard]] inline double emission_rate_for_coupling(const SystemParams& p, double G)
{
    const double Gam = p.total_damping();
    return Gam * G * G / (Gam * Gam + p.delta * p.delta);
}

[[nodiscard]] inline double emission_rate(const SystemParams& p, double x)
{
    return emission_rate_for_coupling(p, coupling(p, x));
}

/// X0 = -M^{-1} v by LU on the 4x4 system.
[[nodiscard]] inline MomentVector adiabatic_moments(const SystemParams& p, double G, double Z)
{
    const auto sys = system_matrix_for_coupling(p, G, Z);
    return MomentVector::from(-sys.M.partialPivLu().solve(sys.v));
}

namespace detail {

// Self-consistency as f(Z) = (nu - gamma - aZ)(D0 - A Z) - 2 kappa nu Gamma G^2 = 0
// with a = gamma+nu, D0 = D(Z=0), A = Gamma a G^2.
struct ZQuadratic {
    double a, D0, A, rhs, lin; // lin = nu - gamma

    ZQuadratic(const SystemParams& p, double G2)
    {
        const double Gam = p.total_damping();
        a = p.atomic_damping();
        D0 = det_m4(p, G2, 0.0);
        A = Gam * a * G2;
        rhs = 2.0 * p.kappa * p.nu * Gam * G2;
        lin = p.nu - p.gamma;
    }
    [[nodiscard]] double value(double Z) const { return (lin - a * Z) * (D0 - A * Z) - rhs; }
    [[nodiscard]] double dZ(double Z) const { return -a * (D0 - A * Z) - A * (lin - a * Z); }
};

} // namespace detail

/// Physical inversion at coupling G: the smaller root of the Z-quadratic.
/// It is the only root with N >= 0 and D > 0, and it connects to
/// (nu-gamma)/(nu+gamma) as G -> 0.
[[nodiscard]] inline double self_consistent_inversion(const SystemParams& p, double G)
{
    const double G2 = G * G;
    const double a = p.atomic_damping();
    if (p.nu == 0.0) return -1.0;
    const detail::ZQuadratic q(p, G2);
    if (q.A == 0.0) return q.lin / a;

    // qa Z^2 + qb Z + qc = 0, qa > 0
    const double qa = a * q.A;
    const double qb = -(a * q.D0 + q.lin * q.A);
    const double qc = q.lin * q.D0 - q.rhs;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (!(disc >= 0.0)) throw NoPhysicalRoot("moment model: negative discriminant in Z-quadratic");
    const double sq = std::sqrt(disc);
    // smaller root without cancellation
    const double Z = qb < 0.0 ? 2.0 * qc / (-qb + sq) : (-qb - sq) / (2.0 * qa);
    return Z;
}

[[nodiscard]] inline MomentSolution solution_at_inversion(const SystemParams& p, double x, double Z)
{
    const double G = coupling(p, x);
    MomentSolution s;
    s.x = x;
    s.Z = Z;
    s.P = 0.5 * (1.0 + Z);
    s.detM4 = det_m4(p, G * G, Z);
    s.N = p.nu * p.total_damping() * G * G / s.detM4;
    s.W = emission_rate_for_coupling(p, G);
    // Sigma = 2 kappa N / G and Lambda = Delta Sigma / Gamma, written to stay finite at G = 0
    s.Sigma = 2.0 * p.kappa * p.nu * p.total_damping() * G / s.detM4;
    s.Lambda = 2.0 * p.kappa * p.nu * p.delta * G / s.detM4;
    return s;
}

inline void check_physical(const MomentSolution& s)
{
    const double tol = 1e-12;
    if (!(s.Z >= -1.0 - tol && s.Z <= 1.0 + tol) || !(s.detM4 > 0.0) || !(s.N >= 0.0))
        throw NoPhysicalRoot("moment model: no root with Z in [-1,1], N >= 0, det M > 0 (Z = " +
                             std::to_string(s.Z) + ")");
}

/// Self-consistent steady state of the moment model at position x.
[[nodiscard]] inline MomentSolution solve_self_consistent(const SystemParams& p, double x)
{
    const auto s = solution_at_inversion(p, x, self_consistent_inversion(p, coupling(p, x)));
    check_physical(s);
    return s;
}

/// Independent route to the inversion, using only the LU solution Pi(Z) of the
/// 4x4 system: damped fixed-point iteration Z <- (1-w) Z + w (2 Pi(Z) - 1).
/// Where the physical root repels the iteration (slope of 2 Pi(Z) - 1 above 1)
/// the same residual is bisected on [-1, Z_pole), which holds exactly one root.
[[nodiscard]] inline MomentSolution solve_by_iteration(const SystemParams& p, double x,
                                                       double tol = 1e-13, int max_iter = 20000)
{
    const double G = coupling(p, x);
    const double G2 = G * G;
    const double a = p.atomic_damping();
    auto residual = [&](double Z) { return 2.0 * adiabatic_moments(p, G, Z).Pi - 1.0 - Z; };
    auto physical = [&](double Z) {
        auto s = solution_at_inversion(p, x, Z);
        return s.detM4 > 0.0 && s.N >= 0.0 && Z >= -1.0 - 1e-12 && Z <= 1.0 + 1e-12;
    };

    double Z = a > 0.0 ? (p.nu - p.gamma) / a : 0.0;
    double w = 0.5;
    double prev_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        const double step = residual(Z);
        if (!std::isfinite(step)) break;
        if (std::abs(step) < tol) {
            Z += step;
            if (!physical(Z)) break;
            auto s = solution_at_inversion(p, x, Z);
            check_physical(s);
            return s;
        }
        // back off when the iteration starts oscillating or growing
        if (std::abs(step) > prev_step) w *= 0.5;
        if (w < 1e-6) break;
        prev_step = std::abs(step);
        Z += w * step;
    }

    // det M = 0 at Z_pole; the residual changes sign once on [-1, Z_pole)
    const double A = p.total_damping() * a * G2;
    double lo = -1.0;
    double hi = A > 0.0 ? std::min(1.0, det_m4(p, G2, 0.0) / A) : 1.0;
    hi -= 1e-15 * std::max(1.0, std::abs(hi));
    double f_lo = residual(lo);
    const double f_hi = residual(hi);
    if (!(f_lo * f_hi <= 0.0)) throw NoPhysicalRoot("moment model: fixed-point residual has no sign change");
    while (hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = residual(mid);
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    auto s = solution_at_inversion(p, x, 0.5 * (lo + hi));
    check_physical(s);
    return s;
}

struct RateDerivative {
    double dN = 0.0;
    double dP = 0.0;
};

/// Quantum rate equations: N' = -2(kappa - ZW)N + 2WP, P' = -2(gamma+W+nu)P - 2ZWN + 2nu.
[[nodiscard]] inline RateDerivative rate_equation_rhs(double N, double P, double Z,
                                                      const SystemParams& p, double x)
{
    const double W = emission_rate(p, x);
    return {-2.0 * (p.kappa - Z * W) * N + 2.0 * W * P,
            -2.0 * (p.gamma + W + p.nu) * P - 2.0 * Z * W * N + 2.0 * p.nu};
}

/// Mean force 2 kappa nu Delta G (grad G) / D at the self-consistent inversion.
[[nodiscard]] inline double mean_force(const SystemParams& p, double x)
{
    const auto s = solve_self_consistent(p, x);
    return 2.0 * p.kappa * p.nu * p.delta * coupling(p, x) * grad_coupling(p, x) / s.detM4;
}

/// dZ/dx by implicit differentiation of the Z-quadratic (Z depends on x through G^2).
[[nodiscard]] inline double inversion_gradient(const SystemParams& p, double x, double Z)
{
    const double G = coupling(p, x);
    const double dG = grad_coupling(p, x);
    if (G * dG == 0.0 || p.nu == 0.0) return 0.0;
    const double Gam = p.total_damping();
    const double a = p.atomic_damping();
    const detail::ZQuadratic q(p, G * G);
    const double f_G2 = (q.lin - a * Z) * (p.kappa * Gam - Gam * a * Z) - 2.0 * p.kappa * p.nu * Gam;
    return -f_G2 / q.dZ(Z) * 2.0 * G * dG;
}

} // namespace cqlaser::moments
