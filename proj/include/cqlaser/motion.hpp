#pragma once

// Velocity-linear friction, momentum diffusion and equilibrium temperature of
// the atomic motion in the adiabatic moment model.
//
// Conventions: F(x, v) ~ F0(x) + beta(x) v, so beta < 0 damps; diffusion D is
// defined by <dF(t) dF(t - tau)> = 2 D delta(tau); kT = Dbar / (-betabar).

#include "core.hpp"
#include "lamb.hpp"
#include "moments.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace cqlaser::motion {

using moments::Matrix4;
using moments::MomentSolution;
using moments::MomentVector;
using moments::Vector4;

struct MotionCoefficients {
    double x = 0.0;
    double F = 0.0;
    double U = 0.0;
    double beta = 0.0;
    double Dfield = 0.0;
    double Drec = 0.0;
};

/// First-order (in velocity) moments X1 = -M^{-1} grad(M^{-1} v) = M^{-1} grad X0,
/// where grad acts through G(x) and the self-consistent Z(x).
[[nodiscard]] inline MomentVector first_order_response(const SystemParams& p, double x)
{
    const auto sol = moments::solve_self_consistent(p, x);
    const double G = coupling(p, x);
    const double dG = grad_coupling(p, x);
    const double dZ = moments::inversion_gradient(p, x, sol.Z);

    const auto sys = moments::system_matrix_for_coupling(p, G, sol.Z);
    const auto lu = sys.M.partialPivLu();
    const Vector4 X0 = -lu.solve(sys.v);

    Matrix4 dM = Matrix4::Zero();
    dM(0, 2) = dG;
    dM(1, 2) = -dG;
    dM(2, 0) = 2.0 * (sol.Z * dG + G * dZ);
    dM(2, 1) = 2.0 * dG;
    // d(X0) = -M^{-1} (dM) X0
    const Vector4 dX0 = -lu.solve(dM * X0);
    return MomentVector::from(lu.solve(dX0));
}

/// beta = (grad G) <Lambda^1> from the matrix route.
[[nodiscard]] inline double friction_matrix(const SystemParams& p, double x)
{
    return grad_coupling(p, x) * first_order_response(p, x).Lambda;
}

/// Closed-form friction coefficient, using analytic dZ/dx.
[[nodiscard]] inline double friction(const SystemParams& p, double x)
{
    const double G = coupling(p, x);
    const double dG = grad_coupling(p, x);
    if (dG == 0.0) return 0.0;
    const auto sol = moments::solve_self_consistent(p, x);
    const double Z = sol.Z;
    const double dZ = moments::inversion_gradient(p, x, Z);
    const double k = p.kappa;
    const double a = p.atomic_damping();
    const double Gam = p.total_damping();
    const double De = p.delta;
    const double G2 = G * G;
    const double D = sol.detM4;
    const double gain = k - a * Z;

    const double z_term = -G2 * G * Gam *
                          (4.0 * k * k * a * a * Gam + G2 * (a - k) * (k * k + a * a * Z)) * dZ;
    const double g_term =
        2.0 * k *
        ((Gam * Gam + De * De) * (G2 * (k * k * k - a * a * a * Z) - 2.0 * k * k * a * a * Gam) +
         Gam * G2 * G2 * gain * gain + 2.0 * k * a * Gam * Gam * G2 * gain) *
        dG;
    return p.nu * De * dG / (D * D * D) * (z_term + g_term);
}

/// Delta-correlation strengths of the moment noise operators (Phi, Pi, Sigma, Lambda).
/// Off-diagonal entries hold half of the listed anticommutator strengths.
[[nodiscard]] inline Matrix4 noise_covariance(const SystemParams& p, const MomentSolution& sol)
{
    const double k = p.kappa;
    const double N = sol.N;
    const double P = sol.P;
    const double dip = 2.0 * k * P + 2.0 * p.gamma * N + 2.0 * p.nu * (1.0 + N);
    Matrix4 C = Matrix4::Zero();
    C(0, 0) = 2.0 * k * N;
    C(1, 1) = 2.0 * p.gamma * P + 2.0 * p.nu * (1.0 - P);
    C(2, 2) = dip;
    C(3, 3) = dip;
    C(0, 2) = C(2, 0) = k * sol.Sigma;
    C(0, 3) = C(3, 0) = k * sol.Lambda;
    C(1, 2) = C(2, 1) = (p.gamma - p.nu) * sol.Sigma;
    C(1, 3) = C(3, 1) = (p.gamma - p.nu) * sol.Lambda;
    return C;
}

/// Quasi-stationary response of Lambda to the noise vector, the Lambda row of -M^{-1}.
[[nodiscard]] inline Vector4 noise_response_row(const SystemParams& p, double G, double Z)
{
    const auto sys = moments::system_matrix_for_coupling(p, G, Z);
    const Matrix4 inv = sys.M.inverse();
    return -inv.row(3).transpose();
}

/// Same row written out in closed form.
[[nodiscard]] inline Vector4 noise_response_coefficients(const SystemParams& p, double G, double Z)
{
    const double k = p.kappa;
    const double a = p.atomic_damping();
    const double D = moments::det_m4(p, G * G, Z);
    return Vector4(a * p.delta * G * Z, k * p.delta * G, k * a * p.delta,
                   k * a * p.total_damping() + G * G * (k - a * Z)) /
           D;
}

/// Field-fluctuation diffusion assembled from the noise covariance: (grad G)^2/2 c^T C c.
[[nodiscard]] inline double diffusion_field_assembled(const SystemParams& p, double x)
{
    const auto sol = moments::solve_self_consistent(p, x);
    const double dG = grad_coupling(p, x);
    const Vector4 c = noise_response_row(p, coupling(p, x), sol.Z);
    return 0.5 * dG * dG * c.dot(noise_covariance(p, sol) * c);
}

/// Closed-form field-fluctuation diffusion. The G^2 (kappa/W) products are
/// evaluated as kappa (Gamma^2 + Delta^2)/Gamma, so nodes are regular.
[[nodiscard]] inline double diffusion_field(const SystemParams& p, double x)
{
    const double G = coupling(p, x);
    const double dG = grad_coupling(p, x);
    if (dG == 0.0) return 0.0;
    const auto sol = moments::solve_self_consistent(p, x);
    const double Z = sol.Z;
    const double k = p.kappa;
    const double gm = p.gamma;
    const double a = p.atomic_damping();
    const double Gam = p.total_damping();
    const double De = p.delta;
    const double De2 = De * De;
    const double G2 = G * G;
    const double D = sol.detM4;
    const double gain = k - a * Z;
    const double G2_k_over_W = k * (Gam * Gam + De2) / Gam; // G^2 * kappa / W

    const double t1 = G2 * 2.0 * k * k * De2 * (gm - p.nu + a * Z) * (2.0 * k * a * Gam + G2 * gain);
    const double inner = k * a * Gam + G2 * gain;
    const double t2 = Gam * Gam * (k * k * a * a * De2 + inner * inner) * (G2 * (1.0 - Z) + G2_k_over_W);
    const double t3 = k * Gam * De2 * G2 *
                      (2.0 * k * gm * (G2_k_over_W - Z * G2) + G2 * (k * k + a * a * Z * Z));
    return p.nu * dG * dG / (D * D * D) * (t1 + t2 + t3);
}

/// Spontaneous-emission recoil diffusion hbar^2 k^2 gamma P times the geometry factor.
[[nodiscard]] inline double diffusion_recoil(const SystemParams& p, double x)
{
    const auto sol = moments::solve_self_consistent(p, x);
    return p.recoil_geometry * p.wavenumber * p.wavenumber * p.gamma * sol.P;
}

enum class ForceModel { Moments, Lamb };

[[nodiscard]] inline double force(const SystemParams& p, double x, ForceModel model)
{
    return model == ForceModel::Moments ? moments::mean_force(p, x) : lamb::force_lamb(p, x);
}

/// U(x) = -int_0^x F, gauge U(antinode at 0) = 0.
[[nodiscard]] inline double potential(const SystemParams& p, double x,
                                      ForceModel model = ForceModel::Moments)
{
    if (x == 0.0) return 0.0;
    auto f = [&](double xx) { return force(p, xx, model); };
    using boost::math::quadrature::gauss_kronrod;
    // split at quarter periods so kinks at nodes or threshold stay on panel edges
    const double quarter = 0.25 * p.wavelength();
    const double lo = std::min(0.0, x);
    const double hi = std::max(0.0, x);
    double acc = 0.0;
    double a = lo;
    while (a < hi) {
        const double next = std::min(hi, (std::floor(a / quarter + 1e-12) + 1.0) * quarter);
        acc += gauss_kronrod<double, 61>::integrate(f, a, next, 15, 1e-13);
        a = next;
    }
    return x > 0.0 ? -acc : acc;
}

/// Potential depth max U - min U over one period.
[[nodiscard]] inline double potential_depth(const SystemParams& p,
                                            ForceModel model = ForceModel::Moments)
{
    // U is monotone between antinode and node since F ~ G grad(G) / D with D > 0
    return std::abs(potential(p, 0.25 * p.wavelength(), model));
}

/// Uniform average over one lambda/2 period by composite Simpson on `points` nodes (odd).
[[nodiscard]] inline double position_average(const std::function<double(double)>& fn,
                                             const SystemParams& p, int points = 513)
{
    if (points < 3) throw std::invalid_argument("position_average: need at least 3 points");
    if (points % 2 == 0) ++points;
    const double L = half_period(p);
    const double h = L / (points - 1);
    double acc = fn(0.0) + fn(L);
    for (int i = 1; i < points - 1; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * fn(i * h);
    return acc * h / 3.0 / L;
}

[[nodiscard]] inline MotionCoefficients motion_coefficients(const SystemParams& p, double x)
{
    MotionCoefficients c;
    c.x = x;
    c.F = moments::mean_force(p, x);
    c.U = potential(p, x);
    c.beta = friction(p, x);
    c.Dfield = diffusion_field(p, x);
    c.Drec = diffusion_recoil(p, x);
    return c;
}

struct EquilibriumSummary {
    double beta_avg = 0.0;
    double D_avg = 0.0;       // field + recoil
    double Dfield_avg = 0.0;
    double Drec_avg = 0.0;
    double kT = 0.0;          // hbar kappa units; NaN when not cooling
    double V = 0.0;
    double E = 0.0;           // kT / 2
    double ratio = 0.0;       // E / V
    bool cooling = false;
};

class HeatingRegime : public std::runtime_error {
public:
    explicit HeatingRegime(double beta_avg)
        : std::runtime_error("heating regime: no equilibrium (position-averaged beta = " +
                             std::to_string(beta_avg) + " >= 0)"),
          beta_avg_(beta_avg)
    {
    }
    [[nodiscard]] double beta_avg() const { return beta_avg_; }

private:
    double beta_avg_;
};

/// Averages and Einstein-relation temperature; never throws on heating, check `cooling`.
[[nodiscard]] inline EquilibriumSummary equilibrium_summary(const SystemParams& p, int points = 513)
{
    EquilibriumSummary s;
    s.beta_avg = position_average([&](double x) { return friction(p, x); }, p, points);
    s.Dfield_avg = position_average([&](double x) { return diffusion_field(p, x); }, p, points);
    s.Drec_avg = position_average([&](double x) { return diffusion_recoil(p, x); }, p, points);
    s.D_avg = s.Dfield_avg + s.Drec_avg;
    s.V = potential_depth(p);
    s.cooling = s.beta_avg < 0.0;
    if (s.cooling) {
        s.kT = s.D_avg / (-s.beta_avg);
        s.E = 0.5 * s.kT;
        s.ratio = s.V > 0.0 ? s.E / s.V : std::numeric_limits<double>::infinity();
    } else {
        s.kT = s.E = s.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
}

/// Einstein-relation equilibrium; throws HeatingRegime when the averaged friction does not damp.
[[nodiscard]] inline EquilibriumSummary equilibrium_temperature(const SystemParams& p, int points = 513)
{
    auto s = equilibrium_summary(p, points);
    if (!s.cooling) throw HeatingRegime(s.beta_avg);
    return s;
}

/// Pointwise temperature (D_field + D_rec)/(-beta) at x; NaN where beta >= 0.
[[nodiscard]] inline double local_temperature(const SystemParams& p, double x)
{
    const double b = friction(p, x);
    if (!(b < 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return (diffusion_field(p, x) + diffusion_recoil(p, x)) / (-b);
}

} // namespace cqlaser::motion
