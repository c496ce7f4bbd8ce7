#pragma once

// Unit system, parameter container and standing-wave coupling profile.
//
// Internal units: hbar = 1, kappa sets the rate scale (kappa = 1 unless a
// caller deliberately scales it), and the wavenumber k sets the length scale
// (k = 1, so one wavelength is 2*pi). Positions passed to library functions
// are in these internal length units; use from_wavelengths()/to_wavelengths()
// at the user-facing boundary.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cqlaser {

inline constexpr double pi = std::numbers::pi;

struct SystemParams {
    double gamma = 0.0;      // atomic half-decay rate
    double nu = 0.0;         // incoherent pump rate
    double g = 0.0;          // peak atom-field coupling
    double kappa = 1.0;      // cavity half-linewidth
    double delta = 0.0;      // cavity-atom detuning, omega_c - omega_a
    double wavenumber = 1.0; // k
    double recoil = 0.01;    // recoil frequency hbar k^2 / (2m)
    double recoil_geometry = 1.0; // projection factor of spontaneous recoil onto the axis

    /// Gamma = kappa + gamma + nu, the damping rate of the cross moments.
    [[nodiscard]] double total_damping() const { return kappa + gamma + nu; }
    /// gamma + nu, the damping rate of the atomic polarization.
    [[nodiscard]] double atomic_damping() const { return gamma + nu; }
    [[nodiscard]] double wavelength() const { return 2.0 * pi / wavenumber; }
    /// m = k^2 / (2 omega_r) with hbar = 1.
    [[nodiscard]] double mass() const { return wavenumber * wavenumber / (2.0 * recoil); }
    /// Doppler temperature scale hbar*gamma.
    [[nodiscard]] double doppler_temperature() const { return gamma; }
    /// Momentum for which p^2/m equals the Doppler temperature, sqrt(m hbar gamma).
    [[nodiscard]] double doppler_momentum() const { return std::sqrt(mass() * gamma); }

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const
    {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("invalid parameters: ") + what);
        };
        require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
        require(std::isfinite(nu) && nu >= 0.0, "nu must be >= 0");
        require(std::isfinite(g) && g >= 0.0, "g must be >= 0");
        require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
        require(std::isfinite(delta), "delta must be finite");
        require(std::isfinite(wavenumber) && wavenumber > 0.0, "wavenumber must be > 0");
        require(std::isfinite(recoil) && recoil > 0.0, "recoil must be > 0");
        require(std::isfinite(recoil_geometry) && recoil_geometry >= 0.0,
                "recoil_geometry must be >= 0");
        require(total_damping() > 0.0, "kappa + gamma + nu must be > 0");
    }
};

/// G(x) = g cos(kx).
[[nodiscard]] inline double coupling(const SystemParams& p, double x)
{
    return p.g * std::cos(p.wavenumber * x);
}

/// dG/dx = -g k sin(kx).
[[nodiscard]] inline double grad_coupling(const SystemParams& p, double x)
{
    return -p.g * p.wavenumber * std::sin(p.wavenumber * x);
}

[[nodiscard]] inline double from_wavelengths(const SystemParams& p, double x_in_lambda)
{
    return x_in_lambda * p.wavelength();
}

[[nodiscard]] inline double to_wavelengths(const SystemParams& p, double x)
{
    return x / p.wavelength();
}

/// Period of every position-resolved steady quantity (lambda/2).
[[nodiscard]] inline double half_period(const SystemParams& p) { return 0.5 * p.wavelength(); }

/// Continuity (energy balance) residual nu(1-P) - gamma P - kappa N.
[[nodiscard]] inline double continuity_residual(double population, double photons,
                                                const SystemParams& p)
{
    return p.nu * (1.0 - population) - p.gamma * population - p.kappa * photons;
}

} // namespace cqlaser
