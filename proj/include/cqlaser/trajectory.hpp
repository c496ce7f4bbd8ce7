#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cqlaser {

enum class TrajectoryMode { FullLamb, AdiabaticStochastic };

[[nodiscard]] constexpr std::string_view to_string(TrajectoryMode mode)
{
    return mode == TrajectoryMode::FullLamb ? "lamb" : "stochastic";
}

struct TrajectorySample {
    double t = 0.0;
    double x = 0.0;
    double p = 0.0;
    double N = 0.0; // photon number at x (dynamical in lamb mode, adiabatic otherwise)
    double z = 0.0; // inversion (dynamical in lamb mode, adiabatic Z(x) otherwise)
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::uint64_t seed = 0;
    double dt = 0.0;
    TrajectoryMode mode = TrajectoryMode::FullLamb;
    // Set when the position-averaged friction does not damp (stochastic mode).
    bool heating_warning = false;
};

} // namespace cqlaser
