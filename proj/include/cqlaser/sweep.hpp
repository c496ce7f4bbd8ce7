#pragma once

// Parameter sweeps of the equilibrium temperature, including the constant
// antinode photon-number protocol (pump rate re-solved at every sweep point).

#include "core.hpp"
#include "moments.hpp"
#include "motion.hpp"
#include "parallel.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqlaser::sweep {

[[nodiscard]] inline double antinode_photon_number(const SystemParams& p)
{
    return moments::solve_self_consistent(p, 0.0).N;
}

class UnreachableTarget : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pump rate nu giving antinode photon number `target_N`, on the rising branch
/// of N(nu). N is not monotone in nu (strong pumping dephases the atom), so the
/// bracket is found by a geometric upward scan before the toms748 solve.
[[nodiscard]] inline double solve_pump_for_photon_number(SystemParams p, double target_N,
                                                         double nu_start = 1e-6,
                                                         double growth = 1.25)
{
    if (!(target_N > 0.0)) throw std::invalid_argument("target_N must be > 0");
    auto residual = [&](double nu) {
        p.nu = nu;
        return antinode_photon_number(p) - target_N;
    };
    double lo = nu_start;
    double f_lo = residual(lo);
    if (f_lo >= 0.0) throw UnreachableTarget("target_N below the photon number at the smallest pump rate");
    double hi = lo;
    double f_hi = f_lo;
    for (int it = 0; it < 400; ++it) {
        hi = lo * growth;
        f_hi = residual(hi);
        if (f_hi >= 0.0) break;
        if (f_hi < f_lo && lo > 1.0) {
            std::ostringstream msg;
            msg << "target N = " << target_N << " unreachable: antinode N peaks near "
                << f_lo + target_N << " at nu ~ " << lo;
            throw UnreachableTarget(msg.str());
        }
        lo = hi;
        f_lo = f_hi;
    }
    if (f_hi < 0.0) throw UnreachableTarget("no pump rate bracket found for target N");
    if (f_hi == 0.0) return hi;

    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
    const double nu = 0.5 * (a + b);
    const double r = residual(nu);
    if (!(std::abs(r) < 1e-8)) {
        std::ostringstream msg;
        msg << "pump solve residual " << r << " exceeds 1e-8";
        throw std::runtime_error(msg.str());
    }
    return nu;
}

enum class Variable { Delta, G, Nu };

[[nodiscard]] inline std::string to_string(Variable v)
{
    switch (v) {
    case Variable::Delta: return "delta";
    case Variable::G: return "g";
    case Variable::Nu: return "nu";
    }
    return "?";
}

[[nodiscard]] inline Variable parse_variable(const std::string& s)
{
    if (s == "delta") return Variable::Delta;
    if (s == "g") return Variable::G;
    if (s == "nu") return Variable::Nu;
    throw std::invalid_argument("sweep variable must be one of delta, g, nu (got '" + s + "')");
}

struct TemperatureRow {
    double value = 0.0;
    SystemParams params;
    double N_antinode = 0.0;
    motion::EquilibriumSummary eq;
};

struct TemperatureSweep {
    Variable variable = Variable::Delta;
    std::vector<double> values;
    double target_N = 0.0; // > 0: re-solve nu at each point
    int avg_points = 513;
};

[[nodiscard]] inline TemperatureRow temperature_point(SystemParams p, Variable var, double value,
                                                      double target_N, int avg_points)
{
    switch (var) {
    case Variable::Delta: p.delta = value; break;
    case Variable::G: p.g = value; break;
    case Variable::Nu: p.nu = value; break;
    }
    if (target_N > 0.0) {
        if (var == Variable::Nu) throw std::invalid_argument("target_N cannot be combined with a nu sweep");
        p.nu = solve_pump_for_photon_number(p, target_N);
    }
    p.validate();
    TemperatureRow row;
    row.value = value;
    row.params = p;
    row.N_antinode = antinode_photon_number(p);
    row.eq = motion::equilibrium_summary(p, avg_points);
    return row;
}

[[nodiscard]] inline std::vector<TemperatureRow> temperature_sweep(const SystemParams& base,
                                                                   const TemperatureSweep& sw,
                                                                   unsigned threads = 1)
{
    return parallel_map(sw.values.size(), threads, [&](std::size_t i) {
        return temperature_point(base, sw.variable, sw.values[i], sw.target_N, sw.avg_points);
    });
}

} // namespace cqlaser::sweep
