#pragma once

#include "../csv.hpp"
#include "../goodcavity.hpp"
#include "../lamb.hpp"
#include "../moments.hpp"
#include "../motion.hpp"
#include "../parallel.hpp"
#include "../selftest.hpp"
#include "../stochsim.hpp"
#include "../sweep.hpp"
#include "config.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cqlaser::cli {

/// Fully resolved configuration (defaults filled in) for the output metadata.
[[nodiscard]] inline json resolved(const RunConfig& c)
{
    json j;
    j["command"] = c.command;
    const auto& p = c.params;
    j["params"] = {{"gamma", p.gamma}, {"nu", p.nu},         {"g", p.g},
                   {"kappa", p.kappa}, {"delta", p.delta}, {"wavenumber", p.wavenumber},
                   {"recoil", p.recoil}, {"recoil_geometry", p.recoil_geometry}};
    if (c.command == "steady") {
        j["grid"] = {{"x_min", c.grid.min}, {"x_max", c.grid.max}, {"x_points", c.grid.points},
                     {"delta", c.deltas.empty() ? std::vector<double>{p.delta} : c.deltas}};
    } else if (c.command == "temperature") {
        j["sweep"] = {{"variable", sweep::to_string(c.sweep.variable)}, {"values", c.sweep.values},
                      {"target_N", c.sweep.target_N}, {"avg_points", c.sweep.avg_points}};
    } else if (c.command == "trajectory") {
        const auto& t = c.trajectory;
        j["trajectory"] = {{"mode", std::string(to_string(t.mode))},
                           {"x0", t.x0},
                           {"p0", t.p0},
                           {"kinetic_over_depth", t.kinetic_over_depth},
                           {"dt", t.dt},
                           {"t_end", t.t_end},
                           {"n_traj", t.n_traj},
                           {"stride", t.stride},
                           {"window", t.window},
                           {"noise_substeps", t.noise_substeps},
                           {"table_points", t.table_points},
                           {"alpha0", t.alpha0},
                           {"compare_analytic", t.compare_analytic}};
        j["seed"] = c.seed;
    } else if (c.command == "goodcavity") {
        const auto& g = c.goodcavity;
        j["goodcavity"] = {{"y", g.ys},
                           {"a", g.as},
                           {"convergence",
                            g.run_convergence ? json{{"y", g.convergence.y},
                                                     {"a", g.convergence.a},
                                                     {"kappa_over_nu", g.convergence.kappa_over_nu},
                                                     {"x_ref", g.convergence.x_ref}}
                                              : json(false)}};
    }
    return j;
}

[[nodiscard]] inline std::vector<std::string> metadata(const RunConfig& c)
{
    return {std::string(csv::version) + " " + c.command, "config " + resolved(c).dump()};
}

[[nodiscard]] inline unsigned worker_count(const RunConfig& c)
{
    return c.threads == 0 ? default_threads() : c.threads;
}

/// Position-resolved steady state: Lamb model and moment model side by side.
inline int cmd_steady(const RunConfig& cfg, std::ostream& out)
{
    const auto deltas = cfg.deltas.empty() ? std::vector<double>{cfg.params.delta} : cfg.deltas;
    const int nx = cfg.grid.points;
    if (deltas.empty() || nx < 1) throw ConfigError("steady: empty grid");
    struct Row {
        std::vector<csv::Cell> cells;
    };
    const std::size_t n = deltas.size() * static_cast<std::size_t>(nx);
    auto rows = parallel_map(n, worker_count(cfg), [&](std::size_t i) {
        SystemParams p = cfg.params;
        p.delta = deltas[i / static_cast<std::size_t>(nx)];
        const auto ix = static_cast<int>(i % static_cast<std::size_t>(nx));
        const double xl = nx == 1 ? cfg.grid.min : cfg.grid.min + (cfg.grid.max - cfg.grid.min) * ix / (nx - 1);
        const double x = from_wavelengths(p, xl);
        const auto l = lamb::lamb_steady_state(p, x);
        const auto m = moments::solve_self_consistent(p, x);
        const auto mc = motion::motion_coefficients(p, x);
        return Row{{xl, p.delta, coupling(p, x), l.N, l.z, lamb::force_lamb(p, x), m.N, m.P, m.Z, m.W, mc.F, mc.U,
                    mc.beta, mc.Dfield, mc.Drec}};
    });
    csv::Writer w(out,
                  {"x_over_lambda", "delta", "G", "N_lamb", "z_lamb", "F_lamb", "N", "P", "Z", "W", "F", "U", "beta",
                   "Dfield", "Drec"},
                  metadata(cfg));
    for (const auto& r : rows) w.row(r.cells);
    return 0;
}

/// Einstein-relation temperature along a sweep of delta, g or nu.
inline int cmd_temperature(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.sweep.values.empty()) throw ConfigError("temperature: sweep.values is empty");
    // per-point failures (e.g. an unreachable target N) become flagged rows
    struct Result {
        std::optional<sweep::TemperatureRow> row;
        std::string error;
    };
    auto results = parallel_map(cfg.sweep.values.size(), worker_count(cfg), [&](std::size_t i) {
        try {
            return Result{sweep::temperature_point(cfg.params, cfg.sweep.variable, cfg.sweep.values[i],
                                                   cfg.sweep.target_N, cfg.sweep.avg_points),
                          {}};
        } catch (const std::exception& e) {
            return Result{std::nullopt, e.what()};
        }
    });
    csv::Writer w(out,
                  {"sweep_" + sweep::to_string(cfg.sweep.variable), "gamma", "nu", "g", "delta", "N_antinode",
                   "beta_avg", "Dfield_avg", "Drec_avg", "D_avg", "V", "kT_kappa", "kT_gamma", "E", "E_over_V", "regime"},
                  metadata(cfg));
    int status = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (!r.row) {
            std::cerr << "temperature: point " << cfg.sweep.values[i] << ": " << r.error << '\n';
            w.row({cfg.sweep.values[i], cfg.params.gamma, nan, cfg.params.g, cfg.params.delta, nan, nan, nan, nan,
                   nan, nan, nan, nan, nan, nan, "error"});
            status = 1;
            continue;
        }
        const auto& row = *r.row;
        const auto& e = row.eq;
        const double kT_gamma = row.params.gamma > 0.0 ? e.kT / row.params.gamma : nan;
        w.row({row.value, row.params.gamma, row.params.nu, row.params.g, row.params.delta, row.N_antinode,
               e.beta_avg, e.Dfield_avg, e.Drec_avg, e.D_avg, e.V, e.kT, kT_gamma, e.E, e.ratio,
               e.cooling ? "cooling" : "heating"});
    }
    return status;
}

struct TrajectoryRun {
    std::vector<Trajectory> trajectories;
    stochsim::EnsembleStats stats;
    json summary;
};

[[nodiscard]] inline TrajectoryRun run_trajectories(const RunConfig& cfg)
{
    const auto& t = cfg.trajectory;
    const SystemParams& p = cfg.params;
    TrajectoryRun run;
    json& s = run.summary;
    const double x0 = from_wavelengths(p, t.x0);
    double p0 = t.p0;

    if (t.mode == TrajectoryMode::FullLamb) {
        const double depth = motion::potential_depth(p, motion::ForceModel::Lamb);
        if (t.kinetic_over_depth >= 0.0) p0 = std::sqrt(2.0 * p.mass() * t.kinetic_over_depth * depth);
        if (t.n_traj != 1) throw ConfigError("trajectory: lamb mode is deterministic, n_traj must be 1");
        stochsim::LambModeOptions lo;
        lo.internal = {{t.alpha0, 0.0}, {0.0, 0.0}, lamb::below_threshold_state(p).z};
        stochsim::SimulationOptions so;
        so.stride = t.stride;
        run.trajectories.push_back(stochsim::simulate(p, {x0, p0}, cfg.seed, t.dt, t.t_end, t.mode, so, nullptr, lo));
        s["potential_depth_lamb"] = depth;

        // trapping signature: late-window confinement and early/late photon number
        const auto& smp = run.trajectories.front().samples;
        const std::size_t n = smp.size();
        const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(t.window * static_cast<double>(n)));
        double n_early = 0.0, n_late = 0.0, xmin = smp[n - k].x, xmax = xmin;
        for (std::size_t i = 0; i < k; ++i) n_early += smp[i].N;
        for (std::size_t i = n - k; i < n; ++i) {
            n_late += smp[i].N;
            xmin = std::min(xmin, smp[i].x);
            xmax = std::max(xmax, smp[i].x);
        }
        s["N_early"] = n_early / static_cast<double>(k);
        s["N_late"] = n_late / static_cast<double>(k);
        s["late_x_min_over_lambda"] = to_wavelengths(p, xmin);
        s["late_x_max_over_lambda"] = to_wavelengths(p, xmax);
        s["late_confined_to_one_well"] = (xmax - xmin) < half_period(p);
    } else {
        const auto table = stochsim::ForceTable::from_params(p, t.table_points, worker_count(cfg));
        if (t.kinetic_over_depth >= 0.0)
            p0 = std::sqrt(2.0 * p.mass() * t.kinetic_over_depth * motion::potential_depth(p));
        stochsim::SimulationOptions so;
        so.stride = t.stride;
        so.noise_substeps = t.noise_substeps;
        run.trajectories = stochsim::simulate_ensemble(p, table, {x0, p0}, cfg.seed, t.dt, t.t_end, t.n_traj, so,
                                                       worker_count(cfg));
        if (t.compare_analytic) {
            const auto eq = motion::equilibrium_summary(p);
            s["kT_einstein"] = eq.cooling ? json(eq.kT) : json(nullptr);
            s["beta_avg"] = eq.beta_avg;
            s["D_avg"] = eq.D_avg;
            s["V"] = eq.V;
        }
    }
    run.stats = stochsim::ensemble_stats(run.trajectories, t.window, p);
    s["mode"] = std::string(to_string(t.mode));
    s["seed"] = cfg.seed;
    s["dt"] = t.dt;
    s["n_traj"] = run.stats.n_traj;
    s["window"] = run.stats.window;
    s["kT_emp"] = run.stats.kT_emp;
    s["kT_emp_se"] = run.stats.kT_se;
    s["loc"] = run.stats.loc;
    s["loc_se"] = run.stats.loc_se;
    s["p0"] = p0;
    s["heating_warning"] = std::any_of(run.trajectories.begin(), run.trajectories.end(),
                                       [](const Trajectory& tr) { return tr.heating_warning; });
    return run;
}

inline int cmd_trajectory(const RunConfig& cfg, std::ostream& out, std::ostream& stats_out)
{
    const auto run = run_trajectories(cfg);
    const SystemParams& p = cfg.params;
    const double pD = p.gamma > 0.0 ? p.doppler_momentum() : std::numeric_limits<double>::quiet_NaN();
    csv::Writer w(out, {"traj", "t", "x_over_lambda", "p", "p_over_pD", "N", "z"}, metadata(cfg));
    for (std::size_t i = 0; i < run.trajectories.size(); ++i)
        for (const auto& s : run.trajectories[i].samples)
            w.row({i, s.t, to_wavelengths(p, s.x), s.p, s.p / pD, s.N, s.z});
    json stats = run.summary;
    stats["version"] = std::string(csv::version);
    stats_out << stats.dump(2) << '\n';
    if (run.summary.value("heating_warning", false))
        std::cerr << "trajectory: warning: position-averaged friction does not damp (heating regime)\n";
    return 0;
}

/// Closed-form curves, minima and the full-pipeline convergence check, as one long-format table.
inline int cmd_goodcavity(const RunConfig& cfg, std::ostream& out)
{
    const auto& g = cfg.goodcavity;
    std::vector<double> as = g.as;
    if (as.empty())
        for (int i = 1; i <= 60; ++i) as.push_back(0.05 * i);
    csv::Writer w(out, {"section", "y", "a", "kT_kappa", "kappa_over_nu", "kT_full", "rel_error"}, metadata(cfg));
    const csv::Cell none;
    for (double y : g.ys)
        for (double a : as) w.row({"curve", y, a, goodcavity::gc_temperature({a, y}), none, none, none});
    for (double y : g.ys) {
        const auto m = goodcavity::gc_min_temperature(y);
        w.row({"minimum", y, m.a, m.kT, none, none, none});
    }
    if (g.run_convergence) {
        const auto& c = g.convergence;
        const goodcavity::OperatingPoint op{c.a > 0.0 ? c.a : goodcavity::gc_min_temperature(c.y).a, c.y};
        SystemParams base = cfg.params;
        base.gamma = 0.0;
        const auto pts = goodcavity::gc_convergence_check(base, op, c.kappa_over_nu, from_wavelengths(base, c.x_ref));
        for (const auto& pt : pts)
            w.row({"convergence", op.y, op.a, pt.kT_limit, pt.kappa_over_nu, pt.kT_full, pt.rel_error});
    }
    return 0;
}

inline int cmd_selftest(std::ostream& out)
{
    int failed = 0;
    for (const auto& c : selftest::run_all()) {
        out << selftest::describe(c) << '\n';
        if (!c.passed) ++failed;
    }
    out << (failed == 0 ? "selftest: all checks passed" : "selftest: " + std::to_string(failed) + " check(s) failed")
        << '\n';
    return failed == 0 ? 0 : 1;
}

} // namespace cqlaser::cli
