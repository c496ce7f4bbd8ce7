#pragma once

// Run configuration: one JSON document plus command-line overrides.
// Unknown keys are rejected with their full path. Positions are given in
// wavelengths and rates in units of kappa.

#include "../core.hpp"
#include "../sweep.hpp"
#include "../trajectory.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqlaser::cli {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct XGrid {
    double min = 0.0; // wavelengths
    double max = 0.5;
    int points = 65;
};

struct TrajectorySpec {
    TrajectoryMode mode = TrajectoryMode::FullLamb;
    double x0 = 0.0;                   // wavelengths
    double p0 = 0.0;                   // hbar k units
    double kinetic_over_depth = -1.0;  // >= 0: p0 = sqrt(2 m f V), overrides p0
    double dt = 1e-3;
    double t_end = 10.0;
    std::size_t n_traj = 1;
    std::size_t stride = 100;
    double window = 0.1;
    unsigned noise_substeps = 1;
    std::size_t table_points = 1024;
    double alpha0 = 0.1;               // lamb mode: initial field amplitude seeding lasing
    bool compare_analytic = true;      // stochastic mode: add the Einstein-relation kT to the stats
};

struct ConvergenceSpec {
    double y = 1.0;
    double a = -1.0; // <= 0: the optimal a for this y
    std::vector<double> kappa_over_nu{1e-1, 1e-2, 1e-3};
    double x_ref = 1.0 / 16.0; // wavelengths
};

struct GoodCavitySpec {
    std::vector<double> ys{0.5, 1.0, 2.0};
    std::vector<double> as{};
    ConvergenceSpec convergence;
    bool run_convergence = true;
};

struct RunConfig {
    std::string command;
    SystemParams params;
    XGrid grid;
    std::vector<double> deltas; // steady: detunings; empty means params.delta
    sweep::TemperatureSweep sweep;
    TrajectorySpec trajectory;
    GoodCavitySpec goodcavity;
    std::uint64_t seed = 1;
    unsigned threads = 0; // 0: hardware concurrency
    json effective;       // the merged document, as echoed into output metadata
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known)
{
    if (!obj.is_object()) throw ConfigError("config: '" + path + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.contains(it.key()))
            throw ConfigError("config: unknown key '" + (path.empty() ? "" : path + ".") + it.key() + "'");
}

template <class T>
void read(const json& obj, const std::string& path, const char* key, T& out)
{
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: key '" + path + "." + key + "': " + e.what());
    }
}

/// A list of numbers, or {"min", "max", "points"} for an evenly spaced range.
inline std::vector<double> read_values(const json& v, const std::string& path)
{
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError("config: '" + path + "' must contain numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    if (v.is_object()) {
        reject_unknown(v, path, {"min", "max", "points"});
        double lo = 0.0, hi = 0.0;
        int n = 0;
        read(v, path, "min", lo);
        read(v, path, "max", hi);
        read(v, path, "points", n);
        if (n < 1) throw ConfigError("config: '" + path + ".points' must be >= 1");
        std::vector<double> out(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        return out;
    }
    throw ConfigError("config: '" + path + "' must be a number, list or {min,max,points}");
}

inline std::size_t line_of(const std::string& text, std::size_t byte)
{
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

} // namespace detail

inline json parse_document(const std::string& text, const std::string& source)
{
    try {
        auto doc = json::parse(text);
        if (!doc.is_object()) throw ConfigError(source + ": top level must be a JSON object");
        return doc;
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ":" + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
    }
}

/// Reads a config file, or stdin for "-". An empty path gives an empty document.
inline json load_document(const std::string& path)
{
    if (path.empty()) return json::object();
    std::string text;
    if (path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), {});
    } else {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        text.assign(std::istreambuf_iterator<char>(in), {});
    }
    return parse_document(text, path == "-" ? "<stdin>" : path);
}

/// Applies "a.b.c=value" where value is JSON (bare words are taken as strings).
inline void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must be key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override key '" + key + "' is malformed");
        if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

/// Strict parse of the merged document into a RunConfig.
inline RunConfig parse_config(const json& doc, const std::string& command)
{
    using detail::read;
    detail::reject_unknown(doc, "", {"command", "params", "grid", "sweep", "trajectory", "goodcavity", "seed", "threads"});
    RunConfig cfg;
    cfg.command = command;
    if (doc.contains("command")) {
        const auto c = doc.at("command").get<std::string>();
        if (!command.empty() && c != command)
            throw ConfigError("config: command '" + c + "' does not match subcommand '" + command + "'");
        cfg.command = c;
    }

    if (doc.contains("params")) {
        const auto& p = doc.at("params");
        detail::reject_unknown(p, "params", {"gamma", "nu", "g", "kappa", "delta", "wavenumber", "recoil", "recoil_geometry"});
        read(p, "params", "gamma", cfg.params.gamma);
        read(p, "params", "nu", cfg.params.nu);
        read(p, "params", "g", cfg.params.g);
        read(p, "params", "kappa", cfg.params.kappa);
        read(p, "params", "delta", cfg.params.delta);
        read(p, "params", "wavenumber", cfg.params.wavenumber);
        read(p, "params", "recoil", cfg.params.recoil);
        read(p, "params", "recoil_geometry", cfg.params.recoil_geometry);
    }
    try {
        cfg.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: params: ") + e.what());
    }

    if (doc.contains("grid")) {
        const auto& g = doc.at("grid");
        detail::reject_unknown(g, "grid", {"x_min", "x_max", "x_points", "delta"});
        read(g, "grid", "x_min", cfg.grid.min);
        read(g, "grid", "x_max", cfg.grid.max);
        read(g, "grid", "x_points", cfg.grid.points);
        if (g.contains("delta")) cfg.deltas = detail::read_values(g.at("delta"), "grid.delta");
    }
    if (cfg.grid.points < 1) throw ConfigError("config: grid.x_points must be >= 1");

    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        detail::reject_unknown(s, "sweep", {"variable", "values", "target_N", "avg_points"});
        std::string var = "delta";
        read(s, "sweep", "variable", var);
        try {
            cfg.sweep.variable = sweep::parse_variable(var);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: sweep.variable: ") + e.what());
        }
        if (s.contains("values")) cfg.sweep.values = detail::read_values(s.at("values"), "sweep.values");
        read(s, "sweep", "target_N", cfg.sweep.target_N);
        read(s, "sweep", "avg_points", cfg.sweep.avg_points);
        if (cfg.sweep.avg_points < 3) throw ConfigError("config: sweep.avg_points must be >= 3");
    }

    if (doc.contains("trajectory")) {
        const auto& t = doc.at("trajectory");
        detail::reject_unknown(t, "trajectory",
                               {"mode", "x0", "p0", "kinetic_over_depth", "dt", "t_end", "n_traj", "stride",
                                "window", "noise_substeps", "table_points", "alpha0", "compare_analytic"});
        auto& tr = cfg.trajectory;
        std::string mode = "lamb";
        read(t, "trajectory", "mode", mode);
        if (mode == "lamb") tr.mode = TrajectoryMode::FullLamb;
        else if (mode == "stochastic") tr.mode = TrajectoryMode::AdiabaticStochastic;
        else throw ConfigError("config: trajectory.mode must be 'lamb' or 'stochastic'");
        read(t, "trajectory", "x0", tr.x0);
        read(t, "trajectory", "p0", tr.p0);
        read(t, "trajectory", "kinetic_over_depth", tr.kinetic_over_depth);
        read(t, "trajectory", "dt", tr.dt);
        read(t, "trajectory", "t_end", tr.t_end);
        read(t, "trajectory", "n_traj", tr.n_traj);
        read(t, "trajectory", "stride", tr.stride);
        read(t, "trajectory", "window", tr.window);
        read(t, "trajectory", "noise_substeps", tr.noise_substeps);
        read(t, "trajectory", "table_points", tr.table_points);
        read(t, "trajectory", "alpha0", tr.alpha0);
        read(t, "trajectory", "compare_analytic", tr.compare_analytic);
        if (!(tr.dt > 0.0) || !(tr.t_end > 0.0)) throw ConfigError("config: trajectory.dt and t_end must be > 0");
        if (tr.n_traj < 1) throw ConfigError("config: trajectory.n_traj must be >= 1");
        if (!(tr.window > 0.0 && tr.window <= 1.0)) throw ConfigError("config: trajectory.window must be in (0, 1]");
        if (tr.table_points < 4) throw ConfigError("config: trajectory.table_points must be >= 4");
    }

    if (doc.contains("goodcavity")) {
        const auto& g = doc.at("goodcavity");
        detail::reject_unknown(g, "goodcavity", {"y", "a", "convergence"});
        auto& gc = cfg.goodcavity;
        if (g.contains("y")) gc.ys = detail::read_values(g.at("y"), "goodcavity.y");
        if (g.contains("a")) gc.as = detail::read_values(g.at("a"), "goodcavity.a");
        if (g.contains("convergence")) {
            const auto& c = g.at("convergence");
            if (c.is_boolean()) {
                gc.run_convergence = c.get<bool>();
            } else {
                detail::reject_unknown(c, "goodcavity.convergence", {"y", "a", "kappa_over_nu", "x_ref"});
                read(c, "goodcavity.convergence", "y", gc.convergence.y);
                read(c, "goodcavity.convergence", "a", gc.convergence.a);
                if (c.contains("kappa_over_nu"))
                    gc.convergence.kappa_over_nu =
                        detail::read_values(c.at("kappa_over_nu"), "goodcavity.convergence.kappa_over_nu");
                read(c, "goodcavity.convergence", "x_ref", gc.convergence.x_ref);
            }
        }
        for (double y : gc.ys)
            if (!(y > 0.0)) throw ConfigError("config: goodcavity.y values must be > 0");
        for (double a : gc.as)
            if (!(a > 0.0)) throw ConfigError("config: goodcavity.a values must be > 0");
    }

    read(doc, "", "seed", cfg.seed);
    read(doc, "", "threads", cfg.threads);

    cfg.effective = doc;
    cfg.effective.erase("threads"); // never affects results
    cfg.effective["command"] = cfg.command;
    return cfg;
}

} // namespace cqlaser::cli
