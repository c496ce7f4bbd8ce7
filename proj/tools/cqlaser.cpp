#include "cqlaser/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Common {
    std::string config;
    std::string out;
    std::string stats;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--config", c.config, "JSON config file ('-' for stdin)");
    sub->add_option("--out", c.out, "output CSV path (default: stdout)");
    sub->add_option("--seed", c.seed, "RNG seed (overrides config)");
    sub->add_option("--threads", c.threads, "worker threads (default: all processors)");
    sub->add_option("--set", c.overrides, "config override key.path=value (repeatable)");
}

std::string stats_path(const Common& c)
{
    if (!c.stats.empty()) return c.stats;
    if (c.out.empty()) return {};
    std::filesystem::path p(c.out);
    p.replace_extension(".stats.json");
    return p.string();
}

int run(const std::string& command, const Common& c)
{
    using namespace cqlaser::cli;
    json doc = load_document(c.config);
    for (const auto& o : c.overrides) apply_override(doc, o);
    if (c.seed) doc["seed"] = *c.seed;
    if (c.threads) doc["threads"] = *c.threads;
    const RunConfig cfg = parse_config(doc, command);

    if (command == "selftest") return cmd_selftest(std::cout);

    std::ofstream file;
    if (!c.out.empty()) {
        file.open(c.out, std::ios::binary);
        if (!file) throw ConfigError("cannot open output file '" + c.out + "'");
    }
    std::ostream& out = c.out.empty() ? std::cout : file;

    int status = 0;
    if (command == "steady") status = cmd_steady(cfg, out);
    else if (command == "temperature") status = cmd_temperature(cfg, out);
    else if (command == "goodcavity") status = cmd_goodcavity(cfg, out);
    else if (command == "trajectory") {
        const auto sp = stats_path(c);
        if (sp.empty()) {
            status = cmd_trajectory(cfg, out, std::cerr);
        } else {
            std::ofstream stats(sp, std::ios::binary);
            if (!stats) throw ConfigError("cannot open stats file '" + sp + "'");
            status = cmd_trajectory(cfg, out, stats);
        }
    }
    out.flush();
    if (!out) throw std::runtime_error("write to output failed");
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Single-atom laser: steady states, forces, temperatures and trajectories"};
    app.require_subcommand(1);

    Common common;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"steady", "position-resolved steady state, force, potential, friction and diffusion"},
        {"temperature", "Einstein-relation temperature along a delta, g or nu sweep"},
        {"trajectory", "coupled deterministic or stochastic atomic trajectories"},
        {"goodcavity", "good-cavity temperature curves, minima and convergence check"},
        {"selftest", "run the built-in consistency suite"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, common);
        if (name == "trajectory") sub->add_option("--stats", common.stats, "stats JSON path (default: <out>.stats.json)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, common);
    } catch (const cqlaser::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
