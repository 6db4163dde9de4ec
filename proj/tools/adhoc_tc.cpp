// adhoc-tc: bounds and Monte Carlo sweeps for Poisson-field ad hoc networks.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "adhoc_tc/config.hpp"
#include "adhoc_tc/sweep.hpp"

namespace {

using namespace adhoc_tc;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::string out_dir = ".";
    bool no_sim = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "configuration file (key = value, [sections])");
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--trials", c.trials, "Monte Carlo trials per point");
    sub->add_option("--out-dir", c.out_dir, "output directory");
    sub->add_flag("--no-sim", c.no_sim, "analytic bounds only");
}

cli::RunConfig load(const Common& c) {
    auto cfg = c.config.empty() ? cli::load_config_text("") : cli::load_config_file(c.config);
    if (c.seed) {
        cfg.sim.master_seed = *c.seed;
        cfg.resolved["sim.seed"] = std::to_string(*c.seed);
    }
    if (c.trials) {
        cfg.sim.trials = *c.trials;
        cfg.resolved["sim.trials"] = std::to_string(*c.trials);
    }
    if (c.no_sim) {
        cfg.sweep.sim = false;
        cfg.resolved["sweep.sim"] = "false";
    }
    try {
        cfg.sim.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

void print_table(const cli::Table& t) { std::cout << cli::to_csv(t); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Outage, throughput and transmission-capacity bounds with Monte Carlo checks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::kToolVersion);

    Common sweep_o, verify_o, cap_o, opt_o;
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write CSV, SVG and manifest.json");
    add_common(sweep, sweep_o);
    auto* verify = app.add_subcommand("verify", "run identity, ordering and simulation checks");
    add_common(verify, verify_o);
    auto* capacity = app.add_subcommand("capacity", "transmission-capacity bounds at one outage target");
    add_common(capacity, cap_o);
    std::optional<double> eps;
    capacity->add_option("--eps", eps, "outage constraint in (0,1)");
    auto* optimal = app.add_subcommand("optimal", "optimal random-access intensity and optimal threshold");
    add_common(optimal, opt_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*sweep) {
            const auto cfg = load(sweep_o);
            const auto m = cli::run_sweep(cfg, sweep_o.out_dir);
            std::cout << "wrote " << m.json["outputs"]["csv"].get<std::string>() << ", "
                      << m.json["outputs"]["plot"].get<std::string>() << " (" << m.table.rows.size() << " rows)\n";
            return 0;
        }
        if (*verify) {
            const auto cfg = load(verify_o);
            const auto rep = cli::verify(cfg, cfg.sweep.sim);
            for (const auto& c : rep.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
            std::cout << (rep.pass() ? "all checks passed\n" : "verification failed\n");
            return rep.pass() ? 0 : 1;
        }
        if (*capacity) {
            auto cfg = load(cap_o);
            const double e = eps.value_or(cfg.sweep.eps);
            if (!(e > 0.0 && e < 1.0)) throw ConfigError("--eps must lie in (0,1)");
            print_table(cli::capacity_report(cfg, e, cfg.sweep.sim));
            return 0;
        }
        if (*optimal) {
            std::cout << cli::optimal_report(load(opt_o));
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
