#pragma once

// Sweeps over transmit probability, outage target or path-loss exponent, the
// one-shot verification suite, and the small capacity / optimum reports.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adhoc_tc/bounds.hpp"
#include "adhoc_tc/channel.hpp"
#include "adhoc_tc/config.hpp"
#include "adhoc_tc/report.hpp"
#include "adhoc_tc/sim.hpp"

namespace adhoc_tc::cli {

inline constexpr const char* kToolName = "adhoc-tc";
inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    nlohmann::json json;
    Table table;
};

namespace detail {

inline const char* policy_color(PolicyFamily f) {
    if (f.scheduling == Scheduling::RandomAccess) return f.power == Power::Unit ? "#1f77b4" : "#2ca02c";
    return f.power == Power::Unit ? "#d62728" : "#9467bd";
}

inline PolicySpec policy_for_p(const ChannelSpec& ch, PolicyFamily f, double p) {
    if (f.scheduling == Scheduling::RandomAccess) return PolicySpec::random_access(p, f.power);
    return PolicySpec::threshold(p >= 1.0 ? 0.0 : threshold_for_probability(ch, p), f.power);
}

inline void add_note(std::string& note, const std::string& what) {
    if (!note.empty()) note += "; ";
    for (char c : what) note += (c == ',' || c == '\n') ? ' ' : c;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream o;
    o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return o.str();
}

inline std::vector<double> column_values(const Table& t, const std::string& name) {
    std::vector<double> out;
    const auto c = t.column(name);
    for (const auto& row : t.rows) out.push_back(row[c] ? *row[c] : std::numeric_limits<double>::quiet_NaN());
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sweep tables

inline Table sweep_over_p(const RunConfig& cfg) {
    const auto& sw = cfg.sweep;
    Table t;
    t.columns = {"p", "t"};
    for (auto f : sw.policies)
        for (const char* q : {"q_lower", "q_upper", "q_sim", "q_sim_ci", "tau_l", "tau_u"})
            t.columns.push_back(policy_name(f) + "_" + q);
    for (double p : sw.grid) {
        std::vector<Cell> row{p, std::nullopt};
        std::string note;
        try {
            row[1] = p >= 1.0 ? 0.0 : threshold_for_probability(cfg.channel, p);
        } catch (const std::exception& e) {
            detail::add_note(note, std::string("t(p): ") + e.what());
        }
        for (auto f : sw.policies) {
            std::vector<Cell> cells(6);
            try {
                const auto pol = detail::policy_for_p(cfg.channel, f, p);
                const auto b = bounds::outage_bounds(cfg.channel, pol, cfg.network.lambda);
                cells[0] = b.q_lower;
                cells[1] = b.q_upper;
                cells[4] = b.tau_lower;
                cells[5] = b.tau_upper;
                if (sw.sim) {
                    const auto e = sim::estimate_outage(cfg.channel, cfg.network, pol, cfg.sim);
                    cells[2] = e.mean;
                    cells[3] = e.ci_half_width;
                }
            } catch (const std::exception& e) {
                detail::add_note(note, policy_name(f) + ": " + e.what());
            }
            row.insert(row.end(), cells.begin(), cells.end());
        }
        t.rows.push_back(std::move(row));
        t.notes.push_back(note);
    }
    return t;
}

inline Table sweep_over_eps(const RunConfig& cfg) {
    const auto& sw = cfg.sweep;
    Table t;
    t.columns = {"eps"};
    for (auto f : sw.policies)
        for (const char* q : {"c_l", "c_u", "c_sim", "c_sim_ci"}) t.columns.push_back(policy_name(f) + "_" + q);
    for (double eps : sw.grid) {
        std::vector<Cell> row{eps};
        std::string note;
        for (auto f : sw.policies) {
            std::vector<Cell> cells(4);
            const auto name = policy_name(f);
            try {
                const auto c = bounds::transmission_capacity_bounds(cfg.channel, f, cfg.network.lambda, eps);
                cells[0] = c.c_lower;
                cells[1] = c.c_upper;
            } catch (const std::exception& e) {
                detail::add_note(note, name + " bounds: " + e.what());
            }
            if (sw.sim) {
                try {
                    const auto c = sim::estimate_capacity(cfg.channel, cfg.network, f, cfg.sim, eps);
                    cells[2] = c.mean;
                    cells[3] = c.ci_half_width;
                } catch (const std::exception& e) {
                    detail::add_note(note, name + " sim: " + e.what());
                }
            }
            row.insert(row.end(), cells.begin(), cells.end());
        }
        t.rows.push_back(std::move(row));
        t.notes.push_back(note);
    }
    return t;
}

inline Table sweep_over_alpha(const RunConfig& cfg) {
    Table t;
    t.columns = {"alpha", "delta", "fading_tc_factor", "kappa", "theta", "h_delta", "asymptotic_ratio"};
    for (double a : cfg.sweep.grid) {
        std::string note;
        std::vector<Cell> row(t.columns.size());
        row[0] = a;
        try {
            const ChannelSpec ch(a, cfg.channel.beta(), cfg.channel.fading(), cfg.channel.distance());
            row[1] = ch.delta();
            row[2] = bounds::fading_tc_factor(ch.fading(), a);
            row[3] = bounds::kappa(ch);
            row[4] = bounds::theta(ch);
            row[5] = bounds::chebyshev_validity_limit(ch.delta());
            const auto co = bounds::asymptotic_ccdf_coeffs(ch, 1.0);
            row[6] = co.upper / co.lower;
        } catch (const std::exception& e) {
            detail::add_note(note, e.what());
        }
        t.rows.push_back(std::move(row));
        t.notes.push_back(note);
    }
    return t;
}

inline Table sweep_table(const RunConfig& cfg) {
    switch (cfg.sweep.x_axis) {
        case XAxis::P: return sweep_over_p(cfg);
        case XAxis::Eps: return sweep_over_eps(cfg);
        case XAxis::Alpha: return sweep_over_alpha(cfg);
    }
    return {};
}

inline std::vector<Panel> sweep_panels(const RunConfig& cfg, const Table& t) {
    std::vector<Panel> panels;
    const auto& sw = cfg.sweep;
    if (sw.x_axis == XAxis::Alpha) {
        Panel p{"Fading factor on transmission capacity", "alpha", "1 / (E[Psi^d] E[Psi^-d])", {}};
        p.series.push_back({"fading_tc_factor", "#1f77b4", false, false, detail::column_values(t, "alpha"),
                            detail::column_values(t, "fading_tc_factor"), {}});
        panels.push_back(p);
        Panel r{"Upper/lower asymptotic ratio", "alpha", "ratio", {}};
        r.series.push_back({"alpha/(alpha-1)", "#d62728", false, false, detail::column_values(t, "alpha"),
                            detail::column_values(t, "asymptotic_ratio"), {}});
        panels.push_back(r);
        return panels;
    }
    const std::string x = axis_name(sw.x_axis);
    const auto xs = detail::column_values(t, x);
    auto add = [&](Panel& pn, PolicyFamily f, const std::string& lo, const std::string& hi, const std::string& mc,
                   const std::string& ci) {
        const auto n = policy_name(f);
        const auto color = detail::policy_color(f);
        pn.series.push_back({n + " lower", color, false, false, xs, detail::column_values(t, n + "_" + lo), {}});
        pn.series.push_back({n + " upper", color, true, false, xs, detail::column_values(t, n + "_" + hi), {}});
        if (sw.sim)
            pn.series.push_back({n + " sim", color, false, true, xs, detail::column_values(t, n + "_" + mc),
                                 detail::column_values(t, n + "_" + ci)});
    };
    if (sw.x_axis == XAxis::P) {
        for (auto power : {Power::Unit, Power::ChannelInversion}) {
            Panel q{std::string("Outage probability, ") + (power == Power::Unit ? "no power control" : "channel inversion"),
                    "p", "q", {}};
            for (auto f : sw.policies)
                if (f.power == power) add(q, f, "q_lower", "q_upper", "q_sim", "q_sim_ci");
            if (!q.series.empty()) panels.push_back(q);
        }
        Panel tau{"Spatial throughput bounds", "p", "tau", {}};
        for (auto f : sw.policies) {
            const auto n = policy_name(f);
            tau.series.push_back({n + " lower", detail::policy_color(f), false, false, xs,
                                  detail::column_values(t, n + "_tau_l"), {}});
            tau.series.push_back({n + " upper", detail::policy_color(f), true, false, xs,
                                  detail::column_values(t, n + "_tau_u"), {}});
        }
        panels.push_back(tau);
    } else {
        Panel c{"Transmission capacity", "eps", "c", {}};
        for (auto f : sw.policies) add(c, f, "c_l", "c_u", "c_sim", "c_sim_ci");
        panels.push_back(c);
    }
    return panels;
}

/// Runs the sweep and writes CSV, SVG and manifest.json into out_dir.
inline RunManifest run_sweep(const RunConfig& cfg, const std::string& out_dir) {
    cfg.sweep.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RunManifest m;
    m.table = sweep_table(cfg);
    const auto csv_path = (fs::path(out_dir) / cfg.sweep.csv_path).string();
    const auto svg_path = (fs::path(out_dir) / cfg.sweep.plot_path).string();
    write_text(csv_path, to_csv(m.table));
    write_text(svg_path, render_svg(cfg.example + " sweep over " + axis_name(cfg.sweep.x_axis),
                                    sweep_panels(cfg, m.table)));

    auto& j = m.json;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["timestamp"] = detail::utc_timestamp();
    j["seed"] = cfg.sim.master_seed;
    j["parameters"] = cfg.resolved;
    j["outputs"] = {{"csv", csv_path}, {"plot", svg_path}};
    j["columns"] = m.table.columns;
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.table.rows.size(); ++r) {
        nlohmann::json row;
        row["row"] = r;
        for (std::size_t c = 0; c < m.table.columns.size(); ++c) {
            const auto& v = m.table.rows[r][c];
            row[m.table.columns[c]] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
        }
        row["note"] = m.table.notes[r];
        rows.push_back(row);
    }
    j["rows"] = rows;
    write_text((fs::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
    return m;
}

// ---------------------------------------------------------------------------
// Verification suite

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

struct VerifyReport {
    std::vector<Check> checks;
    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
};

namespace detail {

inline void run_check(VerifyReport& rep, const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    try {
        auto [ok, msg] = fn();
        rep.checks.push_back({name, ok, msg});
    } catch (const std::exception& e) {
        rep.checks.push_back({name, false, std::string("error: ") + e.what()});
    }
}

inline std::string sci(double v) {
    std::ostringstream o;
    o << std::setprecision(4) << v;
    return o.str();
}

}  // namespace detail

inline VerifyReport verify(const RunConfig& cfg, bool with_sim) {
    VerifyReport rep;
    const auto& ch = cfg.channel;
    const double lambda = cfg.network.lambda;
    const bool degenerate = ch.fixed_distance() && ch.constant_fading();
    const std::vector<double> pgrid{0.05, 0.1, 0.2, 0.5, 0.9};

    detail::run_check(rep, "kappa(0) equals kappa", [&] {
        const double a = bounds::kappa_t(ch, 0.0), b = bounds::kappa(ch);
        return std::pair{std::abs(a - b) <= 1e-9 * b, "kappa = " + detail::sci(b)};
    });

    if (!degenerate) {
        detail::run_check(rep, "threshold/ccdf round trip", [&] {
            double worst = 0.0;
            for (double p : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99})
                worst = std::max(worst, std::abs(transmit_probability(ch, threshold_for_probability(ch, p)) - p));
            return std::pair{worst <= 1e-9, "max |F(t(p)) - p| = " + detail::sci(worst)};
        });
        detail::run_check(rep, "gamma inverse round trip", [&] {
            double worst = 0.0;
            for (double p : {0.02, 0.1, 0.3, 0.6, 0.9}) {
                const double t = threshold_for_probability(ch, p);
                const double back = bounds::gamma_inverse(ch, lambda, bounds::gamma_of_t(ch, lambda, t));
                worst = std::max(worst, std::abs(back - t) / t);
            }
            return std::pair{worst <= 1e-8, "max relative error " + detail::sci(worst)};
        });
        detail::run_check(rep, "kappa(t) strictly decreasing", [&] {
            double prev = bounds::kappa(ch);
            for (double p : {0.9, 0.7, 0.5, 0.3, 0.1, 0.03}) {
                const double k = bounds::kappa_t(ch, threshold_for_probability(ch, p));
                if (!(k < prev)) return std::pair{false, "increase at p = " + detail::sci(p)};
                prev = k;
            }
            return std::pair{true, std::string("ok")};
        });
        detail::run_check(rep, "Jensen ordering of lower bounds", [&] {
            for (double p : pgrid) {
                const auto no = bounds::outage_bounds(ch, PolicySpec::random_access(p, Power::Unit), lambda);
                const auto ci = bounds::outage_bounds(ch, PolicySpec::random_access(p, Power::ChannelInversion), lambda);
                if (!(ci.q_lower > no.q_lower)) return std::pair{false, "violated at p = " + detail::sci(p)};
            }
            return std::pair{true, std::string("q_lower(ra_ci) > q_lower(ra_nopc) on grid")};
        });
    }

    detail::run_check(rep, "threshold t = 0 matches random access p = 1", [&] {
        double worst = 0.0;
        for (auto power : {Power::Unit, Power::ChannelInversion}) {
            const auto a = bounds::outage_bounds(ch, PolicySpec::threshold(0.0, power), lambda);
            const auto b = bounds::outage_bounds(ch, PolicySpec::random_access(1.0, power), lambda);
            for (auto [x, y] : {std::pair{a.q_lower, b.q_lower}, {a.q_upper, b.q_upper}, {a.tau_lower, b.tau_lower},
                                {a.tau_upper, b.tau_upper}, {a.mu, b.mu}})
                worst = std::max(worst, std::abs(x - y));
        }
        return std::pair{worst <= 1e-12, "max difference " + detail::sci(worst)};
    });

    detail::run_check(rep, "bound ordering q_lower <= q_upper", [&] {
        for (double p : pgrid)
            for (auto power : {Power::Unit, Power::ChannelInversion}) {
                const auto b = bounds::outage_bounds(ch, PolicySpec::random_access(p, power), lambda);
                if (!(b.q_lower <= b.q_upper && b.q_upper <= 1.0 && b.tau_lower <= b.tau_upper))
                    return std::pair{false, "violated at p = " + detail::sci(p)};
            }
        return std::pair{true, std::string("ok")};
    });

    detail::run_check(rep, "asymptotic upper/lower ratio", [&] {
        const double target = 2.0 / (2.0 - ch.delta());
        const double mu = 1e-6 / bounds::theta(ch);
        const auto b = bounds::outage_bounds(ch, PolicySpec::random_access(mu / lambda, Power::ChannelInversion), lambda);
        const double r = b.q_upper / b.q_lower;
        return std::pair{std::abs(r - target) < 0.02, "ratio " + detail::sci(r) + " vs " + detail::sci(target)};
    });

    detail::run_check(rep, "fading factor at most 1", [&] {
        const double f = bounds::fading_tc_factor(ch.fading(), ch.alpha());
        return std::pair{f <= 1.0 + 1e-12 && f > 0.0, "factor " + detail::sci(f)};
    });

    if (!with_sim) return rep;

    // The bounds describe the field without an exclusion disk. Under threshold
    // scheduling links can be shorter than a meter, so d_min = 0.5 would bias
    // the comparison; both oracle checks therefore run at d_min = 0.
    auto exact = cfg.sim;
    exact.d_min = 0.0;
    const std::vector<double> sim_p{0.05, 0.2};
    for (auto f : cfg.sweep.policies) {
        detail::run_check(rep, "sandwich (" + policy_name(f) + ")", [&] {
            std::string msg;
            bool ok = true;
            for (double p : sim_p) {
                const auto pol = detail::policy_for_p(ch, f, p);
                const auto b = bounds::outage_bounds(ch, pol, lambda);
                if (b.q_upper >= 1.0) continue;
                // Enough trials for ~400 expected outage events at small q.
                auto sc = exact;
                if (b.q_lower > 0.0)
                    sc.trials = std::clamp(static_cast<long>(std::ceil(400.0 / b.q_lower)), sc.trials, 2000000L);
                const auto e = sim::estimate_outage(ch, cfg.network, pol, sc);
                const bool in = b.q_lower - e.ci_half_width <= e.mean && e.mean <= b.q_upper + e.ci_half_width;
                ok = ok && in;
                msg += "p=" + detail::sci(p) + ": " + detail::sci(b.q_lower) + " <= " + detail::sci(e.mean) +
                       " <= " + detail::sci(b.q_upper) + "  ";
            }
            return std::pair{ok, msg};
        });
        if (f.power != Power::ChannelInversion) continue;
        detail::run_check(rep, "dominant interferer probability equals q_lower (" + policy_name(f) + ")", [&] {
            const auto pol = detail::policy_for_p(ch, f, 0.1);
            const auto b = bounds::outage_bounds(ch, pol, lambda);
            const auto e = sim::dominant_interferer_probability(ch, cfg.network, pol, exact);
            return std::pair{std::abs(e.mean - b.q_lower) <= e.ci_half_width,
                             detail::sci(e.mean) + " +- " + detail::sci(e.ci_half_width) + " vs " +
                                 detail::sci(b.q_lower)};
        });
    }

    detail::run_check(rep, "window truncation", [&] {
        const auto rep2 = sim::truncation_convergence_check(ch, cfg.network, PolicySpec::random_access(0.2), cfg.sim);
        return std::pair{rep2.pass, "R = " + detail::sci(cfg.sim.window_radius) + ": |dq| = " + detail::sci(rep2.delta) +
                                        " allowance " + detail::sci(rep2.allowance)};
    });
    return rep;
}

// ---------------------------------------------------------------------------
// Small reports

inline Table capacity_report(const RunConfig& cfg, double eps, bool with_sim) {
    Table t;
    t.columns = {"eps", "c_l", "c_u", "c_sim", "c_sim_ci"};
    for (auto f : cfg.sweep.policies) {
        std::vector<Cell> row{eps, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
        std::string note = policy_name(f);
        try {
            const auto c = bounds::transmission_capacity_bounds(cfg.channel, f, cfg.network.lambda, eps);
            row[1] = c.c_lower;
            row[2] = c.c_upper;
        } catch (const std::exception& e) {
            detail::add_note(note, e.what());
        }
        if (with_sim) {
            try {
                const auto c = sim::estimate_capacity(cfg.channel, cfg.network, f, cfg.sim, eps);
                row[3] = c.mean;
                row[4] = c.ci_half_width;
            } catch (const std::exception& e) {
                detail::add_note(note, e.what());
            }
        }
        t.rows.push_back(row);
        t.notes.push_back(note);
    }
    return t;
}

inline std::string optimal_report(const RunConfig& cfg) {
    std::ostringstream o;
    o << std::setprecision(10);
    const auto& ch = cfg.channel;
    const double lambda = cfg.network.lambda;
    o << "theta = " << bounds::theta(ch) << "\n";
    try {
        const auto op = bounds::optimal_random_access(ch, lambda);
        o << "random access: mu* = " << op.mu_star << ", p* = " << op.mu_star / lambda << ", tau* = " << op.tau_star
          << ", eps* = " << op.eps_star << "\n";
    } catch (const UnsaturatedError& e) {
        o << "random access: " << e.what() << "\n";
    }
    try {
        const double t = bounds::optimal_threshold(ch, lambda);
        o << "threshold: t_opt = " << t << ", P(W > t_opt) = " << transmit_probability(ch, t)
          << ", tau(t_opt) = " << bounds::threshold_throughput(ch, lambda, t) << "\n";
    } catch (const std::exception& e) {
        o << "threshold: " << e.what() << "\n";
    }
    return o.str();
}

}  // namespace adhoc_tc::cli
