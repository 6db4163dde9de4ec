#pragma once

// Line-oriented run configuration:
//
//   [channel]
//   example = rayleigh
//   alpha = 4
//   [sweep]
//   grid = 0.02, 0.05, 0.1
//
// '#' starts a comment. Unknown sections or keys are errors.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "adhoc_tc/bounds.hpp"
#include "adhoc_tc/channel.hpp"
#include "adhoc_tc/errors.hpp"
#include "adhoc_tc/sim.hpp"

namespace adhoc_tc::cli {

enum class XAxis { P, Eps, Alpha };

inline std::string axis_name(XAxis x) {
    switch (x) {
        case XAxis::P: return "p";
        case XAxis::Eps: return "eps";
        case XAxis::Alpha: return "alpha";
    }
    return "?";
}

struct SweepSpec {
    std::string example;
    std::vector<PolicyFamily> policies;
    XAxis x_axis = XAxis::P;
    std::vector<double> grid;
    std::string csv_path = "sweep.csv";
    std::string plot_path = "sweep.svg";
    bool sim = true;
    double eps = 0.1;  // outage target for the capacity subcommand

    void validate() const {
        if (policies.empty()) throw ConfigError("sweep: policy list is empty");
        if (grid.empty()) throw ConfigError("sweep: grid is empty");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1])) throw ConfigError("sweep: grid must be strictly increasing");
        for (double x : grid) {
            const bool ok = x_axis == XAxis::P ? (x > 0.0 && x <= 1.0)
                          : x_axis == XAxis::Eps ? (x > 0.0 && x < 1.0)
                                                 : (x > 2.0 && std::isfinite(x));
            if (!ok) {
                std::ostringstream msg;
                msg << "sweep: grid value " << x << " outside the domain of x_axis = " << axis_name(x_axis);
                throw ConfigError(msg.str());
            }
        }
        if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("sweep: eps must lie in (0,1)");
    }
};

struct RunConfig {
    std::string example;
    ChannelSpec channel;
    NetworkSpec network;
    sim::SimConfig sim;
    SweepSpec sweep;
    // Every resolved parameter as text, for the manifest.
    std::map<std::string, std::string> resolved;
};

namespace detail {

inline std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw ConfigError("'" + key + "': not a number: '" + text + "'");
    return v;
}

inline long parse_long(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError("'" + key + "': not an integer: '" + text + "'");
    return static_cast<long>(v);
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw ConfigError("'" + key + "': not an unsigned 64-bit integer: '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    const auto t = lower(text);
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ConfigError("'" + key + "': expected true/false, got '" + text + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline PolicyFamily parse_policy(const std::string& name) {
    const auto n = lower(name);
    if (n == "ra_nopc") return {Scheduling::RandomAccess, Power::Unit};
    if (n == "ra_ci") return {Scheduling::RandomAccess, Power::ChannelInversion};
    if (n == "th_nopc") return {Scheduling::Threshold, Power::Unit};
    if (n == "th_ci") return {Scheduling::Threshold, Power::ChannelInversion};
    throw ConfigError("unknown policy '" + name + "' (expected ra_nopc, ra_ci, th_nopc, th_ci)");
}

using Section = std::map<std::string, std::string>;

}  // namespace detail

using RawConfig = std::map<std::string, detail::Section>;

/// Splits config text into sections; rejects unknown sections/keys and duplicates.
inline RawConfig parse_raw(std::istream& in) {
    static const std::map<std::string, std::vector<std::string>> known{
        {"channel", {"example", "alpha", "beta", "rate", "fading", "distance", "r", "sigma", "sigma_unit", "psi",
                     "lambda_prime"}},
        {"network", {"lambda"}},
        {"sim", {"trials", "seed", "window_radius", "d_min", "ci_level", "threads"}},
        {"sweep", {"policies", "x_axis", "grid", "csv", "plot", "sim", "eps"}},
    };
    RawConfig raw;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto where = [&] { return "line " + std::to_string(lineno) + ": "; };
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where() + "malformed section header");
            section = detail::lower(detail::trim(line.substr(1, line.size() - 2)));
            if (!known.count(section)) throw ConfigError(where() + "unknown section [" + section + "]");
            raw[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where() + "expected key = value");
        if (section.empty()) throw ConfigError(where() + "key outside any section");
        const auto key = detail::lower(detail::trim(line.substr(0, eq)));
        const auto value = detail::trim(line.substr(eq + 1));
        const auto& keys = known.at(section);
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(where() + "unknown key '" + key + "' in [" + section + "]");
        if (raw[section].count(key)) throw ConfigError(where() + "duplicate key '" + key + "'");
        raw[section][key] = value;
    }
    return raw;
}

namespace detail {

inline std::vector<double> default_grid(XAxis x) {
    switch (x) {
        case XAxis::P: return {0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0};
        case XAxis::Eps: return {0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6};
        case XAxis::Alpha: return {2.2, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0};
    }
    return {};
}

template <class T>
std::string fmt(T v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}

}  // namespace detail

/// Builds a validated RunConfig. Channel-model violations surface as ConfigError.
inline RunConfig resolve(const RawConfig& raw) {
    auto get = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
        auto s = raw.find(sec);
        if (s == raw.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    };
    auto num = [&](const std::string& sec, const std::string& key, double dflt) {
        auto v = get(sec, key);
        return v ? detail::parse_double(key, *v) : dflt;
    };

    std::map<std::string, std::string> res;
    const std::string example = detail::lower(get("channel", "example").value_or("rayleigh"));
    std::string fading, distance;
    if (example == "lognormal") {
        fading = "lognormal";
        distance = "fixed";
    } else if (example == "rayleigh") {
        fading = "rayleigh";
        distance = "fixed";
    } else if (example == "nearest") {
        fading = "constant";
        distance = "nearest";
    } else if (example == "custom") {
        fading = "rayleigh";
        distance = "fixed";
    } else {
        throw ConfigError("unknown example '" + example + "' (expected lognormal, rayleigh, nearest, custom)");
    }
    fading = detail::lower(get("channel", "fading").value_or(fading));
    distance = detail::lower(get("channel", "distance").value_or(distance));

    const double lambda = num("network", "lambda", 0.01);
    const double alpha = num("channel", "alpha", 4.0);
    double beta = 3.0;
    if (get("channel", "beta") && get("channel", "rate")) throw ConfigError("give either beta or rate, not both");
    try {
        NetworkSpec{lambda}.validate();
        if (auto rate = get("channel", "rate")) beta = bounds::rate_to_sir_threshold(detail::parse_double("rate", *rate));
        else beta = num("channel", "beta", 3.0);

        FadingModel fm;
        if (fading == "rayleigh") {
            fm = RayleighFading{};
        } else if (fading == "lognormal") {
            const auto unit = detail::lower(get("channel", "sigma_unit").value_or("db"));
            if (unit != "db" && unit != "nats") throw ConfigError("sigma_unit must be db or nats");
            const double sg = num("channel", "sigma", 6.0);
            fm = lognormal_fading(sg, unit == "db" ? SigmaUnit::Decibels : SigmaUnit::Nats);
            res["channel.sigma_nats"] = detail::fmt(std::get<LognormalFading>(fm).sigma);
        } else if (fading == "constant") {
            fm = ConstantFading{num("channel", "psi", 1.0)};
            res["channel.psi"] = detail::fmt(std::get<ConstantFading>(fm).psi);
        } else {
            throw ConfigError("unknown fading '" + fading + "' (expected rayleigh, lognormal, constant)");
        }

        DistanceModel dm;
        if (distance == "fixed") {
            // Default hop length r = 1 / (2 sqrt(lambda)).
            dm = FixedDistance{num("channel", "r", 0.5 / std::sqrt(lambda))};
            res["channel.r"] = detail::fmt(std::get<FixedDistance>(dm).r);
        } else if (distance == "nearest") {
            dm = NearestNeighborDistance{num("channel", "lambda_prime", lambda)};
            res["channel.lambda_prime"] = detail::fmt(std::get<NearestNeighborDistance>(dm).lambda_prime);
        } else {
            throw ConfigError("unknown distance model '" + distance + "' (expected fixed, nearest)");
        }

        RunConfig cfg{example, ChannelSpec(alpha, beta, fm, dm), NetworkSpec{lambda}, {}, {}, {}};
        cfg.network.validate();

        auto& sc = cfg.sim;
        sc.trials = get("sim", "trials") ? detail::parse_long("trials", *get("sim", "trials")) : 20000;
        if (auto s = get("sim", "seed")) sc.master_seed = detail::parse_seed("seed", *s);
        sc.window_radius = num("sim", "window_radius", sc.window_radius);
        sc.d_min = num("sim", "d_min", sc.d_min);
        sc.ci_level = num("sim", "ci_level", sc.ci_level);
        if (auto s = get("sim", "threads")) sc.threads = static_cast<int>(detail::parse_long("threads", *s));
        sc.validate();

        auto& sw = cfg.sweep;
        sw.example = example;
        const auto pol = get("sweep", "policies").value_or("ra_nopc, ra_ci, th_nopc, th_ci");
        for (const auto& name : detail::split_list(pol)) sw.policies.push_back(detail::parse_policy(name));
        const auto ax = detail::lower(get("sweep", "x_axis").value_or("p"));
        if (ax == "p") sw.x_axis = XAxis::P;
        else if (ax == "eps") sw.x_axis = XAxis::Eps;
        else if (ax == "alpha") sw.x_axis = XAxis::Alpha;
        else throw ConfigError("unknown x_axis '" + ax + "' (expected p, eps, alpha)");
        if (auto g = get("sweep", "grid")) {
            for (const auto& item : detail::split_list(*g)) sw.grid.push_back(detail::parse_double("grid", item));
        } else {
            sw.grid = detail::default_grid(sw.x_axis);
        }
        sw.csv_path = get("sweep", "csv").value_or(example + "_" + axis_name(sw.x_axis) + ".csv");
        sw.plot_path = get("sweep", "plot").value_or(example + "_" + axis_name(sw.x_axis) + ".svg");
        if (auto s = get("sweep", "sim")) sw.sim = detail::parse_bool("sim", *s);
        sw.eps = num("sweep", "eps", 0.1);
        sw.validate();

        res["channel.example"] = example;
        res["channel.fading"] = fading;
        res["channel.distance"] = distance;
        res["channel.alpha"] = detail::fmt(alpha);
        res["channel.beta"] = detail::fmt(beta);
        res["network.lambda"] = detail::fmt(lambda);
        res["sim.trials"] = std::to_string(sc.trials);
        res["sim.seed"] = std::to_string(sc.master_seed);
        res["sim.window_radius"] = detail::fmt(sc.window_radius);
        res["sim.d_min"] = detail::fmt(sc.d_min);
        res["sim.ci_level"] = detail::fmt(sc.ci_level);
        res["sim.threads"] = std::to_string(sc.threads);
        std::string pols;
        for (auto p : sw.policies) pols += (pols.empty() ? "" : ",") + policy_name(p);
        res["sweep.policies"] = pols;
        res["sweep.x_axis"] = axis_name(sw.x_axis);
        res["sweep.sim"] = sw.sim ? "true" : "false";
        res["sweep.eps"] = detail::fmt(sw.eps);
        cfg.resolved = std::move(res);
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

inline RunConfig load_config_text(const std::string& text) {
    std::istringstream in(text);
    return resolve(parse_raw(in));
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return resolve(parse_raw(in));
}

}  // namespace adhoc_tc::cli
