#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "adhoc_tc/config.hpp"
#include "adhoc_tc/report.hpp"
#include "adhoc_tc/sweep.hpp"

using namespace adhoc_tc;
using namespace adhoc_tc::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("adhoc_tc_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string config_error(const std::string& text) {
    try {
        load_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_tool(const std::string& args, const fs::path& log) {
    const char* bin = std::getenv("ADHOC_TC_BIN");
    if (!bin) return -1;
    const int rc = std::system((std::string(bin) + " " + args + " > " + log.string() + " 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string sample(const std::string& name) {
    const char* dir = std::getenv("ADHOC_TC_SAMPLES");
    return (fs::path(dir ? dir : "samples") / name).string();
}

}  // namespace

TEST(Config, Defaults) {
    const auto cfg = load_config_text("");
    EXPECT_EQ(cfg.example, "rayleigh");
    EXPECT_DOUBLE_EQ(cfg.channel.alpha(), 4.0);
    EXPECT_DOUBLE_EQ(cfg.channel.beta(), 3.0);
    EXPECT_DOUBLE_EQ(cfg.network.lambda, 0.01);
    EXPECT_DOUBLE_EQ(std::get<FixedDistance>(cfg.channel.distance()).r, 5.0);
    EXPECT_EQ(cfg.sweep.policies.size(), 4u);
    EXPECT_EQ(cfg.sweep.x_axis, XAxis::P);
    EXPECT_GE(cfg.sweep.grid.size(), 10u);
    EXPECT_EQ(cfg.resolved.at("channel.fading"), "rayleigh");
}

TEST(Config, Presets) {
    const auto ln = load_config_text("[channel]\nexample = lognormal\n");
    EXPECT_NEAR(std::get<LognormalFading>(ln.channel.fading()).sigma, 1.3815510557964273, 1e-15);
    const auto nats = load_config_text("[channel]\nexample = lognormal\nsigma = 1.2\nsigma_unit = nats\n");
    EXPECT_DOUBLE_EQ(std::get<LognormalFading>(nats.channel.fading()).sigma, 1.2);
    const auto nn = load_config_text("[channel]\nexample = nearest\n[network]\nlambda = 0.02\n");
    EXPECT_DOUBLE_EQ(std::get<NearestNeighborDistance>(nn.channel.distance()).lambda_prime, 0.02);
    EXPECT_DOUBLE_EQ(std::get<ConstantFading>(nn.channel.fading()).psi, 1.0);
    const auto rate = load_config_text("[channel]\nrate = 2\n");
    EXPECT_DOUBLE_EQ(rate.channel.beta(), 3.0);
    const auto custom = load_config_text(
        "[channel]\nexample = custom\nfading = rayleigh\ndistance = nearest\n# comment\nalpha = 3.5  # trailing\n");
    EXPECT_DOUBLE_EQ(custom.channel.alpha(), 3.5);
    EXPECT_FALSE(custom.channel.fixed_distance());
}

TEST(Config, Errors) {
    EXPECT_NE(config_error("[channel]\nalpha = 1.5\n").find("alpha must exceed 2"), std::string::npos);
    EXPECT_NE(config_error("[channel]\nfoo = 1\n").find("unknown key 'foo'"), std::string::npos);
    EXPECT_NE(config_error("[channel]\nfoo = 1\n").find("line 2"), std::string::npos);
    EXPECT_NE(config_error("[nope]\n").find("unknown section"), std::string::npos);
    EXPECT_NE(config_error("alpha = 4\n").find("outside any section"), std::string::npos);
    EXPECT_NE(config_error("[channel]\nalpha = 4\nalpha = 5\n").find("duplicate"), std::string::npos);
    EXPECT_NE(config_error("[channel]\nalpha = four\n").find("alpha"), std::string::npos);
    EXPECT_NE(config_error("[channel]\nbeta = 3\nrate = 2\n").find("either"), std::string::npos);
    EXPECT_NE(config_error("[sweep]\npolicies =\n").find("policy list is empty"), std::string::npos);
    EXPECT_NE(config_error("[sweep]\npolicies = ra_nopc, tdma\n").find("unknown policy"), std::string::npos);
    EXPECT_NE(config_error("[sweep]\ngrid = 0.5, 0.2\n").find("strictly increasing"), std::string::npos);
    EXPECT_NE(config_error("[sweep]\ngrid = 0.5, 1.5\n").find("outside"), std::string::npos);
    EXPECT_NE(config_error("[sweep]\nx_axis = eps\ngrid = 0, 0.5\n").find("outside"), std::string::npos);
    EXPECT_NE(config_error("[sim]\ntrials = 0\n").find("trials"), std::string::npos);
    EXPECT_NE(config_error("[network]\nlambda = -1\n").find("lambda"), std::string::npos);
    EXPECT_THROW(load_config_file("/nonexistent/config.cfg"), ConfigError);
}

TEST(Csv, Format) {
    Table t;
    t.columns = {"p", "q_lower"};
    t.rows = {{0.1, 1.0 / 3}, {0.2, std::nullopt}};
    t.notes = {"", "a, \"b\""};
    const auto csv = to_csv(t);
    EXPECT_EQ(csv, "p,q_lower,note\n0.1,0.3333333333333333,\n0.2,,\"a, \"\"b\"\"\"\n");
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(std::stod(format_number(0.1 + 0.2)), 0.1 + 0.2);
    EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Svg, WellFormed) {
    Panel p{"t", "x", "y", {{"a", "#000", false, false, {0, 1, 2}, {0, 1, 4}, {}},
                            {"b", "#f00", true, true, {0, 1}, {1, std::nan("")}, {0.1, 0.1}}}};
    const auto svg = render_svg("title <&>", {p, p, p});
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("title &lt;&amp;&gt;"), std::string::npos);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(Sweep, ColumnsNameTheQuantities) {
    auto cfg = load_config_text("[sim]\ntrials = 500\n[sweep]\ngrid = 0.05, 0.5, 1.0\n");
    const auto t = sweep_table(cfg);
    for (const char* c : {"p", "t", "ra_nopc_q_lower", "ra_nopc_q_upper", "ra_nopc_q_sim", "ra_nopc_q_sim_ci",
                          "ra_ci_tau_l", "th_nopc_tau_u", "th_ci_q_sim"})
        EXPECT_TRUE(t.has_column(c)) << c;
    ASSERT_EQ(t.rows.size(), 3u);
    for (const auto& row : t.rows)
        for (auto f : cfg.sweep.policies) {
            const auto n = policy_name(f);
            EXPECT_LE(*row[t.column(n + "_q_lower")], *row[t.column(n + "_q_upper")]);
        }
    // Threshold columns share the abscissa through t(p); t(1) = 0.
    EXPECT_EQ(*t.rows[2][t.column("t")], 0.0);
}

TEST(Sweep, PerPointErrorsDoNotStopTheSweep) {
    auto cfg = load_config_text("[sweep]\nx_axis = eps\ngrid = 0.01, 0.99\nsim = false\n");
    const auto t = sweep_table(cfg);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_TRUE(t.rows[0][t.column("ra_ci_c_u")].has_value());
    EXPECT_FALSE(t.rows[1][t.column("ra_ci_c_u")].has_value());
    EXPECT_NE(t.notes[1].find("eps must be <="), std::string::npos);
}

TEST(Sweep, FadingFactorCurve) {
    auto cfg = load_config_text("[sweep]\nx_axis = alpha\ngrid = 2.5, 3, 4\n");
    const auto t = sweep_table(cfg);
    EXPECT_NEAR(*t.rows[1][t.column("fading_tc_factor")], 0.41, 0.005);
    EXPECT_NEAR(*t.rows[2][t.column("asymptotic_ratio")], 4.0 / 3, 1e-12);
}

TEST(Sweep, FilesAndManifest) {
    const auto dir = scratch_dir("sweep");
    auto cfg = load_config_text("[sim]\ntrials = 400\n[sweep]\ngrid = 0.1, 0.5\ncsv = a.csv\nplot = a.svg\n");
    const auto m = run_sweep(cfg, (dir / "one").string());
    const auto csv1 = slurp(dir / "one" / "a.csv");
    run_sweep(cfg, (dir / "two").string());
    EXPECT_EQ(csv1, slurp(dir / "two" / "a.csv"));
    EXPECT_EQ(slurp(dir / "one" / "a.svg"), slurp(dir / "two" / "a.svg"));
    EXPECT_EQ(csv1, to_csv(m.table));

    const auto j = nlohmann::json::parse(slurp(dir / "one" / "manifest.json"));
    EXPECT_EQ(j["tool"], "adhoc-tc");
    EXPECT_EQ(j["seed"], cfg.sim.master_seed);
    EXPECT_EQ(j["parameters"]["channel.example"], "rayleigh");
    ASSERT_EQ(j["rows"].size(), 2u);
    EXPECT_EQ(j["rows"][1]["p"].get<double>(), 0.5);
    EXPECT_EQ(j["rows"][1]["ra_nopc_q_sim"].get<double>(), *m.table.rows[1][m.table.column("ra_nopc_q_sim")]);

    cfg.sim.master_seed = 7;
    run_sweep(cfg, (dir / "three").string());
    EXPECT_NE(csv1, slurp(dir / "three" / "a.csv"));
}

TEST(Verify, AnalyticChecksPass) {
    for (const char* ex : {"rayleigh", "lognormal", "nearest"}) {
        const auto rep = verify(load_config_text(std::string("[channel]\nexample = ") + ex + "\n"), false);
        for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << ex << ": " << c.name << " " << c.detail;
        EXPECT_GE(rep.checks.size(), 6u);
    }
}

TEST(Verify, SmallWindowFails) {
    const auto rep = verify(load_config_text("[sim]\nwindow_radius = 10\ntrials = 4000\n[sweep]\npolicies = ra_nopc\n"), true);
    EXPECT_FALSE(rep.pass());
    const auto it = std::find_if(rep.checks.begin(), rep.checks.end(), [](const Check& c) { return c.name == "window truncation"; });
    ASSERT_NE(it, rep.checks.end());
    EXPECT_FALSE(it->pass);
}

TEST(Tool, ExitCodes) {
    if (!std::getenv("ADHOC_TC_BIN")) GTEST_SKIP() << "ADHOC_TC_BIN not set";
    const auto dir = scratch_dir("tool");
    const auto bad = dir / "bad.cfg";
    std::ofstream(bad) << "[channel]\nalpha = 1.5\n";
    EXPECT_EQ(run_tool("verify --config " + bad.string(), dir / "log1"), 2);
    EXPECT_NE(slurp(dir / "log1").find("alpha must exceed 2"), std::string::npos);
    EXPECT_EQ(run_tool("verify --no-sim", dir / "log2"), 0);
    EXPECT_EQ(run_tool("verify --config " + sample("small_window.cfg"), dir / "log3"), 1);
    EXPECT_NE(slurp(dir / "log3").find("FAIL window truncation"), std::string::npos);
    EXPECT_EQ(run_tool("optimal", dir / "log4"), 0);
    EXPECT_NE(slurp(dir / "log4").find("eps* = 0.632"), std::string::npos);
    EXPECT_EQ(run_tool("capacity --no-sim --eps 0.1", dir / "log5"), 0);
    EXPECT_EQ(run_tool("capacity --no-sim --eps 1.5", dir / "log6"), 2);
    EXPECT_EQ(run_tool("sweep --config " + sample("fading_alpha.cfg") + " --out-dir " + (dir / "out").string(),
                       dir / "log7"), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "rayleigh_alpha.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "rayleigh_alpha.svg"));
    EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
    EXPECT_EQ(run_tool("sweep --trials 0", dir / "log8"), 2);
    EXPECT_EQ(run_tool("frobnicate", dir / "log9"), 2);
}

TEST(Tool, SamplesParse) {
    for (const char* s : {"rayleigh.cfg", "lognormal.cfg", "nearest.cfg", "nearest_eps.cfg", "fading_alpha.cfg",
                          "small_window.cfg"})
        EXPECT_NO_THROW(load_config_file(sample(s))) << s;
}
