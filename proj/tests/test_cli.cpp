#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qres/commands.hpp"

namespace fs = std::filesystem;
using namespace qres::cli;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "qres");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("qres_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        rows.emplace_back();
        std::istringstream cells(line);
        std::string c;
        while (std::getline(cells, c, ','))
            rows.back().push_back(c);
    }
    return rows;
}

} // namespace

TEST(Config, SizesAndFieldGrids) {
    EXPECT_EQ(parse_sizes("4, 6,8").size(), 3u);
    const auto grid = parse_sizes("3x3,3X4");
    EXPECT_EQ(grid[1].sites(), 12u);
    EXPECT_EQ(grid[1].str(), "3x4");
    EXPECT_THROW(parse_sizes("4,a"), ConfigError);
    EXPECT_THROW(parse_sizes("0"), ConfigError);

    const auto h = parse_h_grid("0.1:1.0:0.1");
    ASSERT_EQ(h.size(), 10u);
    EXPECT_NEAR(h.back(), 1.0, 1e-12);
    EXPECT_EQ(parse_h_grid("0.5,1,2").size(), 3u);
    EXPECT_THROW(parse_h_grid("1:0:0.1"), ConfigError);
    EXPECT_THROW(parse_h_grid("-1"), ConfigError);
    EXPECT_THROW(parse_h_grid("0:1"), ConfigError);
}

TEST(Config, FileWithSections) {
    std::istringstream text("# sweep\n[model]\nmodel = ising2d\nsizes = 3x3 ; inline comment\n\n[tci]\nxi=12\ntol = 1e-9\n");
    const auto kv = read_config_text(text);
    RunConfig cfg;
    for (const auto& [k, v] : kv)
        apply_setting(cfg, k, v);
    EXPECT_EQ(cfg.model, "ising2d");
    EXPECT_EQ(cfg.sizes.size(), 1u);
    EXPECT_EQ(cfg.xi, 12u);
    EXPECT_DOUBLE_EQ(cfg.tol, 1e-9);
    EXPECT_THROW(apply_setting(cfg, "colour", "red"), ConfigError);
    std::istringstream bad("[model\n");
    EXPECT_THROW(read_config_text(bad), ConfigError);
    std::istringstream no_eq("model ising1d\n");
    EXPECT_THROW(read_config_text(no_eq), ConfigError);
}

TEST(Config, Validation) {
    RunConfig cfg;
    cfg.sizes = parse_sizes("3x3");
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg.model = "ising2d";
    EXPECT_NO_THROW(validate(cfg));
    cfg.solver = "ghz-analytic";
    cfg.h_grid = {0.5};
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Csv, NumberFormat) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format_number(123456789.123456789), "123456789.123");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(1e-20), "1e-20");
    CsvTable t({"a", "b"});
    t.add({"1", "2"});
    EXPECT_EQ(t.str(), "a,b\n1,2\n");
    EXPECT_THROW(t.add({"1"}), std::logic_error);
}

TEST(Fit, LineThroughPoints) {
    const auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(f.relative_residual, 0.0, 1e-14);
    EXPECT_GT(linear_fit({1, 2, 3}, {1, 4, 9}).relative_residual, 0.05);
    EXPECT_THROW(linear_fit({1}, {1}), std::invalid_argument);
}

TEST(Svg, SeriesAndLegend) {
    const auto svg = line_chart_svg({{"L = 4", {0, 1}, {0, 1}}, {"L = <6>", {0, 1}, {1, 3}}}, "t", "h", "M2");
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_EQ(std::count(svg.begin(), svg.end(), 'p') > 0, true);
    std::size_t polylines = 0;
    for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1))
        ++polylines;
    EXPECT_EQ(polylines, 2u);
    EXPECT_NE(svg.find("L = &lt;6&gt;"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Cli, GroundStateMatchesDenseOracle) {
    const auto dir = scratch("gs");
    const auto r = run({"ground-state", "--sizes", "8", "--h", "0.5", "--solver", "ed", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir / "ground_state_ising1d.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"size", "h", "energy", "chi_used", "solver", "runtime_s", "status"}));
    const double expected = oracle::dense_ground_energy(qres::build_tfim_1d(8, 0.5, true));
    EXPECT_NEAR(std::stod(rows[1][2]), expected, 1e-9);
    EXPECT_EQ(rows[1][6], "ok");
}

TEST(Cli, GroundStateSnapshotRoundTrip) {
    const auto dir = scratch("gs2d");
    const auto r = run({"ground-state", "--model", "ising2d", "--sizes", "3x3", "--h", "1", "--solver", "ed", "--out",
                        dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::size_t found = 0;
    for (const auto& e : fs::directory_iterator(dir / "cache")) {
        const auto psi = qres::load_snapshot(e.path());
        EXPECT_NEAR(qres::norm(psi), 1.0, 1e-12);
        EXPECT_EQ(psi.size(), 9u);
        ++found;
    }
    EXPECT_EQ(found, 1u);
}

TEST(Cli, GhzAnalyticState) {
    const auto dir = scratch("ghz");
    auto r = run({"ground-state", "--sizes", "6", "--h", "0", "--solver", "ghz-analytic", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_csv(dir / "ground_state_ising1d.csv")[1][2], "-6");
    r = run({"measure", "--measure", "rec", "--sizes", "6,10", "--h", "0", "--solver", "ghz-analytic", "--out",
             dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir / "rec_ising1d.csv");
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t k = 1; k < rows.size(); ++k)
        EXPECT_NEAR(std::stod(rows[k][3]), 1.0, 1e-6);
    EXPECT_EQ(run({"ground-state", "--h", "0.5", "--solver", "ghz-analytic", "--out", dir.string()}).code, 2);
}

TEST(Cli, MeasureShapeAndDeterminism) {
    const auto dir = scratch("measure");
    const std::vector<std::string> args{"measure", "--sizes", "4,6", "--h", "0.2:0.6:0.2", "--out", dir.string()};
    auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto first = slurp(dir / "sre2_ising1d.csv");
    const auto rows = read_csv(dir / "sre2_ising1d.csv");
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"measure", "size", "h", "value", "chi", "xi", "n_calls",
                                                 "achieved_error"}));
    for (std::size_t k = 1; k < rows.size(); ++k)
        EXPECT_TRUE(std::isfinite(std::stod(rows[k][3])));
    EXPECT_TRUE(fs::exists(dir / "sre2_ising1d.svg"));
    EXPECT_TRUE(fs::exists(dir / "sre2_ising1d_scaling.csv"));

    // second run reuses cached states; a third builds them again from scratch
    r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir / "sre2_ising1d.csv"), first);
    fs::remove_all(dir / "cache");
    fs::remove(dir / "sre2_ising1d.svg");
    r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir / "sre2_ising1d.csv"), first);

    r = run({"measure", "--sizes", "4", "--h", "0.5", "--timing", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_csv(dir / "sre2_ising1d.csv")[0].back(), "runtime_s");
}

TEST(Cli, ThreadedSweepMatchesSerial) {
    const auto a = scratch("serial"), b = scratch("threaded");
    ASSERT_EQ(run({"measure", "--measure", "rec", "--sizes", "6,8", "--h", "0.5,1,1.5", "--out", a.string()}).code, 0);
    ASSERT_EQ(run({"measure", "--measure", "rec", "--sizes", "6,8", "--h", "0.5,1,1.5", "--threads", "3", "--out",
                   b.string()})
                  .code,
              0);
    EXPECT_EQ(slurp(a / "rec_ising1d.csv"), slurp(b / "rec_ising1d.csv"));
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
    const auto dir = scratch("config");
    const auto cfg = dir / "run.cfg";
    std::ofstream(cfg) << "[model]\nmodel = ising1d\nsizes = 4\nh = 0.5\n[tci]\nmeasure = rec\n[output]\nout = "
                       << (dir / "from_file").string() << "\n";
    auto r = run({"measure", "--config", cfg.string(), "--out", (dir / "from_flag").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "from_flag" / "rec_ising1d.csv"));
    EXPECT_FALSE(fs::exists(dir / "from_file"));

    std::ofstream(dir / "bad.cfg") << "wavelength = 3\n";
    EXPECT_EQ(run({"measure", "--config", (dir / "bad.cfg").string()}).code, 2);
    EXPECT_EQ(run({"measure", "--config", (dir / "missing.cfg").string()}).code, 2);
}

TEST(Cli, NoBuildAndCacheDirectory) {
    const auto dir = scratch("nobuild");
    auto r = run({"measure", "--sizes", "4", "--h", "0.5", "--no-build", "--out", dir.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("no ground state"), std::string::npos);

    const auto cache = dir / "elsewhere";
    ::setenv("QRES_CACHE_DIR", cache.c_str(), 1);
    r = run({"ground-state", "--sizes", "4", "--h", "0.5", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"measure", "--sizes", "4", "--h", "0.5", "--no-build", "--out", dir.string()});
    ::unsetenv("QRES_CACHE_DIR");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(fs::is_empty(cache));
}

TEST(Cli, VerifyPassesAndFails) {
    const auto dir = scratch("verify");
    auto r = run({"verify", "--sizes", "4,6", "--h", "0.5,2", "--out", dir.string()});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("max deviation"), std::string::npos);

    r = run({"verify", "--sizes", "6", "--h", "1", "--xi", "1", "--out", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("FAIL"), std::string::npos);

    r = run({"verify", "--sizes", "6", "--h", "0", "--solver", "ghz-analytic", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir / "verify_sre2_ising1d.csv");
    EXPECT_LE(std::stod(rows[1][5]), 1e-10);

    r = run({"verify", "--measure", "rec", "--model", "ising2d", "--sizes", "3x3", "--h", "1", "--out", dir.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(run({"verify", "--sizes", "10", "--out", dir.string()}).code, 2);
}

TEST(Cli, BenchTable) {
    const auto dir = scratch("bench");
    const auto r = run({"bench", "--measure", "rec", "--sizes", "16,32", "--h", "1", "--chi", "8", "--xi", "8",
                        "--out", dir.string()});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    const auto rows = read_csv(dir / "bench_rec_ising1d.csv");
    ASSERT_EQ(rows.size(), 1u + 2u + 5u);
    for (std::size_t k = 1; k < rows.size(); ++k)
        EXPECT_EQ(rows[k][7], "yes");
    const auto lat = read_csv(dir / "bench_rec_ising1d_latency.csv");
    ASSERT_EQ(lat.size(), 3u);
    EXPECT_EQ(lat[1][6], lat[2][6]);
    EXPECT_NE(r.out.find("n_calls ~ sites^"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"measure", "--model", "heisenberg"}).code, 2);
    EXPECT_EQ(run({"measure", "--frobnicate"}).code, 2);
    EXPECT_EQ(run({"measure", "--sizes", "3x3"}).code, 2);
    EXPECT_EQ(run({"measure", "--h", "abc"}).code, 2);
    EXPECT_EQ(run({"measure", "--help"}).code, 0);
}
