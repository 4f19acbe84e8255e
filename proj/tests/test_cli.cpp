#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "bsshift/commands.hpp"
#include "oracles.hpp"

using namespace bsshift;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bsshift_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Csv {
    std::vector<std::string> comments;
    std::string header;
    std::vector<std::vector<std::string>> rows;
};

Csv parse_csv(const std::string& text) {
    Csv c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) {
            c.comments.push_back(line);
        } else if (c.header.empty()) {
            c.header = line;
        } else {
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) f.push_back(cell);
            c.rows.push_back(f);
        }
    }
    return c;
}

CommandContext quiet(RunConfig cfg, std::ostream& report, std::ostream& log) {
    CommandContext ctx;
    ctx.config = std::move(cfg);
    ctx.report = &report;
    ctx.log = &log;
    return ctx;
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(BSSHIFT_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, RoundTripIsLossless) {
    RunConfig c;
    c.params = {11.0, 0.7, 0.1 + 0.2, 61.25};
    c.n_max = 123;
    c.n_mean = 1.0 / 3.0 + 50;
    c.g_min = 1e-3;
    c.g_max = 0.9;
    c.g_steps = 7;
    c.k_list = {6, 9};
    c.tolerances = {1e-9, 3e-10, 1e-13};
    c.output_dir = "some/dir";
    c.cache = false;
    c.points_per_wavelength = 9.5;
    c.scan_points = 51;
    EXPECT_EQ(parse_config(serialize_config(c)), c);
    EXPECT_EQ(serialize_config(parse_config(serialize_config(c))), serialize_config(c));
}

TEST(Config, CommentsBlankLinesAndDefaults) {
    const RunConfig c = parse_config("# run\n\n delta_e = 13 # bigger\nk_list=6, 7\n");
    EXPECT_EQ(c.params.delta_e, 13.0);
    EXPECT_EQ(c.k_list, (std::vector<int>{6, 7}));
    EXPECT_EQ(c.n_max, RunConfig{}.n_max);
    EXPECT_TRUE(parse_config("k_list=\n").k_list.empty());
}

TEST(Config, Rejections) {
    EXPECT_THROW((void)parse_config("nonsense=1\n"), ConfigError);
    EXPECT_THROW((void)parse_config("delta_e\n"), ConfigError);
    EXPECT_THROW((void)parse_config("n_max=1.5\n"), ConfigError);
    EXPECT_THROW((void)parse_config("g_min=2\ng_max=1\n"), ConfigError);
    EXPECT_THROW((void)parse_config("g_steps=1\n"), ConfigError);
    EXPECT_THROW((void)parse_config("quad_tol=0\n"), ConfigError);
    EXPECT_THROW((void)parse_config("delta_e=-1\n"), ConfigError);
    EXPECT_THROW((void)parse_config("cache=maybe\n"), ConfigError);
}

TEST(Cache, StoreLoadAndKeying) {
    const fs::path dir = scratch("cache");
    const SpectrumCache cache(dir);
    EXPECT_NE(SpectrumCache::key(11, 0.1, 10, 0), SpectrumCache::key(11, std::nextafter(0.1, 1.0), 10, 0));
    EXPECT_NE(SpectrumCache::key(11, 0.1, 10, 1), SpectrumCache::key(11, 0.1, 10, -1));
    const std::string key = SpectrumCache::key(11, 0.1, 10, 0);
    EXPECT_FALSE(cache.load(key).has_value());
    const Eigen::VectorXd e = Eigen::VectorXd::LinSpaced(5, -2.0, 2.0);
    cache.store(key, e, {1, -1, 1, -1, 1});
    const auto hit = cache.load(key);
    ASSERT_TRUE(hit.has_value());
    EXPECT_EQ(hit->eigenvalues, e);
    fs::remove_all(dir);
}

TEST(CsvFormat, SeventeenDigits) {
    EXPECT_EQ(csv_double(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(csv_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Sweep, RowCountLadderAndDeterminism) {
    const fs::path dir = scratch("sweep");
    RunConfig c;
    c.n_max = 10;
    c.g_steps = 2;
    c.output_dir = dir.string();
    std::ostringstream r, l;
    ASSERT_EQ(cmd_spectrum_sweep(quiet(c, r, l)), exit_ok);
    const std::string first = slurp(dir / "spectrum_sweep.csv");
    const Csv csv = parse_csv(first);
    EXPECT_EQ(csv.header, "g,index,energy,parity");
    ASSERT_EQ(csv.rows.size(), 2u * 2u * 11u);
    EXPECT_EQ(first.find('\r'), std::string::npos);
    EXPECT_NE(first.find("# bsshift "), std::string::npos);
    EXPECT_NE(first.find("# n_max=10"), std::string::npos);

    std::vector<double> ladder;
    for (int n = 0; n <= 10; ++n) {
        ladder.push_back(n - 5.5);
        ladder.push_back(n + 5.5);
    }
    std::sort(ladder.begin(), ladder.end());
    for (std::size_t i = 0; i < 22; ++i) {
        EXPECT_EQ(std::stod(csv.rows[i][0]), 0.0);
        EXPECT_NEAR(std::stod(csv.rows[i][2]), ladder[i], 1e-12 * std::abs(ladder[i]));
    }
    EXPECT_FALSE(fs::is_empty(dir / "cache"));

    // second run is served from the cache
    ASSERT_EQ(cmd_spectrum_sweep(quiet(c, r, l)), exit_ok);
    EXPECT_EQ(slurp(dir / "spectrum_sweep.csv"), first);
    c.cache = false;
    ASSERT_EQ(cmd_spectrum_sweep(quiet(c, r, l)), exit_ok);
    const std::string nocache = slurp(dir / "spectrum_sweep.csv");
    EXPECT_EQ(nocache.substr(nocache.find("g,index")), first.substr(first.find("g,index")));
    fs::remove_all(dir);
}

TEST(Sweep, ThreadedOutputMatchesSerial) {
    const fs::path dir = scratch("sweep_threads");
    RunConfig c;
    c.n_max = 30;
    c.g_steps = 9;
    c.cache = false;
    c.output_dir = dir.string();
    std::ostringstream r, l;
    auto ctx = quiet(c, r, l);
    ASSERT_EQ(cmd_spectrum_sweep(ctx), exit_ok);
    const std::string serial = slurp(dir / "spectrum_sweep.csv");
    ctx.threads = 4;
    ASSERT_EQ(cmd_spectrum_sweep(ctx), exit_ok);
    EXPECT_EQ(slurp(dir / "spectrum_sweep.csv"), serial);
    fs::remove_all(dir);
}

TEST(Sweep, UnconvergedRowsAreFlagged) {
    const fs::path dir = scratch("sweep_flag");
    RunConfig c;
    c.n_max = 10;
    c.g_steps = 2;
    c.cache = false;
    c.tolerances.eigensolve = 1e-300;  // unattainable: every row is flagged
    c.output_dir = dir.string();
    std::ostringstream r, l;
    EXPECT_EQ(cmd_spectrum_sweep(quiet(c, r, l)), exit_partial);
    const Csv csv = parse_csv(slurp(dir / "spectrum_sweep.csv"));
    ASSERT_FALSE(csv.rows.empty());
    EXPECT_EQ(csv.rows.back()[2], "nan");  // g = 0 is diagonal and solves exactly
    fs::remove_all(dir);
}

TEST(Fig1, EmptyKListGivesHeaderOnly) {
    const fs::path dir = scratch("fig1_empty");
    RunConfig c;
    c.k_list = {};
    c.output_dir = dir.string();
    std::ostringstream r, l;
    ASSERT_EQ(cmd_fig1(quiet(c, r, l)), exit_ok);
    const Csv csv = parse_csv(slurp(dir / "fig1.csv"));
    EXPECT_EQ(csv.header, "two_k_plus_one,g0,gap_exact,gap_shirley");
    EXPECT_TRUE(csv.rows.empty());
    EXPECT_FALSE(csv.comments.empty());
    fs::remove_all(dir);
}

TEST(Fig1, ShirleyColumnReproducibleFromG0) {
    const fs::path dir = scratch("fig1");
    RunConfig c;
    c.k_list = {6};
    c.output_dir = dir.string();
    std::ostringstream r, l;
    ASSERT_EQ(cmd_fig1(quiet(c, r, l)), exit_ok);
    const Csv csv = parse_csv(slurp(dir / "fig1.csv"));
    ASSERT_EQ(csv.rows.size(), 1u);
    EXPECT_EQ(csv.rows[0][0], "13");
    const double g0 = std::stod(csv.rows[0][1]);
    EXPECT_NEAR(std::stod(csv.rows[0][3]) / oracle::shirley_direct(6, g0, 11.0), 1.0, 1e-12);
    fs::remove_all(dir);
}

TEST(Fig2, ZeroCouplingRowHasZeroGaps) {
    const fs::path dir = scratch("fig2_zero");
    RunConfig c;
    c.k_list = {5};  // 11 quanta = bare splitting: resonant at U = 0
    c.output_dir = dir.string();
    std::ostringstream r, l;
    ASSERT_EQ(cmd_fig2(quiet(c, r, l)), exit_ok);
    const Csv csv = parse_csv(slurp(dir / "fig2.csv"));
    ASSERT_EQ(csv.rows.size(), 1u);
    EXPECT_EQ(std::stod(csv.rows[0][1]), 0.0);
    EXPECT_EQ(std::stod(csv.rows[0][2]), 0.0);
    EXPECT_EQ(std::stod(csv.rows[0][3]), 0.0);
    fs::remove_all(dir);
}

TEST(Resonance, ColumnsAndWavefunctionDump) {
    const fs::path dir = scratch("resonance");
    RunConfig c;
    c.k_list = {6};
    c.output_dir = dir.string();
    std::ostringstream r, l;
    auto ctx = quiet(c, r, l);
    ctx.dump_wavefunctions = true;
    ASSERT_EQ(cmd_resonance(ctx), exit_ok);
    const Csv csv = parse_csv(slurp(dir / "resonance.csv"));
    EXPECT_EQ(csv.header, "k,two_k_plus_one,g0,gap_exact,gap_shirley,gap_pt,n_mean,n_max,residual");
    ASSERT_EQ(csv.rows.size(), 1u);
    EXPECT_EQ(csv.rows[0][0], "6");
    EXPECT_EQ(csv.rows[0][7], "200");
    EXPECT_LE(std::stod(csv.rows[0][8]), 1e-8);
    EXPECT_TRUE(fs::exists(dir / "wavefunction_q13_n54_mup.csv"));
    EXPECT_TRUE(fs::exists(dir / "wavefunction_q13_n67_mdown.csv"));
    EXPECT_EQ(slurp(dir / "wavefunction_q13_n54_mup.csv").rfind("y,u\n", 0), 0u);
    fs::remove_all(dir);
}

TEST(Verify, ZeroCouplingConfigPasses) {
    RunConfig c;
    c.k_list = {6};
    std::ostringstream r, l;
    EXPECT_EQ(cmd_verify(quiet(c, r, l)), exit_ok) << r.str() << l.str();
    EXPECT_NE(r.str().find("all suites passed"), std::string::npos);
    EXPECT_EQ(r.str().find("FAIL"), std::string::npos);
}

TEST(Verify, TinyBasisFailsWithActionableMessage) {
    RunConfig c;
    c.n_max = 6;
    std::ostringstream r, l;
    EXPECT_EQ(cmd_verify(quiet(c, r, l)), exit_invariant_failure);
    EXPECT_NE(r.str().find("FAIL truncation"), std::string::npos);
    EXPECT_NE(r.str().find("increase n_max"), std::string::npos);
}

TEST(Converge, ReportsRelativeChanges) {
    const fs::path dir = scratch("converge");
    RunConfig c;
    c.k_list = {6};
    c.output_dir = dir.string();
    std::ostringstream r, l;
    ASSERT_EQ(cmd_converge(quiet(c, r, l)), exit_ok);
    const Csv csv = parse_csv(slurp(dir / "converge.csv"));
    ASSERT_EQ(csv.rows.size(), 1u);
    EXPECT_LT(std::stod(csv.rows[0][5]), 0.01);   // n_max -> 1.5 n_max
    EXPECT_LT(std::stod(csv.rows[0][10]), 1e-6);  // grid step halved
    fs::remove_all(dir);
}

TEST(Binary, ExitCodes) {
    const fs::path dir = scratch("binary");
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli(""), exit_config_error);
    EXPECT_EQ(run_cli("frobnicate"), exit_config_error);
    {
        std::ofstream(dir / "bad.cfg") << "mystery_key=3\n";
        std::ofstream(dir / "range.cfg") << "g_min=2\ng_max=1\n";
    }
    EXPECT_EQ(run_cli("--config " + (dir / "bad.cfg").string() + " sweep"), exit_config_error);
    EXPECT_EQ(run_cli("--config " + (dir / "range.cfg").string() + " sweep"), exit_config_error);
    {
        std::ofstream(dir / "small.cfg") << "n_max=10\ng_steps=2\ncache=off\n";
    }
    EXPECT_EQ(run_cli("--config " + (dir / "small.cfg").string() + " --out " + (dir / "out").string() + " --threads 2 sweep"),
              exit_ok);
    EXPECT_TRUE(fs::exists(dir / "out" / "spectrum_sweep.csv"));
    // a regular file where the output directory should be
    std::ofstream(dir / "blocker") << "x";
    EXPECT_EQ(run_cli("--config " + (dir / "small.cfg").string() + " --out " + (dir / "blocker").string() + " sweep"),
              exit_invariant_failure);
    fs::remove_all(dir);
}
