#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "uwoc/cli.hpp"

namespace {

namespace fs = std::filesystem;
namespace cli = uwoc::cli;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "uwoc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("uwoc_cli_" + std::to_string(::getpid()))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path_ / name) << text;
        return (path_ / name).string();
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

const char* kOneLayer = R"({
  "layers": [{"a": 1.0, "d": 2.6, "p": 1.3}],
  "pointing": {"rho2": 1e6, "a0": 0.5},
  "budget": {"pt_dbm": 20, "sigma_w2": 1e-14, "alpha": 0.056, "length_m": 50},
  "modulation": "ook"
})";

}  // namespace

TEST(Format, ShortestRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0}) {
        const std::string s = cli::format_double(x);
        EXPECT_EQ(std::stod(s), x) << s;
    }
    EXPECT_EQ(cli::format_double(0.1), "0.1");
    EXPECT_EQ(cli::format_double(55.0), "55");
}

TEST(SweepArg, Parses) {
    cli::SweepSpec spec;
    cli::parse_sweep_arg("pt_dbm=-10:55:14", spec);
    EXPECT_EQ(spec.variable, cli::SweepVariable::pt_dbm);
    EXPECT_EQ(spec.points, 14);
    EXPECT_FALSE(spec.log_spaced);
    const auto v = spec.values();
    EXPECT_EQ(v.front(), -10.0);
    EXPECT_EQ(v.back(), 55.0);
    cli::parse_sweep_arg("gamma0_db=10:100:3:log", spec);
    EXPECT_EQ(spec.variable, cli::SweepVariable::gamma0_db);
    EXPECT_TRUE(spec.log_spaced);
    EXPECT_NEAR(spec.values()[1], std::sqrt(1000.0), 1e-12);
    EXPECT_THROW(cli::parse_sweep_arg("snr=1:2:3", spec), cli::UsageError);
    EXPECT_THROW(cli::parse_sweep_arg("pt_dbm=1:2", spec), cli::UsageError);
    EXPECT_THROW(cli::parse_sweep_arg("pt_dbm=1:x:3", spec), cli::UsageError);
    EXPECT_THROW(cli::parse_sweep_arg("pt_dbm=1:2:3:lin", spec), cli::UsageError);
}

TEST(Sweep, TwoPointCapacityCsv) {
    const auto r = run({"sweep", "--scenario", "table1.json", "--sweep", "pt_dbm=0:50:2", "--metrics", "capacity",
                        "--samples", "2000"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 3u);
    EXPECT_EQ(ls[0], "sweep_value,gamma0_db,capacity_exact,capacity_asymptotic,capacity_mc,capacity_mc_stderr,error");
    for (std::size_t i = 1; i < 3; ++i) {
        const auto f = fields(ls[i]);
        ASSERT_EQ(f.size(), 7u) << ls[i];
        EXPECT_FALSE(f[2].empty());
        EXPECT_TRUE(f[3].empty());
        EXPECT_FALSE(f[4].empty());
        EXPECT_TRUE(f[6].empty());
    }
    EXPECT_EQ(fields(ls[1])[0], "0");
    EXPECT_EQ(fields(ls[2])[0], "50");
}

TEST(Sweep, ExactAndMcAgree) {
    const auto r = run({"sweep", "--scenario", "table1.json", "--sweep", "pt_dbm=-10:55:6", "--metrics", "outage",
                        "--modes", "exact,mc", "--gamma-th", "1", "--samples", "200000", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 7u);
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto f = fields(ls[i]);
        const double exact = std::stod(f[2]), mc = std::stod(f[4]), se = std::stod(f[5]);
        EXPECT_TRUE(f[3].empty());
        if (exact > 1e-4) {
            EXPECT_NEAR(mc, exact, 3.0 * se) << ls[i];
        }
    }
}

TEST(Sweep, DeterministicBytes) {
    TempDir dir;
    const std::vector<std::string> base{"sweep", "--scenario", "table1_rho2_6.json", "--sweep", "gamma0_db=40:120:4",
                                        "--gamma-th", "2", "--samples", "5000", "--seed", "17"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", dir.file("a.csv")});
    b.insert(b.end(), {"--out", dir.file("b.csv"), "--threads", "3"});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    const std::string ca = slurp(dir.file("a.csv"));
    EXPECT_FALSE(ca.empty());
    EXPECT_EQ(ca, slurp(dir.file("b.csv")));
}

TEST(Sweep, HeterodyneRecordsUnsupportedCells) {
    const auto r = run({"sweep", "--scenario", "table1.json", "--detection", "hd", "--sweep", "pt_dbm=0:10:2",
                        "--metrics", "ber,outage", "--gamma-th", "1", "--samples", "2000"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 3u);
    const auto f = fields(ls[1]);
    EXPECT_FALSE(f[2].empty());  // outage_exact
    EXPECT_TRUE(f[6].empty());   // ber_exact
    EXPECT_FALSE(f[8].empty());  // ber_mc
    EXPECT_NE(ls[1].find("ber_exact: "), std::string::npos);
    EXPECT_EQ(ls[1].find("ber_exact: ber_exact"), std::string::npos);
    EXPECT_NE(r.err.find("(extension)"), std::string::npos);
}

TEST(Sweep, PoleCollisionLeavesAsymptoticCellEmpty) {
    const auto r = run({"sweep", "--scenario", "table1.json", "--rho2", "1.178", "--sweep", "pt_dbm=30:40:2",
                        "--metrics", "outage", "--modes", "exact,asymptotic", "--gamma-th", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto f = fields(lines(r.out)[1]);
    EXPECT_FALSE(f[2].empty());
    EXPECT_TRUE(f[3].empty());
    EXPECT_NE(lines(r.out)[1].find("pole collision"), std::string::npos);
}

TEST(Errors, ExitCodes) {
    TempDir dir;
    std::string bad_p = kOneLayer;
    bad_p.replace(bad_p.find("\"p\": 1.3"), 8, "\"p\": 0");
    const auto v = run({"sweep", "--scenario", dir.write("bad_p.json", bad_p), "--sweep", "pt_dbm=0:1:2", "--metrics",
                        "capacity"});
    EXPECT_EQ(v.code, cli::kValidation);
    EXPECT_NE(v.err.find("layers[0].p"), std::string::npos) << v.err;

    const auto p = run({"validate", "--scenario", dir.write("broken.json", "{\n  \"layers\": [\n  oops\n}")});
    EXPECT_EQ(p.code, cli::kParse);
    EXPECT_NE(p.err.find("line 3"), std::string::npos) << p.err;

    const auto unknown = run({"validate", "--scenario", dir.write("unknown.json", R"({"layers": [], "colour": 1})")});
    EXPECT_EQ(unknown.code, cli::kParse);
    EXPECT_NE(unknown.err.find("colour"), std::string::npos);

    std::string empty = kOneLayer;
    empty.replace(empty.find("[{"), empty.find("}]") + 2 - empty.find("[{"), "[]");
    const auto e = run({"validate", "--scenario", dir.write("empty.json", empty)});
    EXPECT_EQ(e.code, cli::kValidation);
    EXPECT_NE(e.err.find("layers"), std::string::npos);

    EXPECT_EQ(run({"sweep", "--scenario", "table1.json", "--sweep", "pt_dbm=0:1:2"}).code, cli::kUsage);  // no --gamma-th
    EXPECT_EQ(run({"sweep", "--scenario", "table1.json", "--sweep", "pt_dbm=5:1:2", "--metrics", "capacity"}).code,
              cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(run({"validate", "--scenario", dir.file("missing.json")}).code, cli::kIo);
    EXPECT_EQ(run({"sweep", "--scenario", "table1.json", "--sweep", "pt_dbm=0:1:2", "--metrics", "capacity", "--modes",
                   "exact", "--out", (dir.path() / "no" / "such" / "dir.csv").string()})
                  .code,
              cli::kIo);
}

TEST(Scenarios, EnvironmentDirectory) {
    TempDir dir;
    dir.write("one_layer.json", kOneLayer);
    ::setenv("UWOC_SCENARIO_DIR", dir.path().c_str(), 1);
    const auto r = run({"diversity", "--scenario", "one_layer.json"});
    ::unsetenv("UWOC_SCENARIO_DIR");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("pole dominance, min of d_i/e and rho2/e): 1.3\n"), std::string::npos) << r.out;
}

TEST(Diversity, Table1Readings) {
    const auto r1 = run({"diversity", "--scenario", "table1.json"});
    ASSERT_EQ(r1.code, 0) << r1.err;
    EXPECT_NE(r1.out.find("rho2/e): 0.5\n"), std::string::npos);
    EXPECT_NE(r1.out.find("min(d_i, rho2)/e: 2.5\n"), std::string::npos);
    EXPECT_NE(r1.out.find("min(sum_i d_i, rho2)/e: 0.5\n"), std::string::npos);
    const auto r6 = run({"diversity", "--scenario", "table1.json", "--rho2", "6"});
    EXPECT_NE(r6.out.find("rho2/e): 0.589\n"), std::string::npos);
    EXPECT_NE(r6.out.find("min(sum_i d_i, rho2)/e: 3\n"), std::string::npos);
    EXPECT_NE(r6.out.find("measured outage slope"), std::string::npos);
}

TEST(Validate, PoleCollisionSkipsAsymptoticChecks) {
    const auto r = run({"validate", "--scenario", "table1.json", "--rho2", "1.178"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("SKIP  outage asymptote  (pole collision"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("SKIP  ber asymptote  (pole collision"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS  outage exact vs Monte Carlo"), std::string::npos) << r.out;
}

#ifdef UWOC_CLI_BINARY
TEST(Binary, ExitCodeAndOutput) {
    TempDir dir;
    const std::string cmd = std::string(UWOC_CLI_BINARY) + " sweep --scenario table1.json --sweep pt_dbm=0:10:2 " +
                            "--metrics capacity --modes exact --out " + dir.file("bin.csv");
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_EQ(lines(slurp(dir.file("bin.csv"))).size(), 3u);
    const std::string bad = std::string(UWOC_CLI_BINARY) + " sweep --scenario table1.json --sweep pt_dbm=0:10:2 2>/dev/null";
    const int status = std::system(bad.c_str());
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), cli::kUsage);
}
#endif
