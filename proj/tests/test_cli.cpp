#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace so3sync;
using namespace so3sync::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "so3sync");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
    return out;
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("so3sync_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string str(const std::string& sub = "") const { return (sub.empty() ? path_ : path_ / sub).string(); }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

std::string scen(const char* name) { return scenario_path(name).string(); }

}  // namespace

TEST(Format, SeventeenSignificantDigits) {
    EXPECT_EQ(cli::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(cli::format_double(1.0), "1");
    EXPECT_EQ(cli::format_double(-2.5e-12), "-2.4999999999999998e-12");
    Gen g(71);
    for (int i = 0; i < 1000; ++i) {
        const double v = g.uniform(-1e3, 1e3) * std::pow(10.0, g.integer(-20, 20));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        EXPECT_EQ(cli::format_double(v), buf);
        EXPECT_EQ(std::stod(cli::format_double(v)), v);
    }
}

TEST(Format, WriteAtomicLeavesNoTempFile) {
    TempDir dir;
    cli::write_atomic(dir.path() / "a.txt", "hello\n");
    cli::write_atomic(dir.path() / "a.txt", "again\n");
    EXPECT_EQ(slurp(dir.path() / "a.txt"), "again\n");
    int files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++files;
    EXPECT_EQ(files, 1);
}

TEST(Seed, FlagThenEnvironmentThenDefault) {
    ::unsetenv("SO3SYNC_SEED");
    EXPECT_EQ(cli::resolve_seed(""), 1u);
    ::setenv("SO3SYNC_SEED", "42", 1);
    EXPECT_EQ(cli::resolve_seed(""), 42u);
    EXPECT_EQ(cli::resolve_seed("9"), 9u);
    ::unsetenv("SO3SYNC_SEED");
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<int> hits(97, 0);
    cli::parallel_for(97, 4, [&](int i) { ++hits[static_cast<std::size_t>(i)]; });
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Simulate, WritesOutputsAndConverges) {
    TempDir dir;
    const Result r = run_cli({"simulate", "--scenario", scen("fig1.scenario"), "--tf", "30", "--dt", "0.001", "--out", dir.str()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"trajectory.csv", "edge_velocities.csv", "plot_trajectory.py", "summary.json"}) {
        EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
    }
    const json summary = json::parse(slurp(dir.path() / "summary.json"));
    EXPECT_TRUE(summary["converged"].get<bool>());
    EXPECT_EQ(summary["exit_status"].get<int>(), 0);
    for (double e : summary["final_leader_errors"].get<std::vector<double>>()) EXPECT_LT(e, 1e-3);
    for (double e : summary["final_velocity_norms"].get<std::vector<double>>()) EXPECT_LT(e, 1e-3);

    const auto rows = lines(slurp(dir.path() / "trajectory.csv"));
    ASSERT_EQ(rows.size(), 1u + 3001u);
    const auto header = split(rows[0]);
    std::vector<std::string> expected = {"t", "V"};
    for (int i = 1; i <= 7; ++i) expected.push_back("|R0'R" + std::to_string(i) + "|_I");
    for (int k = 1; k <= 6; ++k) expected.push_back("edge" + std::to_string(k) + "_err");
    for (int i = 1; i <= 7; ++i) {
        for (const char* c : {"x", "y", "z"}) expected.push_back("w" + std::to_string(i) + c);
    }
    EXPECT_EQ(header, expected);
    EXPECT_EQ(split(rows[1]).size(), expected.size());
    EXPECT_NEAR(std::stod(split(rows.back())[0]), 30.0, 1e-9);

    const auto vel = lines(slurp(dir.path() / "edge_velocities.csv"));
    EXPECT_EQ(vel.size(), rows.size());
    EXPECT_EQ(split(vel[0]).size(), 7u);
}

TEST(Simulate, ZeroHorizonGivesSingleSample) {
    TempDir dir;
    const Result r = run_cli({"simulate", "--scenario", scen("fig1.scenario"), "--tf", "0", "--out", dir.str()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(slurp(dir.path() / "trajectory.csv")).size(), 2u);
}

TEST(Simulate, Determinism) {
    TempDir a, b;
    ASSERT_EQ(run_cli({"simulate", "--scenario", scen("chain3.scenario"), "--tf", "2", "--out", a.str()}).code, 0);
    ASSERT_EQ(run_cli({"simulate", "--scenario", scen("chain3.scenario"), "--tf", "2", "--out", b.str()}).code, 0);
    EXPECT_EQ(slurp(a.path() / "trajectory.csv"), slurp(b.path() / "trajectory.csv"));
}

TEST(Simulate, InputErrors) {
    TempDir dir;
    const Result missing = run_cli({"simulate", "--scenario", "/nonexistent/x.scenario", "--out", dir.str()});
    EXPECT_EQ(missing.code, 2);
    EXPECT_FALSE(missing.err.empty());

    const fs::path bad = dir.path() / "bad.scenario";
    std::ofstream(bad) << "{\n  \"agents\": [,\n";
    const Result parse = run_cli({"simulate", "--scenario", bad.string(), "--out", dir.str()});
    EXPECT_EQ(parse.code, 2);
    EXPECT_NE(parse.err.find("2"), std::string::npos) << parse.err;

    EXPECT_EQ(run_cli({"simulate", "--scenario", scen("fig1.scenario"), "--dt", "0.5", "--out", dir.str()}).code, 2);
    EXPECT_EQ(run_cli({"simulate"}).code, 2);
    EXPECT_EQ(run_cli({"bogus"}).code, 2);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Equilibria, ExhaustiveChain) {
    TempDir dir;
    const Result r = run_cli({"equilibria", "--scenario", scen("chain3.scenario"), "--exhaustive", "--out", dir.str()});
    ASSERT_EQ(r.code, 0) << r.err << r.out;
    const auto rows = lines(slurp(dir.path() / "equilibria.csv"));
    ASSERT_EQ(rows.size(), 64u);
    const auto header = split(rows[0]);
    const std::vector<std::string> expected = {"code",          "pi_set",       "axes",     "desired",
                                               "max_re",        "min_abs",      "has_zero", "has_imaginary",
                                               "unstable",      "hessian_indefinite", "hessian_block_err",
                                               "jacobian_fd_err"};
    EXPECT_EQ(header, expected);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = split(rows[i]);
        ASSERT_EQ(f.size(), expected.size());
        EXPECT_EQ(f[3], "0");
        EXPECT_GT(std::stod(f[4]), 1e-7);
        EXPECT_GT(std::stod(f[5]), 1e-7);
        EXPECT_EQ(f[6], "0");
        EXPECT_EQ(f[7], "0");
        EXPECT_EQ(f[8], "1");
        EXPECT_LE(std::stod(f[11]), 1e-5);
    }
}

TEST(Equilibria, SampledAndDeterministic) {
    TempDir a, b;
    const std::vector<std::string> base = {"equilibria", "--scenario", scen("fig1.scenario"), "--sample", "200", "--seed", "7"};
    auto args_a = base;
    args_a.insert(args_a.end(), {"--out", a.str()});
    auto args_b = base;
    args_b.insert(args_b.end(), {"--out", b.str(), "--jobs", "3"});
    ASSERT_EQ(run_cli(args_a).code, 0);
    ASSERT_EQ(run_cli(args_b).code, 0);
    const std::string csv = slurp(a.path() / "equilibria.csv");
    EXPECT_EQ(lines(csv).size(), 201u);
    EXPECT_EQ(csv, slurp(b.path() / "equilibria.csv"));
}

TEST(Equilibria, SeedFromEnvironment) {
    TempDir a, b;
    ::setenv("SO3SYNC_SEED", "7", 1);
    ASSERT_EQ(run_cli({"equilibria", "--scenario", scen("fig1.scenario"), "--sample", "20", "--out", a.str()}).code, 0);
    ::unsetenv("SO3SYNC_SEED");
    ASSERT_EQ(
        run_cli({"equilibria", "--scenario", scen("fig1.scenario"), "--sample", "20", "--seed", "7", "--out", b.str()}).code,
        0);
    EXPECT_EQ(slurp(a.path() / "equilibria.csv"), slurp(b.path() / "equilibria.csv"));
}

TEST(Equilibria, IncludeDesiredAddsStableRow) {
    TempDir dir;
    ASSERT_EQ(run_cli({"equilibria", "--scenario", scen("chain2.scenario"), "--exhaustive", "--include-desired", "--out",
                       dir.str()})
                  .code,
              0);
    const auto rows = lines(slurp(dir.path() / "equilibria.csv"));
    ASSERT_EQ(rows.size(), 1u + 15u + 1u);
    int desired = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = split(rows[i]);
        if (f[3] == "1") {
            ++desired;
            EXPECT_LT(std::stod(f[4]), 0.0);
        }
    }
    EXPECT_EQ(desired, 1);
}

TEST(Equilibria, RejectsEmptySample) {
    TempDir dir;
    EXPECT_EQ(run_cli({"equilibria", "--scenario", scen("fig1.scenario"), "--sample", "0", "--out", dir.str()}).code, 2);
}

TEST(Fuzz, Suites) {
    const Result l = run_cli({"fuzz", "--suite", "lemma1", "--trials", "200", "--seed", "1"});
    EXPECT_EQ(l.code, 0) << l.out;
    EXPECT_NE(l.out.find("200/200"), std::string::npos) << l.out;

    const Result i = run_cli({"fuzz", "--suite", "identities", "--trials", "1000", "--jobs", "2"});
    EXPECT_EQ(i.code, 0) << i.out;
    EXPECT_NE(i.out.find("1000/1000"), std::string::npos) << i.out;

    const Result y = run_cli({"fuzz", "--suite", "lyapunov", "--trials", "20"});
    EXPECT_EQ(y.code, 0) << y.out;
    EXPECT_NE(y.out.find("20/20"), std::string::npos) << y.out;

    EXPECT_EQ(run_cli({"fuzz", "--suite", "other"}).code, 2);
}

TEST(Fuzz, ResultsIndependentOfJobs) {
    const cli::FuzzResult a = cli::fuzz_identities(300, 5, 1);
    const cli::FuzzResult b = cli::fuzz_identities(300, 5, 4);
    EXPECT_EQ(a.passed, 300);
    EXPECT_EQ(a.worst, b.worst);
    EXPECT_EQ(a.worst_label, b.worst_label);
    EXPECT_LT(a.worst, 1e-12);

    const cli::FuzzResult c = cli::fuzz_lemma1(50, 5, 1);
    const cli::FuzzResult d = cli::fuzz_lemma1(50, 5, 3);
    EXPECT_EQ(c.worst, d.worst);
    EXPECT_GT(c.worst, 1e-8);
}

TEST(Linearize, ReportsSpectrum) {
    TempDir dir;
    const Result d = run_cli({"linearize", "--scenario", scen("fig1.scenario"), "--out", dir.str("m.csv")});
    ASSERT_EQ(d.code, 0) << d.err;
    const json rep = json::parse(d.out);
    EXPECT_TRUE(rep["desired"].get<bool>());
    EXPECT_LT(rep["max_re"].get<double>(), 0.0);
    EXPECT_EQ(rep["eigenvalues"].size(), 42u);
    const auto rows = lines(slurp(dir.path() / "m.csv"));
    ASSERT_EQ(rows.size(), 42u);
    EXPECT_EQ(split(rows[0]).size(), 42u);

    const Result u = run_cli({"linearize", "--scenario", scen("chain3.scenario"), "--slots", "1,0,3"});
    ASSERT_EQ(u.code, 0) << u.err;
    const json ur = json::parse(u.out);
    EXPECT_TRUE(ur["unstable"].get<bool>());
    EXPECT_FALSE(ur["has_imaginary"].get<bool>());
    EXPECT_EQ(ur["label"].get<std::string>(), "0:1 2:3");

    EXPECT_EQ(run_cli({"linearize", "--scenario", scen("chain3.scenario"), "--slots", "1,0"}).code, 2);
    EXPECT_EQ(run_cli({"linearize", "--scenario", scen("chain3.scenario"), "--slots", "1,0,4"}).code, 2);
}
