#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dscex/cesaro.hpp"
#include "dscex/errors.hpp"
#include "dscex/scenario.hpp"
#include "dscex/suites.hpp"

using namespace dscex;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr discarded and returns its exit code and stdout.
CliRun cli(const std::string& args) {
    const std::string cmd = std::string(DSCEX_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string scenario(const std::string& name) { return std::string(DSCEX_SCENARIO_DIR) + "/" + name + ".ini"; }

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::size_t error_line(std::string_view text) {
    try {
        (void)parse_scenario(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST(ParseScenario, Canonical) {
    Scenario sc = canonical_scenario();
    realize(sc);
    EXPECT_EQ(sc.name, "canonical");
    EXPECT_EQ(sc.t_min, 2u);
    EXPECT_EQ(sc.t_max, 8u);
    EXPECT_EQ(sc.z0_or_default(), ExactComplex(1));
    ASSERT_EQ(sc.starts.size(), 1u);
    EXPECT_EQ(sc.starts[0], (CellIndex{0, 1}));
    EXPECT_EQ(sc.factor_space().chain_count(), 1u);
    for (std::uint64_t n = 0; n < 30; ++n) {
        EXPECT_EQ(sc.factor_space().weight_exact({0, n}), 1);
        EXPECT_EQ(sc.v().exact_value({0, n}), ExactComplex(1));
    }
}

TEST(ParseScenario, FileMatchesBuiltIn) {
    Scenario file = load_scenario(scenario("canonical"));
    Scenario built = canonical_scenario();
    realize(file);
    realize(built);
    EXPECT_EQ(run_verify(file, "all").text(), run_verify(built, "all").text());
}

TEST(ParseScenario, DirectSpaceAndFunction) {
    Scenario sc = load_scenario(scenario("two_chains"));
    realize(sc);
    EXPECT_EQ(sc.seed, 7u);
    EXPECT_EQ(sc.factor_space().chain_count(), 2u);
    EXPECT_EQ(sc.factor_space().weight_exact({0, 5}), 4);
    EXPECT_EQ(sc.factor_space().weight_exact({1, 3}), 4);
    EXPECT_EQ(sc.v().exact_value({1, 0}), ExactComplex(1));
    EXPECT_EQ(sc.v().exact_value({1, 1}), ExactComplex(Rational(1, 2)));
    EXPECT_EQ(sc.v().exact_value({1, 9}), ExactComplex(Rational(3, 4), Rational(1, 4)));
    ASSERT_EQ(sc.starts.size(), 2u);
    EXPECT_EQ(sc.starts[0], (CellIndex{0, 1}));
    EXPECT_EQ(sc.starts[1], (CellIndex{1, 1}));
}

TEST(ParseScenario, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line("[cesaro]\nt_min = 5\nt_max = 4\n"), 3u);
    EXPECT_EQ(error_line("# c\n\n[nope]\n"), 3u);
    EXPECT_EQ(error_line("[scenario]\nname = a\ncolour = red\n"), 3u);
    EXPECT_EQ(error_line("[scenario]\nname\n"), 2u);
    EXPECT_EQ(error_line("name = a\n"), 1u);
    EXPECT_EQ(error_line("[scenario]\nname = a\nname = b\n"), 3u);
    EXPECT_EQ(error_line("[space]\nchains = 1\n[cesaro]\nstart = 3:1\n"), 4u);
    EXPECT_EQ(error_line("[cesaro]\nt_max = 39\n"), 2u);
    EXPECT_EQ(error_line("[cesaro]\nz0 = 0\n"), 2u);
    EXPECT_EQ(error_line("[space]\nchain = 0, 4, 2, constant, 1\n"), 2u);
    EXPECT_EQ(error_line("[cesaro]\nt_min = 4\n"), 0u);
    EXPECT_THROW((void)load_scenario("/nonexistent/scenario.ini"), ParseError);
}

TEST(Realize, InfeasibleConstructionThrows) {
    Scenario sc = load_scenario(scenario("no_motif"));
    EXPECT_THROW(realize(sc), NoZ0Found);
}

TEST(RunVerify, UnknownSuite) {
    Scenario sc = canonical_scenario();
    realize(sc);
    EXPECT_THROW((void)run_verify(sc, "everything"), InvalidArgument);
    for (const auto& s : suite_names()) {
        const SuiteReport r = run_verify(sc, s);
        EXPECT_EQ(r.failed(), 0u) << s;
        EXPECT_EQ(lines_of(r.text()).back(), r.summary_row());
    }
}

TEST(Cli, SimulateCanonical) {
    const CliRun r = cli("simulate");
    ASSERT_EQ(r.code, 0);
    const auto rows = lines_of(r.out);
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_EQ(rows[0], csv_header().substr(0, csv_header().size() - 1));
    EXPECT_EQ(rows[1].rfind("0,1,7,-0.714285714285714", 0), 0u) << rows[1];
    const CliRun exact = cli("simulate --exact");
    ASSERT_EQ(exact.code, 0);
    const auto exact_rows = lines_of(exact.out);
    EXPECT_EQ(exact_rows[1], "0,1,7,-5/7,0,-5/7");
    EXPECT_EQ(exact_rows[2], "0,1,25,13/25,0,13/25");
    EXPECT_EQ(exact_rows[3], "0,1,79,-41/79,0,-41/79");
}

TEST(Cli, SimulateGroupsRowsByChain) {
    const CliRun r = cli("simulate --scenario " + scenario("two_chains"));
    ASSERT_EQ(r.code, 0);
    const auto rows = lines_of(r.out);
    ASSERT_EQ(rows.size(), 1u + 2u * 8u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][0], i <= 8 ? '0' : '1') << rows[i];
}

TEST(Cli, SimulateWritesOneFilePerStart) {
    const fs::path dir = fs::temp_directory_path() / "dscex_test_simulate";
    fs::remove_all(dir);
    const CliRun r = cli("simulate --scenario " + scenario("two_chains") + " --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(dir / "cesaro.csv"));
    EXPECT_TRUE(fs::exists(dir / "cesaro_chain0_n1.csv"));
    EXPECT_TRUE(fs::exists(dir / "cesaro_chain1_n1.csv"));
    std::ifstream in(dir / "cesaro_chain1_n1.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "chain,n,N,re,im,re_over_z0");
    fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli("verify --suite theorem1").code, 0);
    EXPECT_EQ(cli("verify --scenario " + scenario("decreasing_weights")).code, 1);
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("verify --suite everything").code, 2);
    EXPECT_EQ(cli("simulate --scenario /nonexistent.ini").code, 2);
    EXPECT_EQ(cli("partition --scenario " + scenario("no_motif")).code, 3);

    const fs::path bad = fs::temp_directory_path() / "dscex_test_empty_range.ini";
    std::ofstream(bad) << "[cesaro]\nt_min = 6\nt_max = 5\n";
    EXPECT_EQ(cli("simulate --scenario " + bad.string()).code, 2);
    fs::remove(bad);
}

TEST(Cli, VerifyLastLineIsTheMachineRow) {
    const CliRun r = cli("verify --suite lemmas");
    ASSERT_EQ(r.code, 0);
    const std::string last = lines_of(r.out).back();
    EXPECT_EQ(last.rfind("lemmas,", 0), 0u) << last;
    EXPECT_EQ(last.substr(last.size() - 2), ",0");
}

TEST(Cli, VerifyIsIndependentOfThreadCount) {
    for (const char* name : {"canonical", "two_chains"}) {
        const CliRun one = cli("verify --scenario " + scenario(name) + " --threads 1");
        const CliRun eight = cli("verify --scenario " + scenario(name) + " --threads 8");
        EXPECT_EQ(one.code, 0);
        EXPECT_EQ(one.out, eight.out) << name;
    }
}

TEST(Cli, SeedOverrideIsDeterministic) {
    const CliRun a = cli("verify --suite norms --seed 11");
    const CliRun b = cli("verify --suite norms --seed 11 --threads 4");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, PartitionOfTheCanonicalScenario) {
    const CliRun r = cli("partition");
    ASSERT_EQ(r.code, 0);
    const auto rows = lines_of(r.out);
    ASSERT_GE(rows.size(), 4u);
    EXPECT_EQ(rows[0].rfind("# scan: z0 = 4/3", 0), 0u) << rows[0];
    EXPECT_NE(r.out.find("cell 0 measure=1 : [0,1)"), std::string::npos);
    EXPECT_EQ(cli("partition --scenario " + scenario("two_chains")).code, 2);
}

TEST(Cli, SigmaIterateAndNorm) {
    EXPECT_EQ(cli("sigma 2 7").out, "2,7,2,1\n");
    EXPECT_EQ(cli("sigma 0 1").out, "0,1,1,-1\n");
    EXPECT_EQ(cli("sigma 1").code, 2);
    EXPECT_EQ(cli("iterate 0 0 1").out, "-1,0\n");
    EXPECT_EQ(cli("iterate 0 1 1").out, "1,0\n");
    EXPECT_EQ(cli("iterate 0 2 1 --exact").out, "-1,0\n");
    EXPECT_EQ(cli("iterate 0 0 0").code, 2);
    EXPECT_EQ(cli("norm").out, "inf,1,1,1\n");
}
