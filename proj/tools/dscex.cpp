// dscex: scenario-driven front end for the counterexample operator.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or configuration
// error, 3 construction infeasible.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "dscex/cesaro.hpp"
#include "dscex/errors.hpp"
#include "dscex/norms.hpp"
#include "dscex/operator.hpp"
#include "dscex/parallel.hpp"
#include "dscex/residuality.hpp"
#include "dscex/scenario.hpp"
#include "dscex/suites.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kInfeasible = 3 };

struct Options {
    std::string scenario;
    std::string out;
    std::string suite = "all";
    bool exact = false;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
};

unsigned worker_count(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

dscex::Scenario load(const Options& opt) {
    dscex::Scenario sc = opt.scenario.empty() ? dscex::canonical_scenario() : dscex::load_scenario(opt.scenario);
    if (opt.seed) sc.seed = *opt.seed;
    if (opt.exact) sc.exact = true;
    dscex::realize(sc);
    return sc;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw dscex::InvalidArgument("cannot write '" + path.string() + "'");
    f << text;
}

int run_simulate(const Options& opt) {
    const dscex::Scenario sc = load(opt);
    const auto z0 = sc.z0_or_default();
    const auto reports = dscex::parallel_map(sc.starts.size(), worker_count(opt.threads), [&](std::size_t i) {
        return dscex::cesaro_report(sc.v(), sc.starts[i], sc.t_min, sc.t_max, z0, sc.exact);
    });
    std::string combined = dscex::csv_header();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string rows = dscex::csv_rows(reports[i]);
        combined += rows;
        if (!opt.out.empty()) {
            const auto& s = sc.starts[i];
            write_file(fs::path(opt.out) / ("cesaro_chain" + std::to_string(s.chain) + "_n" + std::to_string(s.n) + ".csv"),
                       dscex::csv_header() + rows);
        }
    }
    if (opt.out.empty()) {
        std::cout << combined;
    } else {
        write_file(fs::path(opt.out) / "cesaro.csv", combined);
        std::cout << "wrote " << reports.size() << " series to " << opt.out << '\n';
    }
    return kOk;
}

int run_verify(const Options& opt) {
    const dscex::Scenario sc = load(opt);
    const dscex::SuiteReport report = dscex::run_verify(sc, opt.suite, worker_count(opt.threads));
    const std::string text = report.text();
    std::cout << text;
    if (!opt.out.empty()) write_file(fs::path(opt.out) / ("verify_" + opt.suite + ".txt"), text);
    return report.failed() == 0 ? kOk : kVerifyFailed;
}

int run_partition(const Options& opt) {
    const dscex::Scenario sc = load(opt);
    if (!sc.partition) throw dscex::InvalidArgument("the partition subcommand needs a [base] section");
    const auto& scan = *sc.scan;
    std::string text = "# scan: z0 = " + dscex::format_complex(scan.z0) + ", epsilon = " +
                       dscex::format_rational(scan.epsilon) + ", captured measure = " + scan.captured.str() +
                       ", captured per motif period = " + dscex::format_rational(scan.captured_per_period) +
                       ", candidates tried = " + std::to_string(scan.candidates_tried) + "\n";
    text += sc.partition->serialize();
    if (opt.out.empty()) {
        std::cout << text;
    } else {
        write_file(fs::path(opt.out) / "partition.txt", text);
        std::cout << "wrote " << (fs::path(opt.out) / "partition.txt").string() << '\n';
    }
    return kOk;
}

int run_norm(const Options& opt) {
    const dscex::Scenario sc = load(opt);
    const auto& space = sc.factor_space();
    const auto& v = sc.v();
    std::cout << dscex::format_double(dscex::norm_L1(space, v)) << ',' << dscex::format_double(dscex::norm_Linf(space, v))
              << ',' << dscex::format_double(dscex::norm_L1_plus_Linf(space, v)) << ','
              << dscex::format_double(dscex::optimal_threshold(space, v)) << '\n';
    return kOk;
}

int run_residuality(const Options& opt) {
    const dscex::Scenario sc = load(opt);
    const auto report = dscex::margin(sc.v(), dscex::kDefaultTMin, dscex::kDefaultTMax, dscex::kMarginTolerance,
                                      worker_count(opt.threads));
    std::cout << dscex::margin_csv(report);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dunford-Schwartz counterexample operator: Cesaro averages, partitions and verification suites"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", opt.scenario, "Scenario file (default: the canonical scenario)");
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_flag("--exact", opt.exact, "Exact rational arithmetic in the output");
        sub->add_option("--threads", opt.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", opt.seed, "Seed override for sampled checks");
    };

    auto* simulate = app.add_subcommand("simulate", "Cesaro averages at the checkpoints as CSV");
    add_common(simulate);
    auto* verify = app.add_subcommand("verify", "Run a verification suite");
    add_common(verify);
    verify->add_option("--suite", opt.suite, "theorem1, lemmas, norms, residuality or all")
        ->check(CLI::IsMember(dscex::suite_names()));
    auto* partition = app.add_subcommand("partition", "Construct and print the partition of the base space");
    add_common(partition);
    auto* norm = app.add_subcommand("norm", "Print l1,linf,l1+linf,tau for the scenario function");
    add_common(norm);
    auto* residuality = app.add_subcommand("residuality", "Per-chain diameter estimates and the margin");
    add_common(residuality);

    std::uint64_t n = 0;
    std::uint64_t m = 0;
    auto* sigma_cmd = app.add_subcommand("sigma", "Print n,m,flips,sigma for the sign of S^m at cell n");
    sigma_cmd->add_option("n", n)->required();
    sigma_cmd->add_option("m", m)->required();

    std::uint32_t chain = 0;
    std::uint64_t cell = 0;
    std::uint64_t k = 0;
    auto* iterate = app.add_subcommand("iterate", "Print (S^k v)(chain, n) for the scenario function");
    add_common(iterate);
    iterate->add_option("chain", chain)->required();
    iterate->add_option("n", cell)->required();
    iterate->add_option("k", k)->required()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*simulate) return run_simulate(opt);
        if (*verify) return run_verify(opt);
        if (*partition) return run_partition(opt);
        if (*norm) return run_norm(opt);
        if (*residuality) return run_residuality(opt);
        if (*sigma_cmd) {
            std::cout << n << ',' << m << ',' << dscex::sign_flip_count(n, m) << ',' << dscex::sigma(n, m) << '\n';
            return kOk;
        }
        if (*iterate) {
            const dscex::Scenario sc = load(opt);
            if (opt.exact) {
                const auto value = dscex::iterate_value_exact(sc.v(), {chain, cell}, k);
                std::cout << dscex::format_rational(value.re) << ',' << dscex::format_rational(value.im) << '\n';
            } else {
                const auto value = dscex::iterate_value(sc.v(), {chain, cell}, k);
                std::cout << dscex::format_double(value.real()) << ',' << dscex::format_double(value.imag()) << '\n';
            }
            return kOk;
        }
    } catch (const dscex::ConstructionError& e) {
        std::cerr << "construction infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const dscex::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
