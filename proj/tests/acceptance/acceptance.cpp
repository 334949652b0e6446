// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "dscex/base_space.hpp"
#include "dscex/cesaro.hpp"
#include "dscex/errors.hpp"
#include "dscex/norms.hpp"
#include "dscex/operator.hpp"
#include "dscex/residuality.hpp"
#include "dscex/sampling.hpp"
#include "dscex/scenario.hpp"
#include "dscex/suites.hpp"
#include "support/oracles.hpp"

using namespace dscex;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Records the first failing item only, so a broken criterion stays readable.
void require(Outcome& o, bool ok, const std::string& what) {
    if (ok || !o.pass) {
        o.pass = o.pass && ok;
        return;
    }
    o.pass = false;
    o.detail = "first failure: " + what;
}

std::string scenario_path(const std::string& name) {
    return std::string(DSCEX_SCENARIO_DIR) + "/" + name + ".ini";
}

bool bounds_hold(const NonconvergenceReport& r) {
    if (!r.precondition_violations.empty()) return false;
    for (const auto& e : r.entries) {
        if (!e.pass) return false;
    }
    return r.pass;
}

Outcome theorem1_canonical() {
    Outcome o;
    const auto t0 = Clock::now();
    const CellFunction one = CellFunction::constant(1, 1);
    const NonconvergenceReport r = verify_nonconvergence_bounds(one, ExactComplex(1), 0, 1, 8);
    require(o, r.entries.size() == 16, "expected 16 checkpoints");
    for (const auto& e : r.entries) {
        const std::uint64_t expected_N = pow3(2 * e.ell + (e.bound > 0 ? 1 : 0)) - 2;
        require(o, e.checkpoint.N == expected_N, "checkpoint N = " + std::to_string(e.checkpoint.N));
        const bool ok = e.bound < 0 ? e.re_over_z0 <= -1.0 / 9 + kBoundSlack : e.re_over_z0 >= 1.0 / 9 - kBoundSlack;
        require(o, ok, "l " + std::to_string(e.ell) + " N " + std::to_string(e.checkpoint.N));
    }
    require(o, bounds_hold(r), "report verdict");
    require(o, cesaro_block_exact(one, {0, 1}, 7) == ExactComplex(Rational(-5, 7)), "A_7");
    require(o, cesaro_block_exact(one, {0, 1}, 25) == ExactComplex(Rational(13, 25)), "A_25");
    require(o, cesaro_block_exact(one, {0, 1}, 79) == ExactComplex(Rational(-41, 79)), "A_79");
    const double elapsed = seconds_since(t0);
    require(o, elapsed < 1.0, "runtime " + fmt(elapsed) + " s");
    if (o.pass) o.detail = "16 checkpoints up to N = 3^17 - 2, A_7 A_25 A_79 exact, " + fmt(elapsed) + " s";
    return o;
}

Outcome theorem1_other_scenarios() {
    Outcome o;
    int runs = 0;
    for (const Rational& c : {Rational(1, 2), Rational(3, 4)}) {
        const CellFunction v = CellFunction::constant(2, ExactComplex(c));
        for (ChainId j = 0; j < 2; ++j) {
            for (std::uint64_t n : {1, 2, 5, 30}) {
                require(o, bounds_hold(verify_nonconvergence_bounds(v, ExactComplex(1), j, n, 6)),
                        "constant " + format_rational(c) + " n " + std::to_string(n));
                ++runs;
            }
        }
    }
    Scenario mixed = load_scenario(scenario_path("mixed_base"));
    realize(mixed);
    const ExactComplex z0 = mixed.z0_or_default();
    for (ChainId j = 0; j < mixed.v().chain_count(); ++j) {
        for (std::uint64_t n : {1, 2, 4, 9}) {
            require(o, bounds_hold(verify_nonconvergence_bounds(mixed.v(), z0, j, n, 6)),
                    "mixed_base chain " + std::to_string(j) + " n " + std::to_string(n));
            ++runs;
        }
    }
    // Random cell values with Re(v/z0) in [1/2, 1] and a rotated z0.
    const ExactComplex rot(Rational(3, 5), Rational(4, 5));
    for (std::uint64_t i = 0; i < 20; ++i) {
        Rng rng = sample_rng(1002, i);
        std::vector<ExactComplex> prefix;
        for (std::int64_t m = 0, len = uniform_int(rng, 2, 30); m < len; ++m) {
            prefix.push_back(ExactComplex(Rational(uniform_int(rng, 32, 64), 64), Rational(uniform_int(rng, -64, 64), 64)) * rot);
        }
        const ExactComplex tail = ExactComplex(Rational(uniform_int(rng, 32, 64), 64)) * rot;
        const CellFunction v({{prefix, ValueTail::constant(tail)}});
        require(o, bounds_hold(verify_nonconvergence_bounds(v, rot, 0, 1, 6)), "random mixed sample " + std::to_string(i));
        ++runs;
    }
    if (o.pass) o.detail = std::to_string(runs) + " start cells, l = 1..6, constants 1/2 and 3/4, mixed_base, random mixed";
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    constexpr std::uint64_t kNMax = 10000;
    double worst = 0.0;
    std::uint64_t compared = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        Rng rng = sample_rng(1003, i);
        const CellFunction v = random_cell_function(rng, 2, 40);
        const CellIndex idx{static_cast<ChainId>(uniform_int(rng, 0, 1)), static_cast<std::uint64_t>(uniform_int(rng, 0, 50))};
        const std::vector<Complex> naive = cesaro_naive_series(v, idx, kNMax);
        const std::vector<ExactComplex> naive_exact = cesaro_naive_series_exact(v, idx, kNMax);
        for (int s = 0; s < 500; ++s) {
            const auto N = static_cast<std::uint64_t>(uniform_int(rng, 1, kNMax));
            const Complex block = cesaro_block(v, idx, N);
            const Complex ref = naive[N - 1];
            const double err = std::abs(block - ref);
            const double rel = err == 0.0 ? 0.0 : err / std::abs(ref);
            worst = std::max(worst, rel);
            require(o, rel <= 1e-12, "sample " + std::to_string(i) + " N " + std::to_string(N) + " rel " + fmt(rel));
            require(o, cesaro_block_exact(v, idx, N) == naive_exact[N - 1],
                    "exact sample " + std::to_string(i) + " N " + std::to_string(N));
            ++compared;
        }
    }
    if (o.pass) o.detail = std::to_string(compared) + " points, worst relative error " + fmt(worst) + ", exact mode equal";
    return o;
}

Outcome sign_arithmetic() {
    Outcome o;
    std::uint64_t pairs = 0;
    for (std::uint64_t n = 0; n <= 2000; ++n) {
        std::uint64_t flips = 0;
        for (std::uint64_t m = 1; m <= 2000; ++m) {
            if (oracle::is_power_of_3(n + m)) ++flips;
            if (sign_flip_count(n, m) != flips) {
                require(o, false, "n " + std::to_string(n) + " m " + std::to_string(m));
            }
            ++pairs;
        }
        require(o, sign_flip_count(n, 0) == 0, "m = 0 at n " + std::to_string(n));
    }
    std::uint64_t p = 1;
    for (unsigned t = 0; t <= 38; ++t, p *= 3) {
        require(o, floor_log3(p) == t, "3^" + std::to_string(t));
        require(o, floor_log3(p + 1) == t, "3^" + std::to_string(t) + " + 1");
        if (t > 0) require(o, floor_log3(p - 1) == t - 1, "3^" + std::to_string(t) + " - 1");
    }
    if (o.pass) o.detail = std::to_string(pairs) + " (n, m) pairs exhaustive, floor_log3 at 3^t and 3^t +- 1 for t <= 38";
    return o;
}

Outcome contraction() {
    Outcome o;
    for (std::uint64_t i = 0; i < 3; ++i) {
        Rng rng = sample_rng(1005, i);
        const FactorSpace space = random_monotone_space(rng, 3);
        const ContractionReport r = check_contraction_S(space, 1000, 1005 + i);
        require(o, r.pass && r.samples == 1000, "S on space " + std::to_string(i));
    }
    require(o, check_contraction_T(unit_interval_partition(3), 1000, 1006).pass, "T on unit intervals");
    Scenario mixed = load_scenario(scenario_path("mixed_base"));
    realize(mixed);
    require(o, check_contraction_T(*mixed.partition, 1000, 1007).pass, "T on mixed_base");
    const auto broken = FactorSpace::without_monotonicity_check({{{4, 2, 1}, WeightTail::constant(1)}});
    const ContractionReport neg = check_contraction_S(broken, 1000, 1008);
    require(o, !neg.pass && neg.l1_failures > 0, "decreasing weights did not fail L1");
    if (o.pass) {
        o.detail = "S on 3 spaces x 1000, T on 2 partitions x 1000, negative control fails L1 in " +
                   std::to_string(neg.l1_failures) + " samples";
    }
    return o;
}

Outcome factorization() {
    Outcome o;
    Scenario mixed = load_scenario(scenario_path("mixed_base"));
    realize(mixed);
    const std::vector<Partition> partitions{unit_interval_partition(2), *mixed.partition};
    std::uint64_t checks = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        Rng rng = sample_rng(1006, i);
        const Partition& p = partitions[i % 2];
        const CellFunction v = random_cell_function(rng, p.chain_count(), p.prefix_length() + 12);
        const FactorizationReport r = verify_factorization(p, embed_Q(p, v), 50);
        require(o, r.pass && r.iterate_mismatches.empty() && r.average_mismatches.empty(), "sample " + std::to_string(i));
        checks += r.checks;
    }
    if (o.pass) o.detail = "20 step functions, k <= 50, " + std::to_string(checks) + " cell checks";
    return o;
}

// Exact image of a value with denominator dividing 64, as integer numerators over 64.
struct Fixed64 {
    std::int64_t re = 0;
    std::int64_t im = 0;
    bool operator==(const Fixed64&) const = default;
    Fixed64 operator-() const { return {-re, -im}; }
    Fixed64 operator+(const Fixed64& b) const { return {re + b.re, im + b.im}; }
};

std::int64_t fixed64_part(const Rational& r) {
    const Rational scaled = r * 64;
    if (denominator(scaled) != 1) throw InvalidArgument("value " + format_rational(r) + " is not a multiple of 1/64");
    if (abs(numerator(scaled)) > (std::int64_t{1} << 52)) throw InvalidArgument("value " + format_rational(r) + " too large");
    return numerator(scaled).convert_to<std::int64_t>();
}

Fixed64 fixed64(const ExactComplex& z) { return {fixed64_part(z.re), fixed64_part(z.im)}; }

Outcome shift_relation() {
    Outcome o;
    constexpr std::uint64_t kM = 100;
    constexpr std::uint64_t kK = 1000;
    std::uint64_t identities = 0;
    for (std::uint64_t i = 0; i < 2; ++i) {
        Rng rng = sample_rng(1007, i);
        const CellFunction v = random_cell_function(rng, 1, 150);
        // it[s][k] = (S^k v)(0, s) and sums[s][k] = it[s][1] + ... + it[s][k]
        std::vector<std::vector<Fixed64>> it(kM + 1, std::vector<Fixed64>(kK + kM + 1));
        std::vector<std::vector<Fixed64>> sums(kM + 1, std::vector<Fixed64>(kK + kM + 1));
        for (std::uint64_t s = 0; s <= kM; ++s) {
            for (std::uint64_t k = 1; k <= kK + kM; ++k) {
                it[s][k] = fixed64(iterate_value_exact(v, {0, s}, k));
                sums[s][k] = sums[s][k - 1] + it[s][k];
            }
        }
        for (std::uint64_t m = 1; m <= kM; ++m) {
            // N * A_N at start m
            const std::vector<ExactComplex> avg = cesaro_naive_series_exact(v, {0, m}, kK);
            std::vector<Fixed64> scaled(kK);
            for (std::uint64_t N = 1; N <= kK; ++N) scaled[N - 1] = fixed64(avg[N - 1] * ExactComplex(Rational(static_cast<long long>(N))));
            for (std::uint64_t n = 0; n < m; ++n) {
                const std::uint64_t d = m - n;
                const bool flip = sigma(n, d) < 0;
                for (std::uint64_t k = 1; k <= kK; ++k) {
                    const Fixed64 lhs = flip ? -it[m][k] : it[m][k];
                    if (lhs != it[n][k + d]) {
                        require(o, false, "iterate n " + std::to_string(n) + " m " + std::to_string(m) + " k " + std::to_string(k));
                    }
                    const Fixed64 sum = flip ? -scaled[k - 1] : scaled[k - 1];
                    if (sum + sums[n][d] != sums[n][k + d]) {
                        require(o, false, "average n " + std::to_string(n) + " m " + std::to_string(m) + " N " + std::to_string(k));
                    }
                    identities += 2;
                }
            }
        }
    }
    if (o.pass) o.detail = std::to_string(identities) + " exact identities, n < m <= 100, k <= 1000, 2 random functions";
    return o;
}

Outcome boundedness() {
    Outcome o;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        Rng rng = sample_rng(1008, i);
        const CellFunction v = random_cell_function(rng, 2, 30);
        const CellIndex idx{static_cast<ChainId>(uniform_int(rng, 0, 1)), static_cast<std::uint64_t>(uniform_int(rng, 0, 100))};
        const std::array<std::uint64_t, 1> N{static_cast<std::uint64_t>(uniform_int(rng, 1, 100000))};
        require(o, boundedness_check(v, idx, N), "sample " + std::to_string(i) + " N " + std::to_string(N[0]));
        const double sup = v.chain_sup(idx.chain);
        require(o, std::abs(cesaro_naive(v, idx, N[0])) <= sup * (1 + 1e-12), "naive sample " + std::to_string(i));
    }
    if (o.pass) o.detail = "1000 random (v, N <= 10^5)";
    return o;
}

Outcome norms() {
    Outcome o;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        Rng rng = sample_rng(1009, i);
        const std::size_t chains = static_cast<std::size_t>(uniform_int(rng, 1, 3));
        const FactorSpace space = random_monotone_space(rng, chains, 20);
        const CellFunction v = random_finite_support(rng, chains, 20 / chains);
        std::vector<oracle::WeightedValue> cells;
        for (ChainId j = 0; j < chains; ++j) {
            for (std::uint64_t n = 0; n < v.prefix_length(j); ++n) cells.push_back({space.weight({j, n}), std::abs(v.value({j, n}))});
        }
        require(o, cells.size() <= 20, "more than 20 atoms");
        const double fast = norm_L1_plus_Linf(space, v);
        const double brute = oracle::l1_plus_linf_brute(cells);
        worst = std::max(worst, std::abs(fast - brute));
        require(o, std::abs(fast - brute) <= 1e-9, "sample " + std::to_string(i));
        if (std::abs(fast - brute) > 1e-9) continue;
        const std::set<ChainId> J{static_cast<ChainId>(uniform_int(rng, 0, static_cast<std::int64_t>(chains) - 1))};
        require(o, norm_L1_plus_Linf(space, make_indicator(space, J)) == 1.0, "indicator norm, sample " + std::to_string(i));
    }
    if (o.pass) o.detail = "1000 zero-tail functions on <= 20 atoms, worst gap " + fmt(worst) + ", indicator norms exactly 1";
    return o;
}

Outcome residuality() {
    Outcome o;
    const FactorSpace space = FactorSpace::uniform(3);
    std::string margins;
    for (double delta : {1.0, 0.3, 0.01}) {
        const DensityReport d = density_probe(space, CellFunction::zero(3), delta);
        require(o, d.pass && !d.vacuous, "density delta " + fmt(delta));
        require(o, d.perturbed_margin >= delta / 9, "density margin below delta/9 at delta " + fmt(delta));
        require(o, d.perturbed_margin >= 2 * delta / 9, "density margin below 2 delta/9 at delta " + fmt(delta));
        margins += (margins.empty() ? "" : " ") + fmt(d.perturbed_margin);
    }
    const CellFunction one = CellFunction::constant(3, 1);
    const MarginReport m = margin(one);
    for (const auto& c : m.chains) require(o, c.value >= 2.0 / 9, "d_est(1) on chain " + std::to_string(c.chain));
    const double eps = m.margin;
    int probes = 0;
    for (std::uint64_t i = 0; probes < 20; ++i) {
        Rng rng = sample_rng(1010, i);
        CellFunction w = random_cell_function(rng, 3, 12);
        const double nw = norm_L1_plus_Linf(space, w);
        if (nw == 0.0) continue;
        const double target = eps / 3 * static_cast<double>(uniform_int(rng, 1, 99)) / 100.0;
        w = scale(w, ExactComplex(exact_rational(target / nw)));
        try {
            const OpennessReport r = openness_probe(space, one, w);
            require(o, r.pass, "openness sample " + std::to_string(i) + ": " + r.verdict);
        } catch (const Error& e) {
            require(o, false, "openness sample " + std::to_string(i) + " threw: " + e.what());
        }
        ++probes;
    }
    if (o.pass) {
        o.detail = "density margins " + margins + ", 20 openness probes at eps = " + fmt(eps) + ", d_est(1) >= 2/9 on 3 chains";
    }
    return o;
}

struct CliRun {
    int code = -1;
    std::string out;
};

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

Outcome determinism() {
    Outcome o;
    const auto t0 = Clock::now();
    int reports = 0;
    for (const std::string& args : {std::string(), "--scenario " + scenario_path("two_chains"),
                                    "--scenario " + scenario_path("mixed_base")}) {
        const CliRun one = cli("verify --suite all --threads 1 " + args);
        const CliRun eight = cli("verify --suite all --threads 8 " + args);
        require(o, one.code == 0 && eight.code == 0, "exit code " + std::to_string(one.code) + "/" +
                                                         std::to_string(eight.code) + " for '" + args + "'");
        require(o, !one.out.empty() && one.out == eight.out, "reports differ for '" + args + "'");
        reports += 2;
    }
    const double elapsed = seconds_since(t0);
    require(o, elapsed < 60.0, "total runtime " + fmt(elapsed) + " s");
    if (o.pass) o.detail = std::to_string(reports) + " verify runs byte-identical across thread counts, " + fmt(elapsed) + " s in total";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"nonconvergence bounds, canonical scenario", theorem1_canonical},
        {"nonconvergence bounds, other scenarios", theorem1_other_scenarios},
        {"block evaluation equals naive summation", oracle_equivalence},
        {"sign arithmetic", sign_arithmetic},
        {"L1 and Linf contraction", contraction},
        {"factorization T^k = Q S^k P", factorization},
        {"shift relation", shift_relation},
        {"boundedness of averages", boundedness},
        {"L1+Linf norm", norms},
        {"residuality probes", residuality},
        {"determinism and runtime", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first << " ("
                  << o.detail << "; " << fmt(seconds_since(t0)) << " s)" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
