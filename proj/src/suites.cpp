#include "dscex/suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dscex/cesaro.hpp"
#include "dscex/errors.hpp"
#include "dscex/norms.hpp"
#include "dscex/operator.hpp"
#include "dscex/parallel.hpp"
#include "dscex/residuality.hpp"
#include "dscex/sampling.hpp"

namespace dscex {

void SuiteReport::check(const std::string& name, bool ok, const std::string& detail) {
    ++checks;
    if (ok) ++passed;
    lines.push_back("[" + suite + "] " + (ok ? "pass " : "FAIL ") + name + (detail.empty() ? "" : ": " + detail));
}

void SuiteReport::note(const std::string& text) { lines.push_back("[" + suite + "] note " + text); }

void SuiteReport::absorb(const SuiteReport& other) {
    lines.insert(lines.end(), other.lines.begin(), other.lines.end());
    lines.push_back(other.summary_row());
    checks += other.checks;
    passed += other.passed;
}

std::string SuiteReport::summary_row() const {
    return suite + "," + std::to_string(checks) + "," + std::to_string(passed) + "," + std::to_string(failed());
}

std::string SuiteReport::text() const {
    std::string out;
    for (const auto& line : lines) out += line + '\n';
    out += summary_row() + '\n';
    return out;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"theorem1", "lemmas", "norms", "residuality", "all"};
    return names;
}

Partition unit_interval_partition(std::size_t chains) {
    BaseSpace space({}, {}, TailMotif{0, 1, {{0, 1}}});
    PiecewiseFunction f(space, {}, {}, {ExactComplex(Rational(3, 4))});
    const HalfStripScan scan = choose_z0(space, f, Rational(1, 2));
    return build_partition(space, f, scan, {chains, 1, CellSchedule::Constant});
}

namespace {

std::string num(double x) { return format_double(x); }

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) { return seed * 1000003ULL + stream; }

// ---------------------------------------------------------------------------

SuiteReport theorem1(const Scenario& sc, unsigned threads) {
    SuiteReport r;
    r.suite = "theorem1";
    const CellFunction& v = sc.v();
    const ExactComplex z0 = sc.z0_or_default();
    r.note("z0 = " + format_complex(z0) + ", l_max = " + std::to_string(sc.l_max));

    std::vector<CellIndex> starts;
    for (const CellIndex& s : sc.starts) {
        if (s.n == 0) {
            r.note("start (" + std::to_string(s.chain) + ",0) skipped: the bound families need n >= 1");
        } else {
            starts.push_back(s);
        }
    }
    const auto reports = parallel_map(starts.size(), threads, [&](std::size_t i) {
        return verify_nonconvergence_bounds(v, z0, starts[i].chain, starts[i].n, sc.l_max);
    });
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const auto& rep = reports[i];
        const std::string where = "chain " + std::to_string(starts[i].chain) + " n " + std::to_string(starts[i].n);
        r.check("precondition Re(v/z0) in [1/2,1] on " + where, rep.precondition_violations.empty(),
                rep.precondition_violations.empty() ? "" : rep.precondition_violations.front());
        for (const auto& e : rep.entries) {
            r.check("bound " + where + " l " + std::to_string(e.ell) + " N " + std::to_string(e.checkpoint.N), e.pass,
                    "Re(A_N/z0) = " + num(e.re_over_z0) + (e.checkpoint.even ? " <= " : " >= ") +
                        (e.checkpoint.even ? "-1/9" : "1/9"));
        }
        std::vector<std::uint64_t> Ns;
        for (const auto& e : rep.entries) Ns.push_back(e.checkpoint.N);
        r.check("|A_N| <= sup|v| at the bound checkpoints, " + where, boundedness_check(v, starts[i], Ns));
        if (sc.exact) {
            bool same = true;
            for (const Checkpoint& cp : checkpoint_set(starts[i].n, floor_log3(starts[i].n) + 1,
                                                       std::min(floor_log3(starts[i].n) + 6, 38u))) {
                if (cp.N > 3000) break;
                same = same && cesaro_block_exact(v, starts[i], cp.N) == cesaro_naive_exact(v, starts[i], cp.N);
            }
            r.check("exact blockwise average equals exact naive sum, " + where, same);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

SuiteReport lemmas(const Scenario& sc, unsigned threads) {
    SuiteReport r;
    r.suite = "lemmas";

    {
        bool ok = true;
        for (std::uint64_t n = 0; n <= 400 && ok; ++n) {
            std::uint64_t count = 0;
            for (std::uint64_t m = 1; m <= 400; ++m) {
                std::uint64_t x = n + m;
                while (x % 3 == 0) x /= 3;
                if (x == 1) ++count;
                if (sign_flip_count(n, m) != count) {
                    ok = false;
                    break;
                }
            }
        }
        r.check("sign_flip_count equals enumeration for n, m <= 400", ok);
    }
    {
        bool ok = true;
        std::uint64_t p = 1;
        for (unsigned t = 0; t <= 38; ++t, p *= 3) {
            ok = ok && floor_log3(p) == t && floor_log3(p + 1) == t && (t == 0 || floor_log3(p - 1) == t - 1);
        }
        r.check("floor_log3 exact at 3^t and 3^t +- 1 for t <= 38", ok);
    }

    const std::uint64_t seed = sc.seed;
    {
        const auto errors = parallel_map(50, threads, [&](std::size_t i) {
            Rng rng = sample_rng(sub_seed(seed, 1), i);
            const CellFunction v = random_cell_function(rng, static_cast<std::size_t>(uniform_int(rng, 1, 3)), 40);
            double worst = 0.0;
            for (int s = 0; s < 40; ++s) {
                const CellIndex idx{static_cast<ChainId>(uniform_int(rng, 0, static_cast<std::int64_t>(v.chain_count()) - 1)),
                                    static_cast<std::uint64_t>(uniform_int(rng, 0, 30))};
                const auto N = static_cast<std::uint64_t>(uniform_int(rng, 1, 3000));
                const Complex a = cesaro_block(v, idx, N);
                const Complex b = cesaro_naive(v, idx, N);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
            }
            return worst;
        });
        const double worst = *std::max_element(errors.begin(), errors.end());
        r.check("cesaro_block matches cesaro_naive on 50 random functions", worst <= 1e-12,
                "worst relative error " + num(worst));
    }
    {
        const auto same = parallel_map(10, threads, [&](std::size_t i) {
            Rng rng = sample_rng(sub_seed(seed, 2), i);
            const CellFunction v = random_cell_function(rng, 1, 20);
            const auto n = static_cast<std::uint64_t>(uniform_int(rng, 0, 10));
            const auto N = static_cast<std::uint64_t>(uniform_int(rng, 1, 300));
            return cesaro_block_exact(v, {0, n}, N) == cesaro_naive_exact(v, {0, n}, N);
        });
        r.check("exact blockwise and naive averages agree on 10 random functions",
                std::all_of(same.begin(), same.end(), [](bool b) { return b; }));
    }
    {
        // N A_N(v; j, m) sigma(n, m - n) = sum_{k = 1 + m - n}^{N + m - n} (S^k v)(j, n)
        const auto ok = parallel_map(6, threads, [&](std::size_t i) {
            Rng rng = sample_rng(sub_seed(seed, 3), i);
            const CellFunction v = random_cell_function(rng, 1, 30);
            constexpr std::uint64_t kMaxStart = 12;
            constexpr std::uint64_t kMaxN = 60;
            std::vector<std::vector<ExactComplex>> partial(kMaxStart);
            for (std::uint64_t n = 0; n < kMaxStart; ++n) {
                partial[n].resize(kMaxN + kMaxStart + 1);
                for (std::uint64_t k = 1; k < partial[n].size(); ++k) {
                    partial[n][k] = partial[n][k - 1] + iterate_value_exact(v, {0, n}, k);
                }
            }
            for (std::uint64_t m = 1; m < kMaxStart; ++m) {
                const auto averages = cesaro_naive_series_exact(v, {0, m}, kMaxN);
                for (std::uint64_t n = 0; n < m; ++n) {
                    const int s = sigma(n, m - n);
                    for (std::uint64_t N = 1; N <= kMaxN; ++N) {
                        ExactComplex lhs = averages[N - 1] * Rational(N);
                        if (s < 0) lhs = -lhs;
                        if (lhs != partial[n][N + m - n] - partial[n][m - n]) return false;
                    }
                }
            }
            return true;
        });
        r.check("shift relation between start cells holds exactly (6 random v, n < m < 12, N <= 60)",
                std::all_of(ok.begin(), ok.end(), [](bool b) { return b; }));
    }
    {
        const auto ok = parallel_map(200, threads, [&](std::size_t i) {
            Rng rng = sample_rng(sub_seed(seed, 4), i);
            const CellFunction v = random_cell_function(rng, 1, 30);
            const std::uint64_t N[] = {static_cast<std::uint64_t>(uniform_int(rng, 1, 100000))};
            return boundedness_check(v, {0, static_cast<std::uint64_t>(uniform_int(rng, 0, 40))}, N);
        });
        r.check("|A_N| <= sup|v| on 200 random (v, N <= 1e5)", std::all_of(ok.begin(), ok.end(), [](bool b) { return b; }));
    }
    {
        const CellFunction& v = sc.v();
        bool ok = true;
        for (ChainId j = 0; j < v.chain_count(); ++j) {
            ok = ok && diameter_estimate(v, j).value <= 2.0 * v.chain_sup(j) * (1 + 1e-12);
        }
        r.check("scenario diameter estimates are at most 2 sup|v|", ok);
    }

    const Partition internal = unit_interval_partition(2);
    const Partition& partition = sc.partition ? *sc.partition : internal;
    if (!sc.partition) r.note("no [base] section; factorization runs on the unit-interval partition with 2 chains");
    {
        std::vector<BaseFunction> inputs;
        if (sc.base) {
            inputs.emplace_back(sc.base->f);
        } else {
            inputs.emplace_back(PiecewiseFunction::constant(partition.space(), ExactComplex(1)));
        }
        for (std::uint64_t i = 0; i < 5; ++i) {
            Rng rng = sample_rng(sub_seed(seed, 5), i);
            inputs.emplace_back(embed_Q(partition, random_cell_function(rng, partition.chain_count(),
                                                                        partition.prefix_length() + 4)));
        }
        const auto reports = parallel_map(inputs.size(), threads,
                                          [&](std::size_t i) { return verify_factorization(partition, inputs[i], 50); });
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& rep = reports[i];
            r.check(std::string("T^k g = Q S^k P g for k <= 50, ") + (i == 0 ? "g = f" : "random step g " + std::to_string(i)),
                    rep.pass,
                    std::to_string(rep.checks) + " cell checks, " + std::to_string(rep.iterate_mismatches.size()) +
                        " iterate and " + std::to_string(rep.average_mismatches.size()) + " average mismatches");
        }
    }
    {
        bool ok = true;
        for (std::uint64_t i = 0; i < 20; ++i) {
            Rng rng = sample_rng(sub_seed(seed, 6), i);
            const CellFunction v = random_cell_function(rng, partition.chain_count(), partition.prefix_length() + 6);
            ok = ok && project_P(partition, embed_Q(partition, v)) == v;
        }
        r.check("P Q v = v on 20 random v", ok);
    }
    r.check("partition invariants hold", partition.check_invariants().empty());
    return r;
}

// ---------------------------------------------------------------------------

std::string contraction_detail(const ContractionReport& c) {
    return std::to_string(c.samples) + " samples, worst L1 ratio " + num(c.worst_l1_ratio) + ", worst Linf ratio " +
           num(c.worst_linf_ratio);
}

double brute_force_L1_plus_Linf(const FactorSpace& space, const CellFunction& v) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> taus{0.0};
    for (const auto& s : rearrange(space, v).steps) taus.push_back(s.level);
    for (double tau : taus) best = std::min(best, optimal_split(space, v, tau).cost);
    return best;
}

SuiteReport norms(const Scenario& sc, unsigned threads) {
    SuiteReport r;
    r.suite = "norms";
    const std::uint64_t seed = sc.seed;
    {
        const auto c = check_contraction_S(sc.factor_space(), sc.samples, sub_seed(seed, 10));
        r.check("S contracts L1 and Linf on the scenario space", c.pass, contraction_detail(c));
    }
    const auto random_spaces = parallel_map(3, threads, [&](std::size_t i) {
        Rng rng = sample_rng(sub_seed(seed, 11), i);
        const FactorSpace space = random_monotone_space(rng, static_cast<std::size_t>(uniform_int(rng, 1, 4)));
        return check_contraction_S(space, sc.samples, sub_seed(seed, 12 + i));
    });
    for (std::size_t i = 0; i < random_spaces.size(); ++i) {
        r.check("S contracts L1 and Linf on random monotone space " + std::to_string(i), random_spaces[i].pass,
                contraction_detail(random_spaces[i]));
    }
    {
        std::vector<FactorSpace::Chain> chains{{{4, 2, 1}, WeightTail::constant(1)}};
        const FactorSpace decreasing = FactorSpace::without_monotonicity_check(chains);
        const auto c = check_contraction_S(decreasing, 200, sub_seed(seed, 15));
        r.check("negative control: S is not an L1 contraction on decreasing weights", c.l1_failures > 0,
                std::to_string(c.l1_failures) + " of " + std::to_string(c.samples) + " samples expand");
    }
    {
        const Partition internal = unit_interval_partition(2);
        const Partition& partition = sc.partition ? *sc.partition : internal;
        const auto c = check_contraction_T(partition, sc.samples, sub_seed(seed, 16));
        r.check("T contracts L1 and Linf on the base space", c.pass, contraction_detail(c));
    }
    {
        const auto errors = parallel_map(50, threads, [&](std::size_t i) {
            Rng rng = sample_rng(sub_seed(seed, 17), i);
            const auto atoms = static_cast<std::size_t>(uniform_int(rng, 1, 20));
            std::vector<FactorSpace::Chain> chains{{{}, WeightTail::constant(1)}};
            Rational w(uniform_int(rng, 1, 16), 32);
            std::vector<ExactComplex> values;
            for (std::size_t a = 0; a < atoms; ++a) {
                chains[0].weight_prefix.push_back(w);
                w += Rational(uniform_int(rng, 0, 8), 32);
                values.push_back(random_dyadic_complex(rng, 4));
            }
            chains[0].weight_tail = WeightTail::constant(w);
            const FactorSpace space(chains);
            const CellFunction v({CellFunction::Chain{values, ValueTail::zero()}});
            return std::abs(norm_L1_plus_Linf(space, v) - brute_force_L1_plus_Linf(space, v));
        });
        const double worst = *std::max_element(errors.begin(), errors.end());
        r.check("rearrangement L1+Linf norm equals brute-force threshold minimum on 50 spaces", worst <= 1e-9,
                "worst difference " + num(worst));
    }
    {
        std::set<ChainId> all;
        for (ChainId j = 0; j < sc.factor_space().chain_count(); ++j) all.insert(j);
        const double one = norm_L1_plus_Linf(sc.factor_space(), make_indicator(sc.factor_space(), all));
        r.check("||1 on an infinite set||_{L1+Linf} = 1", one == 1.0, num(one));
    }
    return r;
}

// ---------------------------------------------------------------------------

SuiteReport residuality(const Scenario& sc, unsigned threads) {
    SuiteReport r;
    r.suite = "residuality";
    const FactorSpace& space = sc.factor_space();
    const std::size_t J = space.chain_count();
    const std::uint64_t seed = sc.seed;
    {
        const MarginReport m = margin(sc.v(), kDefaultTMin, kDefaultTMax, kMarginTolerance, threads);
        r.note("scenario margin " + num(m.margin) + (m.in_G0 ? " (in G0)" : " (not in G0)"));
    }
    std::set<ChainId> all;
    for (ChainId j = 0; j < J; ++j) all.insert(j);
    const CellFunction one = make_indicator(space, all);
    const MarginReport one_margin = margin(one, kDefaultTMin, kDefaultTMax, kMarginTolerance, threads);
    for (const auto& c : one_margin.chains) {
        r.check("d_est(1; " + std::to_string(c.chain) + ", 0) >= 2/9", c.value >= 2.0 / 9.0, num(c.value));
    }
    for (double delta : {1.0, 0.3, 0.01}) {
        const DensityReport d = density_probe(space, CellFunction::zero(J), delta, kDefaultTMin, kDefaultTMax, threads);
        r.check("density probe v1 = 0, delta = " + num(delta), d.pass,
                "margin(v1 + p) = " + num(d.perturbed_margin) + ", ||p|| = " + num(d.perturbation_norm));
    }
    {
        const auto ok = parallel_map(50, threads, [&](std::size_t i) {
            Rng rng = sample_rng(sub_seed(seed, 20), i);
            const CellFunction v1 = random_cell_function(rng, J, 12);
            bool pass = true;
            for (double delta : {1.0, 0.3, 0.01}) pass = pass && density_probe(space, v1, delta).pass;
            return pass;
        });
        const auto passed = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), true));
        r.check("density probe on 50 random v1, delta in {1, 0.3, 0.01}", passed == ok.size(),
                std::to_string(passed) + " of " + std::to_string(ok.size()));
    }
    {
        const double eps = one_margin.margin;
        const auto results = parallel_map(20, threads, [&](std::size_t i) -> std::string {
            Rng rng = sample_rng(sub_seed(seed, 21), i);
            CellFunction w = random_cell_function(rng, J, 12);
            const double norm = norm_L1_plus_Linf(space, w);
            if (norm > 0) {
                const double target = eps / 3.0 * static_cast<double>(uniform_int(rng, 1, 95)) / 100.0;
                w = scale(w, ExactComplex(exact_rational(target / norm)));
            }
            try {
                const OpennessReport o = openness_probe(space, one, w);
                return o.pass ? std::string() : o.verdict;
            } catch (const Error& e) {
                return e.what();
            }
        });
        std::size_t passed = 0;
        std::string first_failure;
        for (const auto& res : results) {
            if (res.empty()) {
                ++passed;
            } else if (first_failure.empty()) {
                first_failure = res;
            }
        }
        r.check("openness probe v0 = 1 with 20 random w, ||w|| < margin/3", passed == results.size(),
                std::to_string(passed) + " of " + std::to_string(results.size()) +
                    (first_failure.empty() ? "" : "; " + first_failure));
    }
    {
        const RemarkReport rem = finite_J_remark_probe(100, sub_seed(seed, 22), kDefaultTMin, kDefaultTMax, threads);
        r.check("finite J: estimated-nowhere-convergent samples have positive margin", rem.pass,
                std::to_string(rem.included) + " included, " + std::to_string(rem.excluded) + " excluded, " +
                    std::to_string(rem.counterexamples.size()) + " counterexamples");
    }
    return r;
}

}  // namespace

SuiteReport run_verify(const Scenario& scenario, const std::string& suite, unsigned threads) {
    if (suite == "theorem1") return theorem1(scenario, threads);
    if (suite == "lemmas") return lemmas(scenario, threads);
    if (suite == "norms") return norms(scenario, threads);
    if (suite == "residuality") return residuality(scenario, threads);
    if (suite == "all") {
        SuiteReport all;
    all.suite = "all";
        all.absorb(theorem1(scenario, threads));
        all.absorb(lemmas(scenario, threads));
        all.absorb(norms(scenario, threads));
        all.absorb(residuality(scenario, threads));
        return all;
    }
    throw InvalidArgument("unknown suite '" + suite + "' (expected theorem1, lemmas, norms, residuality or all)");
}

}  // namespace dscex
