#include "dscex/residuality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dscex/errors.hpp"
#include "dscex/parallel.hpp"
#include "dscex/sampling.hpp"

namespace dscex {

namespace {

constexpr unsigned kMaxRefinedTMax = 38;

bool can_refine(unsigned t_max) { return t_max + 2 <= kMaxRefinedTMax; }

OpennessReport openness_once(const FactorSpace& space, const CellFunction& v0, const CellFunction& w,
                             unsigned t_min, unsigned t_max, unsigned threads) {
    require_same_shape(space, v0);
    require_same_shape(space, w);
    OpennessReport r;
    r.epsilon = margin(v0, t_min, t_max, 0.0, threads).margin;
    if (!(r.epsilon > 0.0)) throw InvalidArgument("openness probe needs margin(v0) > 0");
    const double third = r.epsilon / 3.0;
    r.w_norm = norm_L1_plus_Linf(space, w);
    if (!(r.w_norm < third)) {
        throw NormTooLarge("||w||_{L1+Linf} = " + format_double(r.w_norm) + " is not below eps/3 = " +
                           format_double(third));
    }

    std::vector<double> taus{optimal_threshold(space, w), 0.0};
    for (const auto& step : rearrange(space, w).steps) taus.push_back(step.level);
    bool found = false;
    for (double tau : taus) {
        SplitResult s = optimal_split(space, w, tau);
        if (s.l1_w1 < third && s.linf_w2 < third) {
            r.split = std::move(s);
            found = true;
            break;
        }
    }
    if (!found) throw SplitNotFound("no clamp threshold gives ||w1||_1 and ||w2||_inf both below eps/3");

    r.w1_vanishes_at_infinity = r.split.w1.has_zero_tails();
    const MarginReport d_w2 = margin(r.split.w2, t_min, t_max, 0.0, threads);
    r.d_w2_bound = true;
    for (const auto& c : d_w2.chains) {
        r.d_w2.push_back(c.value);
        r.d_w2_bound = r.d_w2_bound && c.value <= 2.0 * third + kMarginTolerance;
    }
    r.perturbed_margin = margin(combine(v0, w, ExactComplex(1), ExactComplex(1)), t_min, t_max, 0.0, threads).margin;
    r.margin_bound = r.perturbed_margin >= third - kMarginTolerance;
    r.pass = r.w1_vanishes_at_infinity && r.d_w2_bound && r.margin_bound;
    return r;
}

DensityReport density_once(const FactorSpace& space, const CellFunction& v1, double delta, unsigned t_min,
                           unsigned t_max, unsigned threads) {
    require_same_shape(space, v1);
    DensityReport r;
    r.delta = delta;
    const double ninth = delta / 9.0;
    const MarginReport before = margin(v1, t_min, t_max, 0.0, threads);
    for (const auto& c : before.chains) {
        if (c.value < ninth) r.J1.insert(c.chain);
    }
    r.vacuous = r.J1.empty();
    const CellFunction p = scale(make_indicator(space, r.J1), ExactComplex(exact_rational(delta)));
    r.perturbation_norm = norm_L1_plus_Linf(space, p);
    const MarginReport after = margin(combine(v1, p, ExactComplex(1), ExactComplex(1)), t_min, t_max, 0.0, threads);
    r.perturbed_margin = after.margin;

    bool all = true;
    for (std::size_t j = 0; j < before.chains.size(); ++j) {
        DensityChainRow row{static_cast<ChainId>(j), r.J1.contains(static_cast<ChainId>(j)), before.chains[j].value,
                            after.chains[j].value, false};
        if (row.in_J1) {
            row.pass = row.d_perturbed >= 2.0 * ninth - row.d_v1 - kMarginTolerance &&
                       row.d_perturbed >= ninth - kMarginTolerance;
        } else {
            row.pass = row.d_perturbed == row.d_v1 && row.d_perturbed >= ninth - kMarginTolerance;
        }
        all = all && row.pass;
        r.rows.push_back(row);
    }
    const bool norm_ok = r.vacuous || std::abs(r.perturbation_norm - delta) <= kMarginTolerance * std::max(1.0, delta);
    r.pass = all && norm_ok && r.perturbed_margin >= ninth - kMarginTolerance;
    return r;
}

}  // namespace

MarginReport margin(const CellFunction& v, unsigned t_min, unsigned t_max, double threshold, unsigned threads) {
    MarginReport r;
    r.threshold = threshold;
    r.chains = parallel_map(v.chain_count(), threads, [&](std::size_t j) {
        return diameter_estimate(v, static_cast<ChainId>(j), t_min, t_max);
    });
    r.margin = r.chains.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& c : r.chains) r.margin = std::min(r.margin, c.value);
    r.in_G0 = r.margin > threshold;
    return r;
}

OpennessReport openness_probe(const FactorSpace& space, const CellFunction& v0, const CellFunction& w,
                              unsigned t_min, unsigned t_max, unsigned threads) {
    OpennessReport r = openness_once(space, v0, w, t_min, t_max, threads);
    if (r.pass) {
        r.verdict = "pass";
        return r;
    }
    if (can_refine(t_max)) {
        OpennessReport refined = openness_once(space, v0, w, t_min, t_max + 2, threads);
        refined.refined = true;
        refined.verdict = refined.pass ? "pass after refining t_max (estimator too coarse)"
                                       : "fail after refining t_max";
        return refined;
    }
    r.verdict = "fail";
    return r;
}

DensityReport density_probe(const FactorSpace& space, const CellFunction& v1, double delta, unsigned t_min,
                            unsigned t_max, unsigned threads) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be positive");
    DensityReport r = density_once(space, v1, delta, t_min, t_max, threads);
    if (!r.pass && can_refine(t_max)) r = density_once(space, v1, delta, t_min, t_max + 2, threads);
    return r;
}

RemarkReport finite_J_remark_probe(std::uint64_t samples, std::uint64_t seed, unsigned t_min, unsigned t_max,
                                   unsigned threads) {
    const unsigned late_min = std::max(t_min, t_max >= kRemarkWindow ? t_max - kRemarkWindow : 0u);
    struct Outcome {
        bool included = false;
        bool counterexample = false;
    };
    const auto outcomes = parallel_map(samples, threads, [&](std::size_t i) {
        Rng rng = sample_rng(seed, i);
        const auto chains = static_cast<std::size_t>(uniform_int(rng, 1, 4));
        std::vector<CellFunction::Chain> data(chains);
        for (auto& chain : data) {
            const auto len = uniform_int(rng, 0, 10);
            for (std::int64_t n = 0; n < len; ++n) chain.prefix.push_back(random_dyadic_complex(rng));
            if (uniform_int(rng, 0, 4) != 0) {
                const double r = static_cast<double>(uniform_int(rng, 32, 64)) / 64.0;
                const double theta = 2.0 * std::numbers::pi * static_cast<double>(uniform_int(rng, 0, 15)) / 16.0;
                chain.tail = ValueTail::constant(ExactComplex::from(std::polar(r, theta)));
            }
        }
        const CellFunction v(std::move(data));
        Outcome o;
        o.included = true;
        for (ChainId j = 0; j < chains && o.included; ++j) {
            o.included = diameter_estimate(v, j, late_min, t_max).value > kRemarkDetection;
        }
        if (o.included) o.counterexample = !(margin(v, t_min, t_max, 0.0).margin > 0.0);
        return o;
    });
    RemarkReport r;
    r.samples = samples;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].included) {
            ++r.excluded;
            continue;
        }
        ++r.included;
        if (outcomes[i].counterexample) r.counterexamples.push_back(i);
    }
    r.pass = r.counterexamples.empty();
    return r;
}

std::string margin_csv(const MarginReport& report) {
    std::string out = "chain,d_est\n";
    for (const auto& c : report.chains) out += std::to_string(c.chain) + ',' + format_double(c.value) + '\n';
    out += "margin," + format_double(report.margin) + ',' + (report.in_G0 ? "pass" : "fail") + '\n';
    return out;
}

}  // namespace dscex
