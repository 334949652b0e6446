#include "dscex/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dscex/errors.hpp"
#include "dscex/operator.hpp"
#include "dscex/sampling.hpp"

namespace dscex {

double norm_L1(const FactorSpace& space, const CellFunction& v) {
    require_same_shape(space, v);
    if (!v.has_zero_tails()) return std::numeric_limits<double>::infinity();
    CompensatedSum total;
    for (ChainId j = 0; j < v.chain_count(); ++j) {
        const auto values = v.prefix_values(j);
        for (std::uint64_t n = 0; n < values.size(); ++n) {
            if (values[n] != Complex{}) total.add(space.weight({j, n}) * std::abs(values[n]));
        }
    }
    return total.value();
}

double norm_Linf(const FactorSpace& space, const CellFunction& v) {
    require_same_shape(space, v);
    double sup = 0.0;
    for (ChainId j = 0; j < v.chain_count(); ++j) sup = std::max(sup, v.chain_sup(j));
    return sup;
}

namespace {

struct Level {
    Rational width{0};
    bool infinite = false;
};

// Keyed by the exact squared modulus, so equal moduli always merge.
std::map<Rational, Level, std::greater<>> level_sets(const FactorSpace& space, const CellFunction& v) {
    require_same_shape(space, v);
    std::map<Rational, Level, std::greater<>> levels;
    for (ChainId j = 0; j < v.chain_count(); ++j) {
        const auto& chain = v.chain(j);
        for (std::uint64_t n = 0; n < chain.prefix.size(); ++n) {
            if (chain.prefix[n].is_zero()) continue;
            levels[chain.prefix[n].norm_squared()].width += space.weight_exact({j, n});
        }
        if (!chain.tail.is_zero()) levels[chain.tail.value.norm_squared()].infinite = true;
    }
    return levels;
}

double modulus(const Rational& norm_squared) { return std::sqrt(norm_squared.convert_to<double>()); }

}  // namespace

RearrangementProfile rearrange(const FactorSpace& space, const CellFunction& v) {
    RearrangementProfile profile;
    for (const auto& [ns, level] : level_sets(space, v)) {
        profile.steps.push_back({modulus(ns), level.infinite ? 0.0 : level.width.convert_to<double>(), level.infinite});
        if (level.infinite) break;  // v* never drops below the top tail level
    }
    return profile;
}

double norm_L1_plus_Linf(const FactorSpace& space, const CellFunction& v) {
    Rational remaining = 1;
    CompensatedSum total;
    for (const auto& [ns, level] : level_sets(space, v)) {
        const Rational take = level.infinite ? remaining : std::min(level.width, remaining);
        total.add(modulus(ns) * take.convert_to<double>());
        remaining -= take;
        if (remaining == 0) break;
    }
    return total.value();
}

double optimal_threshold(const FactorSpace& space, const CellFunction& v) {
    Rational cumulative = 0;
    for (const auto& [ns, level] : level_sets(space, v)) {
        if (level.infinite) return modulus(ns);
        cumulative += level.width;
        if (cumulative > 1) return modulus(ns);
    }
    return 0.0;
}

SplitResult optimal_split(const FactorSpace& space, const CellFunction& w, double tau) {
    require_same_shape(space, w);
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidArgument("split threshold must be finite and >= 0");
    auto clamp = [tau](const ExactComplex& z) -> ExactComplex {
        const Complex zd = z.to_complex();
        const double m = std::abs(zd);
        // a few ulps of slack so a level computed another way is not clamped by a rounding residue
        if (m <= tau * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) return z;
        return ExactComplex::from(zd * (tau / m));
    };
    std::vector<CellFunction::Chain> excess(w.chain_count());
    std::vector<CellFunction::Chain> clamped(w.chain_count());
    for (ChainId j = 0; j < w.chain_count(); ++j) {
        const auto& chain = w.chain(j);
        for (const ExactComplex& z : chain.prefix) {
            ExactComplex c = clamp(z);
            excess[j].prefix.push_back(z - c);
            clamped[j].prefix.push_back(std::move(c));
        }
        if (!chain.tail.is_zero()) {
            ExactComplex c = clamp(chain.tail.value);
            excess[j].tail = ValueTail::constant(chain.tail.value - c);
            clamped[j].tail = ValueTail::constant(std::move(c));
        }
    }
    SplitResult out{tau, CellFunction(std::move(excess)), CellFunction(std::move(clamped))};
    out.l1_w1 = norm_L1(space, out.w1);
    out.linf_w2 = norm_Linf(space, out.w2);
    out.cost = out.l1_w1 + out.linf_w2;
    return out;
}

namespace {

void record(ContractionReport& report, double before_l1, double after_l1, double before_inf, double after_inf) {
    ++report.samples;
    if (after_l1 > before_l1 + kContractionSlack * std::max(1.0, before_l1)) ++report.l1_failures;
    if (after_inf > before_inf + kContractionSlack * std::max(1.0, before_inf)) ++report.linf_failures;
    if (before_l1 > 0) report.worst_l1_ratio = std::max(report.worst_l1_ratio, after_l1 / before_l1);
    if (before_inf > 0) report.worst_linf_ratio = std::max(report.worst_linf_ratio, after_inf / before_inf);
}

}  // namespace

ContractionReport check_contraction_S(const FactorSpace& space, std::uint64_t samples, std::uint64_t seed) {
    ContractionReport report;
    for (std::uint64_t i = 0; i < samples; ++i) {
        Rng rng = sample_rng(seed, i);
        const CellFunction v = random_finite_support(rng, space.chain_count(), 24);
        const WindowedFunction sv = apply_S(space, v);
        record(report, norm_L1(space, v), norm_L1(space, sv.function), norm_Linf(space, v),
               norm_Linf(space, sv.function));
    }
    report.pass = report.l1_failures == 0 && report.linf_failures == 0;
    return report;
}

ContractionReport check_contraction_T(const Partition& partition, std::uint64_t samples, std::uint64_t seed) {
    ContractionReport report;
    const std::size_t J = partition.chain_count();
    for (std::uint64_t i = 0; i < samples; ++i) {
        Rng rng = sample_rng(seed, i);
        BaseFunction g = i % 2 == 0 ? BaseFunction(embed_Q(partition, random_finite_support(
                                                                          rng, J, partition.prefix_length() + 6)))
                                    : BaseFunction(random_finite_piecewise(rng, partition.space()));
        const StepFunction tg = apply_T_base(partition, g, 0);
        record(report, norm_L1_base(partition, g), norm_L1_base(partition, tg), norm_Linf_base(partition, g),
               norm_Linf_base(partition, tg));
    }
    report.pass = report.l1_failures == 0 && report.linf_failures == 0;
    return report;
}

}  // namespace dscex
