#pragma once

// L1, Linf and L1+Linf norms on the atomic space, the decreasing
// rearrangement behind the last one, and the clamp decomposition w = w1 + w2.

#include <cstdint>
#include <vector>

#include "dscex/base_space.hpp"
#include "dscex/core_space.hpp"

namespace dscex {

/// Sum of weight * |v|; +infinity when some chain has a nonzero tail
/// (every weight tail has infinite total mass).
[[nodiscard]] double norm_L1(const FactorSpace& space, const CellFunction& v);
/// sup |v| over all cells, tails included.
[[nodiscard]] double norm_Linf(const FactorSpace& space, const CellFunction& v);

struct RearrangementStep {
    double level = 0.0;
    double width = 0.0;  // meaningless when infinite
    bool infinite = false;
};

/// Distinct nonzero moduli in decreasing order with the total weight attaining
/// each, down to the first level of infinite weight (at most one such step).
struct RearrangementProfile {
    std::vector<RearrangementStep> steps;
};

[[nodiscard]] RearrangementProfile rearrange(const FactorSpace& space, const CellFunction& v);

/// Integral of v* over (0, 1).
[[nodiscard]] double norm_L1_plus_Linf(const FactorSpace& space, const CellFunction& v);
/// v*(1) = inf{s : weight(|v| > s) <= 1}; the clamp at this level realizes the L1+Linf norm.
[[nodiscard]] double optimal_threshold(const FactorSpace& space, const CellFunction& v);

struct SplitResult {
    double tau = 0.0;
    CellFunction w1 = CellFunction::zero(1);  // excess over tau
    CellFunction w2 = CellFunction::zero(1);  // w clamped to modulus tau, phase kept
    double l1_w1 = 0.0;
    double linf_w2 = 0.0;
    double cost = 0.0;
};

/// Clamp split at tau >= 0. w1 + w2 = w holds exactly.
[[nodiscard]] SplitResult optimal_split(const FactorSpace& space, const CellFunction& w, double tau);

struct ContractionReport {
    std::uint64_t samples = 0;
    std::uint64_t l1_failures = 0;
    std::uint64_t linf_failures = 0;
    double worst_l1_ratio = 0.0;
    double worst_linf_ratio = 0.0;
    bool pass = false;
};

inline constexpr double kContractionSlack = 1e-12;

/// ||S v|| <= ||v|| in L1 and Linf for `samples` random finite-support v.
/// Sample i depends only on (seed, i).
[[nodiscard]] ContractionReport check_contraction_S(const FactorSpace& space, std::uint64_t samples,
                                                    std::uint64_t seed);
/// The same for T on the base space, with random finite-support step functions.
[[nodiscard]] ContractionReport check_contraction_T(const Partition& partition, std::uint64_t samples,
                                                    std::uint64_t seed);

}  // namespace dscex
