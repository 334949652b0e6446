#pragma once

// Numerical probes of the two legs of the residuality argument: the set
// G0 = {v : inf_j d(v; j, 0) > 0} is stable under small L1+Linf perturbations,
// and delta * 1_{J1 x N} pushes any v into it. Diameters are the checkpoint
// estimates of the Cesaro module.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dscex/cesaro.hpp"
#include "dscex/core_space.hpp"
#include "dscex/norms.hpp"

namespace dscex {

inline constexpr double kMarginTolerance = 1e-9;

struct MarginReport {
    std::vector<DiameterEstimate> chains;
    double margin = 0.0;  // min over chains
    double threshold = 0.0;
    bool in_G0 = false;  // margin > threshold
};

/// Per-chain diameter estimates at n = 0; chains are processed in parallel.
[[nodiscard]] MarginReport margin(const CellFunction& v, unsigned t_min = kDefaultTMin,
                                  unsigned t_max = kDefaultTMax, double threshold = kMarginTolerance,
                                  unsigned threads = 1);

struct OpennessReport {
    double epsilon = 0.0;  // margin(v0)
    double w_norm = 0.0;   // ||w||_{L1+Linf}
    SplitResult split;
    bool w1_vanishes_at_infinity = false;
    std::vector<double> d_w2;  // d_est(w2; j, 0)
    bool d_w2_bound = false;   // every d_w2 <= 2 eps / 3
    double perturbed_margin = 0.0;
    bool margin_bound = false;  // perturbed_margin >= eps / 3 - tol
    bool refined = false;       // t_max was raised once after a first failure
    bool pass = false;
    std::string verdict;
};

/// Throws InvalidArgument if margin(v0) <= 0, NormTooLarge if ||w|| >= eps / 3,
/// SplitNotFound if no clamp split has both parts below eps / 3.
[[nodiscard]] OpennessReport openness_probe(const FactorSpace& space, const CellFunction& v0, const CellFunction& w,
                                            unsigned t_min = kDefaultTMin, unsigned t_max = kDefaultTMax,
                                            unsigned threads = 1);

struct DensityChainRow {
    ChainId chain = 0;
    bool in_J1 = false;
    double d_v1 = 0.0;
    double d_perturbed = 0.0;
    bool pass = false;
};

struct DensityReport {
    double delta = 0.0;
    std::set<ChainId> J1;
    std::vector<DensityChainRow> rows;
    double perturbation_norm = 0.0;  // ||delta 1_{J1 x N}||_{L1+Linf}
    double perturbed_margin = 0.0;
    bool vacuous = false;  // J1 empty
    bool pass = false;
};

/// Throws InvalidArgument for delta <= 0.
[[nodiscard]] DensityReport density_probe(const FactorSpace& space, const CellFunction& v1, double delta,
                                          unsigned t_min = kDefaultTMin, unsigned t_max = kDefaultTMax,
                                          unsigned threads = 1);

struct RemarkReport {
    std::uint64_t samples = 0;
    std::uint64_t included = 0;  // every chain has a positive late-window diameter
    std::uint64_t excluded = 0;
    std::vector<std::uint64_t> counterexamples;  // sample indices with margin <= 0
    bool pass = false;
};

/// Late checkpoint window used to decide "positive estimated diameter".
inline constexpr unsigned kRemarkWindow = 4;
inline constexpr double kRemarkDetection = 1e-6;

[[nodiscard]] RemarkReport finite_J_remark_probe(std::uint64_t samples, std::uint64_t seed,
                                                 unsigned t_min = kDefaultTMin, unsigned t_max = kDefaultTMax,
                                                 unsigned threads = 1);

/// Per-chain rows `chain,diameter` followed by `margin,<value>,pass|fail`.
[[nodiscard]] std::string margin_csv(const MarginReport& report);

}  // namespace dscex
