#pragma once

// Cesaro averages A_N(v; j, n) = (1/N) sum_{k=1..N} (S^k v)(j, n).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dscex/core_space.hpp"

namespace dscex {

/// Ascending-k compensated summation of the closed-form iterates. O(N).
[[nodiscard]] Complex cesaro_naive(const CellFunction& v, CellIndex idx, std::uint64_t N);
[[nodiscard]] ExactComplex cesaro_naive_exact(const CellFunction& v, CellIndex idx, std::uint64_t N);

/// A_1, ..., A_{N_max} from one running sum (same summation order as cesaro_naive).
[[nodiscard]] std::vector<Complex> cesaro_naive_series(const CellFunction& v, CellIndex idx, std::uint64_t N_max);
[[nodiscard]] std::vector<ExactComplex> cesaro_naive_series_exact(const CellFunction& v, CellIndex idx,
                                                                  std::uint64_t N_max);

/// Same value as cesaro_naive, computed by grouping k into blocks of constant
/// sign (3^d <= n + k < 3^{d+1}). O(prefix + log N).
[[nodiscard]] Complex cesaro_block(const CellFunction& v, CellIndex idx, std::uint64_t N);
[[nodiscard]] ExactComplex cesaro_block_exact(const CellFunction& v, CellIndex idx, std::uint64_t N);

/// N = 3^t - n - 1. `even` marks t - b even where b = floor_log3(max(n, 1));
/// the even family carries the upper bound -1/9, the odd family the lower bound +1/9.
struct Checkpoint {
    unsigned t = 0;
    std::uint64_t N = 0;
    bool even = false;
};

/// Throws InvalidArgument if t_min > t_max or 3^t_min < n + 2.
[[nodiscard]] std::vector<Checkpoint> checkpoint_set(std::uint64_t n, unsigned t_min, unsigned t_max);

struct CesaroEntry {
    Checkpoint checkpoint;
    Complex average;
    std::optional<ExactComplex> exact_average;
    double re_over_z0 = 0.0;
    std::optional<Rational> exact_re_over_z0;
};

struct CesaroReport {
    CellIndex start;
    ExactComplex z0{1};
    std::vector<CesaroEntry> entries;
    double max_re_over_z0 = 0.0;
    double min_re_over_z0 = 0.0;
};

/// Averages at every checkpoint t in [t_min, t_max] via cesaro_block.
[[nodiscard]] CesaroReport cesaro_report(const CellFunction& v, CellIndex start, unsigned t_min, unsigned t_max,
                                         const ExactComplex& z0 = 1, bool exact = false);

/// CSV header `chain,n,N,re,im,re_over_z0`.
[[nodiscard]] std::string csv_header();
/// Rows only (no header); exact rationals as p/q when the report carries them.
[[nodiscard]] std::string csv_rows(const CesaroReport& report);

struct BoundEntry {
    unsigned ell = 0;
    Checkpoint checkpoint;
    double re_over_z0 = 0.0;
    double bound = 0.0;  // -1/9 for the even family, +1/9 for the odd family
    bool pass = false;
};

struct NonconvergenceReport {
    CellIndex start;
    ExactComplex z0;
    std::vector<std::string> precondition_violations;
    std::vector<BoundEntry> entries;
    bool pass = false;
};

inline constexpr double kBoundSlack = 1e-12;

/// For l = 1..l_max: Re(A_N/z0) <= -1/9 at N = 3^{b+2l} - n - 1 and
/// Re(A_N/z0) >= +1/9 at N = 3^{b+2l+1} - n - 1, b = floor_log3(n). Requires
/// Re(v(j,m)/z0) in [1/2, 1] for every m >= 1; violations are listed, not thrown.
[[nodiscard]] NonconvergenceReport verify_nonconvergence_bounds(const CellFunction& v, const ExactComplex& z0,
                                                                ChainId j, std::uint64_t n, unsigned l_max);

inline constexpr unsigned kDefaultTMin = 4;
inline constexpr unsigned kDefaultTMax = 20;

/// Lower estimate of diam C(v; j, 0): max pairwise distance of A_N(v; j, 0)
/// over the checkpoints N = 3^t - 1, t in [t_min, t_max].
struct DiameterEstimate {
    ChainId chain = 0;
    double value = 0.0;
    unsigned t_min = 0;
    unsigned t_max = 0;
};

[[nodiscard]] std::vector<Complex> checkpoint_averages(const CellFunction& v, CellIndex start, unsigned t_min,
                                                       unsigned t_max);
/// Max pairwise Euclidean distance of a finite point set.
[[nodiscard]] double finite_diameter(std::span<const Complex> points);
[[nodiscard]] DiameterEstimate diameter_estimate(const CellFunction& v, ChainId j, unsigned t_min = kDefaultTMin,
                                                 unsigned t_max = kDefaultTMax);

/// |A_N(v; idx)| <= sup_m |v(j, m)| for every N in Ns.
[[nodiscard]] bool boundedness_check(const CellFunction& v, CellIndex idx, std::span<const std::uint64_t> Ns);

}  // namespace dscex
