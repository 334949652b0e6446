#pragma once

// Seeded generators shared by the verification suites and the tests. Sample i
// of a run depends only on (seed, i), so results do not depend on how samples
// are distributed over threads.

#include <cstdint>
#include <random>

#include "dscex/base_space.hpp"
#include "dscex/core_space.hpp"

namespace dscex {

using Rng = std::mt19937_64;

[[nodiscard]] Rng sample_rng(std::uint64_t seed, std::uint64_t index);

/// Uniform integer in [lo, hi].
[[nodiscard]] std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);

/// Real and imaginary parts k/64 with |k| <= 64 * scale.
[[nodiscard]] ExactComplex random_dyadic_complex(Rng& rng, int scale = 1);

/// Positive nondecreasing weights; the tail is constant or geometric.
[[nodiscard]] FactorSpace random_monotone_space(Rng& rng, std::size_t chains, std::size_t max_prefix = 12);

/// Zero tails, prefixes of length <= max_len, at least one nonzero value.
[[nodiscard]] CellFunction random_finite_support(Rng& rng, std::size_t chains, std::size_t max_len);

/// Random prefix plus, on each chain, a Zero or a Constant tail.
[[nodiscard]] CellFunction random_cell_function(Rng& rng, std::size_t chains, std::size_t max_len);

/// Piecewise function with random atom and segment values and zero motif values.
[[nodiscard]] PiecewiseFunction random_finite_piecewise(Rng& rng, const BaseSpace& space);

}  // namespace dscex
