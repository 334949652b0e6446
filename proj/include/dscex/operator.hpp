#pragma once

// The sign pattern psi (-1 exactly on powers of three, 3^0 = 1 included), exact
// base-3 integer arithmetic, and the weighted shift S = K M_psi:
//
//   (S v)(j, n)   = psi(n + 1) * v(j, n + 1)
//   (S^k v)(j, n) = sigma(n, k) * v(j, n + k),
//   sigma(n, k)   = (-1)^{#powers of 3 in (n, n + k]}.

#include <cstdint>

#include "dscex/core_space.hpp"

namespace dscex {

/// 3^t; throws IndexOverflow for t > 40.
[[nodiscard]] std::uint64_t pow3(unsigned t);

/// Largest t with 3^t <= x, integer arithmetic only. Throws InvalidArgument for x = 0.
[[nodiscard]] unsigned floor_log3(std::uint64_t x);

/// True iff m = 3^t for some t >= 0. Throws InvalidArgument for m = 0.
[[nodiscard]] bool is_power_of_3(std::uint64_t m);

/// Number of powers of three in [1, x]; 0 for x = 0.
[[nodiscard]] std::uint64_t powers_of_3_up_to(std::uint64_t x);

/// Number of powers of three in (n, n + m]. Throws IndexOverflow if n + m overflows.
[[nodiscard]] std::uint64_t sign_flip_count(std::uint64_t n, std::uint64_t m);

/// (-1)^sign_flip_count(n, m)
[[nodiscard]] int sigma(std::uint64_t n, std::uint64_t m);

/// psi(j, n); independent of the chain.
[[nodiscard]] int psi(std::uint64_t n);

/// n + k, throwing IndexOverflow instead of wrapping.
[[nodiscard]] std::uint64_t checked_add(std::uint64_t n, std::uint64_t k);

/// (S^k v)(idx) in O(log(n + k)). k >= 1.
[[nodiscard]] Complex iterate_value(const CellFunction& v, CellIndex idx, std::uint64_t k);
[[nodiscard]] ExactComplex iterate_value_exact(const CellFunction& v, CellIndex idx, std::uint64_t k);

/// One application of S. The result is exact for n < valid_below.
///
/// A zero tail shifts to a zero tail and the result is exact everywhere. A
/// constant tail c is not S-invariant (psi flips at every power of three), so
/// the result's explicit prefix is extended to at least `min_prefix` cells and
/// then up to the next power of three p >= 3; its tail is then c, which is
/// correct below 3p - 1. iterate_value has no such horizon.
[[nodiscard]] WindowedFunction apply_S(const FactorSpace& space, const WindowedFunction& v,
                                       std::uint64_t min_prefix = 0);
[[nodiscard]] WindowedFunction apply_S(const FactorSpace& space, const CellFunction& v,
                                       std::uint64_t min_prefix = 0);

/// psi as a CellFunction, materialized on n < horizon (tail value +1 beyond).
[[nodiscard]] WindowedFunction sign_pattern_function(std::size_t chains, std::uint64_t horizon);

}  // namespace dscex
