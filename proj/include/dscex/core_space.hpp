#pragma once

// The atomic factor space J x N with per-chain weights, and complex functions
// on it described by a finite prefix plus an analytic tail.

#include <cstdint>
#include <limits>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dscex/numeric.hpp"

namespace dscex {

using ChainId = std::uint32_t;

struct CellIndex {
    ChainId chain = 0;
    std::uint64_t n = 0;

    friend bool operator==(const CellIndex&, const CellIndex&) = default;
    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
    friend std::ostream& operator<<(std::ostream& os, const CellIndex& idx) {
        return os << '(' << idx.chain << ',' << idx.n << ')';
    }
};

struct WeightTail {
    enum class Kind { Constant, Geometric };

    Kind kind = Kind::Constant;
    Rational base{1};
    Rational ratio{1};  // Geometric only: weight(n) = base * ratio^n

    static WeightTail constant(Rational base) { return {Kind::Constant, std::move(base), 1}; }
    static WeightTail geometric(Rational base, Rational ratio) {
        return {Kind::Geometric, std::move(base), std::move(ratio)};
    }
};

/// Atomic space O = J x N with finitely many chains. Every chain's weight
/// sequence is positive and nondecreasing; this is what makes the shift a
/// contraction on L1.
class FactorSpace {
public:
    struct Chain {
        std::vector<Rational> weight_prefix;
        WeightTail weight_tail;
    };

    explicit FactorSpace(std::vector<Chain> chains);

    /// `chains` chains, every weight equal to `weight`.
    static FactorSpace uniform(std::size_t chains, const Rational& weight = 1);

    /// Skips the monotonicity check (positivity is still enforced).
    /// Only meant for negative-control experiments.
    static FactorSpace without_monotonicity_check(std::vector<Chain> chains);

    [[nodiscard]] std::size_t chain_count() const { return chains_.size(); }
    [[nodiscard]] const Chain& chain(ChainId j) const;
    /// Throws InvalidChain for j >= chain_count().
    void require_chain(ChainId j) const;
    [[nodiscard]] Rational weight_exact(CellIndex idx) const;
    [[nodiscard]] double weight(CellIndex idx) const;
    [[nodiscard]] bool is_monotone() const;

private:
    FactorSpace(std::vector<Chain> chains, bool check_monotone);

    std::vector<Chain> chains_;
};

struct ValueTail {
    enum class Kind { Zero, Constant };

    Kind kind = Kind::Zero;
    ExactComplex value;

    static ValueTail zero() { return {}; }
    static ValueTail constant(ExactComplex v) { return {Kind::Constant, std::move(v)}; }

    /// Constant(0) counts as zero.
    [[nodiscard]] bool is_zero() const { return kind == Kind::Zero || value.is_zero(); }
};

/// Complex function on J x N. Values are stored exactly; a double view is cached.
class CellFunction {
public:
    struct Chain {
        std::vector<ExactComplex> prefix;
        ValueTail tail;
    };

    explicit CellFunction(std::vector<Chain> chains);
    static CellFunction zero(std::size_t chains);
    /// Same constant on every cell of every chain.
    static CellFunction constant(std::size_t chains, const ExactComplex& value);

    [[nodiscard]] std::size_t chain_count() const { return chains_.size(); }
    [[nodiscard]] const Chain& chain(ChainId j) const;
    void require_chain(ChainId j) const;
    [[nodiscard]] std::size_t prefix_length(ChainId j) const { return chain(j).prefix.size(); }
    [[nodiscard]] std::size_t max_prefix_length() const;

    [[nodiscard]] const ExactComplex& exact_value(CellIndex idx) const;
    [[nodiscard]] Complex value(CellIndex idx) const;
    [[nodiscard]] std::span<const Complex> prefix_values(ChainId j) const;
    [[nodiscard]] Complex tail_value(ChainId j) const;
    /// sup_n |v(j,n)|
    [[nodiscard]] double chain_sup(ChainId j) const;
    [[nodiscard]] bool has_zero_tails() const;

    friend bool operator==(const CellFunction& a, const CellFunction& b);

private:
    std::vector<Chain> chains_;
    std::vector<std::vector<Complex>> prefix_cache_;
    std::vector<Complex> tail_cache_;
};

/// A CellFunction whose values are only meaningful for n < valid_below.
struct WindowedFunction {
    static constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

    CellFunction function;
    std::uint64_t valid_below = kUnbounded;

    [[nodiscard]] bool bounded() const { return valid_below != kUnbounded; }
};

[[nodiscard]] double cell_weight(const FactorSpace& space, CellIndex idx);
[[nodiscard]] Complex cell_value(const CellFunction& v, CellIndex idx);
[[nodiscard]] CellFunction make_indicator(const FactorSpace& space, const std::set<ChainId>& chains);
/// Pointwise a*v + b*w. Prefix length is the max of the inputs.
[[nodiscard]] CellFunction combine(const CellFunction& v, const CellFunction& w, const ExactComplex& a,
                                   const ExactComplex& b);
[[nodiscard]] CellFunction combine(const CellFunction& v, const CellFunction& w, Complex a, Complex b);
[[nodiscard]] CellFunction scale(const CellFunction& v, const ExactComplex& a);

/// Throws MismatchedSpaces unless v has exactly one chain per chain of `space`.
void require_same_shape(const FactorSpace& space, const CellFunction& v);

// Line-oriented text form, one line per chain:
//   chain, prefix..., tail_kind, tail_params...
// e.g. "0, 1, 2, 4, constant, 4" or "1, i, 2, zero".
[[nodiscard]] std::string serialize(const FactorSpace& space);
[[nodiscard]] std::string serialize(const CellFunction& v);
[[nodiscard]] FactorSpace parse_factor_space(std::string_view text, bool check_monotone = true);
[[nodiscard]] CellFunction parse_cell_function(std::string_view text);

}  // namespace dscex
