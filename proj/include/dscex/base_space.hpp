#pragma once

// The original sigma-finite space: finitely many atoms and bounded intervals,
// followed by a periodic motif of intervals repeating forever. Functions on it
// are piecewise constant (one value per atom, per interval, per motif element).
//
// build_partition cuts the space into cells H(j, n) with
//   - cells pairwise disjoint and covering the space,
//   - H(j, n) inside A = {Re(f/z0) in [1/2, 1]} for n >= 1,
//   - mu(H(j, n+1)) >= mu(H(j, n)), all measures positive and finite,
// which turns T into Q S P on the atomic factor space.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dscex/core_space.hpp"

namespace dscex {

struct Interval {
    Rational lo;
    Rational hi;

    [[nodiscard]] Rational length() const { return hi - lo; }
};

/// Pattern intervals are offsets in [0, period); the motif occupies
/// [start + k*period + lo, start + k*period + hi) for every k >= 0.
struct TailMotif {
    Rational start;
    Rational period;
    std::vector<Interval> pattern;
};

/// Infinite iff the motif is present.
class BaseSpace {
public:
    BaseSpace(std::vector<Rational> atoms, std::vector<Interval> segments, std::optional<TailMotif> motif);

    [[nodiscard]] const std::vector<Rational>& atoms() const { return atoms_; }
    [[nodiscard]] const std::vector<Interval>& segments() const { return segments_; }
    [[nodiscard]] const std::optional<TailMotif>& motif() const { return motif_; }
    [[nodiscard]] bool infinite_measure() const { return motif_.has_value(); }
    /// Measure of one motif period (0 without a motif).
    [[nodiscard]] Rational motif_period_measure() const;

    /// Motif coordinate u (measure consumed along the motif from its start) to
    /// the absolute position on the line.
    [[nodiscard]] Rational motif_position(const Rational& u) const;

private:
    std::vector<Rational> atoms_;
    std::vector<Interval> segments_;
    std::optional<TailMotif> motif_;
};

struct PieceRef {
    enum class Kind { Atom, Segment, Motif };

    Kind kind = Kind::Atom;
    std::size_t index = 0;

    friend auto operator<=>(const PieceRef&, const PieceRef&) = default;
};

class PiecewiseFunction {
public:
    PiecewiseFunction(const BaseSpace& space, std::vector<ExactComplex> atom_values,
                      std::vector<ExactComplex> segment_values, std::vector<ExactComplex> motif_values);
    /// Same value on every piece.
    static PiecewiseFunction constant(const BaseSpace& space, const ExactComplex& value);

    [[nodiscard]] const ExactComplex& value(PieceRef piece) const;
    [[nodiscard]] const std::vector<ExactComplex>& atom_values() const { return atom_values_; }
    [[nodiscard]] const std::vector<ExactComplex>& segment_values() const { return segment_values_; }
    [[nodiscard]] const std::vector<ExactComplex>& motif_values() const { return motif_values_; }
    [[nodiscard]] bool zero_on_motif() const;

private:
    std::vector<ExactComplex> atom_values_;
    std::vector<ExactComplex> segment_values_;
    std::vector<ExactComplex> motif_values_;
};

/// Extended nonnegative measure.
struct Measure {
    bool infinite = false;
    Rational finite{0};

    static Measure infinity() { return {true, 0}; }
    [[nodiscard]] std::string str() const { return infinite ? "inf" : format_rational(finite); }
};

/// mu({Re(f/z0) in [1/2, 1]}). Throws InvalidArgument for z0 = 0.
[[nodiscard]] Measure measure_of_halfstrip(const BaseSpace& space, const PiecewiseFunction& f, const ExactComplex& z0);
/// mu({|f| > epsilon})
[[nodiscard]] Measure measure_above(const BaseSpace& space, const PiecewiseFunction& f, const Rational& epsilon);

struct HalfStripScan {
    ExactComplex z0;
    Rational epsilon;
    Measure captured;
    /// Measure of A per motif period; the ordering key of the scan.
    Rational captured_per_period;
    std::size_t candidates_tried = 0;
};

inline constexpr unsigned kDefaultDirections = 24;
inline constexpr unsigned kDefaultRadii = 8;

/// Finds z0 != 0 with mu(A) infinite. Candidates 4v/3 for every motif value v
/// with |v| > epsilon are tried first, then (4/3) r e^{2 pi i k / K} on a grid of
/// radii; within each group candidates go by decreasing measure captured per period.
/// Throws NoZ0Found if mu({|f| > epsilon}) is finite or no candidate works.
[[nodiscard]] HalfStripScan choose_z0(const BaseSpace& space, const PiecewiseFunction& f, const Rational& epsilon,
                                      unsigned directions = kDefaultDirections, unsigned radii = kDefaultRadii);

/// Finite piece of a cell: a whole atom, or a sub-interval of a segment.
struct Fragment {
    PieceRef piece;
    Interval span;  // atoms: [0, weight)

    [[nodiscard]] Rational measure() const { return span.length(); }
};

/// Range of motif coordinates [begin, end).
struct MotifRun {
    Rational begin;
    Rational end;
};

struct Cell {
    std::vector<Fragment> fragments;
    std::optional<MotifRun> run;
    Rational measure;
};

enum class CellSchedule {
    Constant,  // every cell with n >= 1 has measure cell_measure
    Doubling,  // mu(H(j, n)) = cell_measure * 2^(n-1)
};

struct PartitionOptions {
    std::size_t chain_count = 1;
    Rational cell_measure{1};
    CellSchedule schedule = CellSchedule::Constant;
};

class Partition {
public:
    [[nodiscard]] const BaseSpace& space() const { return space_; }
    [[nodiscard]] const ExactComplex& z0() const { return z0_; }
    [[nodiscard]] std::size_t chain_count() const { return options_.chain_count; }
    [[nodiscard]] const PartitionOptions& options() const { return options_; }
    /// Cells n < prefix_length() are stored explicitly; later cells are motif slabs.
    [[nodiscard]] std::uint64_t prefix_length() const { return prefix_length_; }
    [[nodiscard]] bool in_A(PieceRef piece) const;

    [[nodiscard]] Cell cell(CellIndex idx) const;
    [[nodiscard]] Rational measure(CellIndex idx) const;
    /// The pushed-forward atomic space: weight(j, n) = mu(H(j, n)).
    [[nodiscard]] FactorSpace factor_space() const;

    /// The factor map on a fragment that lies inside one cell.
    [[nodiscard]] CellIndex locate(const Fragment& fragment) const;
    /// The factor map at motif coordinate u.
    [[nodiscard]] CellIndex locate_motif(const Rational& u) const;

    /// Checks the partition properties (prefix exhaustively, tail analytically).
    /// Returns human-readable violations; empty when valid.
    [[nodiscard]] std::vector<std::string> check_invariants() const;

    [[nodiscard]] std::string serialize() const;

private:
    friend Partition build_partition(const BaseSpace&, const PiecewiseFunction&, const HalfStripScan&,
                                     const PartitionOptions&);
    Partition(BaseSpace space, PartitionOptions options) : space_(std::move(space)), options_(std::move(options)) {}

    [[nodiscard]] Rational slab_measure(std::uint64_t n) const;
    [[nodiscard]] Rational tail_slot_start(std::uint64_t slot) const;

    BaseSpace space_;
    PartitionOptions options_;
    ExactComplex z0_;
    std::vector<bool> atom_in_A_;
    std::vector<bool> segment_in_A_;
    std::vector<std::vector<Cell>> prefix_cells_;  // [chain][n]
    std::uint64_t prefix_length_ = 0;
    std::uint64_t tail_slot_ = 0;  // first slot (n-1)*J + j generated analytically
    Rational tail_start_;          // motif coordinate where that slot begins
    std::map<std::pair<PieceRef, Rational>, CellIndex> fragment_owner_;
    std::vector<std::pair<MotifRun, CellIndex>> prefix_runs_;  // sorted by begin
};

/// Throws ComplementTooLarge, MisalignedCellMeasure or InvalidArgument.
[[nodiscard]] Partition build_partition(const BaseSpace& space, const PiecewiseFunction& f, const HalfStripScan& scan,
                                        const PartitionOptions& options);

/// Function constant on every partition cell, i.e. something of the form Q v.
struct StepFunction {
    WindowedFunction cells;
};

using BaseFunction = std::variant<PiecewiseFunction, StepFunction>;

/// Integral of g over one cell (integrand looked up through the factor map for step functions).
[[nodiscard]] ExactComplex integrate(const Partition& partition, const BaseFunction& g, const Cell& cell);

/// (P g)(j, n) = average of g over H(j, n). Throws MisalignedFunction for
/// step functions with a bounded validity window.
[[nodiscard]] CellFunction project_P(const Partition& partition, const BaseFunction& g);
/// (Q v)(x) = v(j, n) for x in H(j, n).
[[nodiscard]] StepFunction embed_Q(const Partition& partition, const CellFunction& v);
/// (T g)(x) = psi(n+1) * average of g over H(j, n+1) for x in H(j, n), computed
/// at least for n < horizon.
[[nodiscard]] StepFunction apply_T_base(const Partition& partition, const BaseFunction& g, std::uint64_t horizon);

[[nodiscard]] double norm_L1_base(const Partition& partition, const BaseFunction& g);
[[nodiscard]] double norm_Linf_base(const Partition& partition, const BaseFunction& g);

struct FactorizationMismatch {
    CellIndex cell;
    std::uint64_t k = 0;
    Complex via_T;
    Complex via_S;
};

struct FactorizationReport {
    std::uint64_t k_max = 0;
    std::uint64_t cells_compared = 0;
    std::uint64_t checks = 0;
    std::uint64_t exact_matches = 0;
    std::vector<FactorizationMismatch> iterate_mismatches;
    std::vector<FactorizationMismatch> average_mismatches;
    bool pass = false;
};

inline constexpr double kFactorizationTolerance = 1e-12;

/// T^k g (repeated apply_T_base) against Q S^k P g (closed-form iterates), cell
/// by cell for k <= k_max, and the Cesaro averages of both sides.
[[nodiscard]] FactorizationReport verify_factorization(const Partition& partition, const BaseFunction& g,
                                                       std::uint64_t k_max);

}  // namespace dscex
