#include "dscex/base_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dscex/cesaro.hpp"
#include "dscex/errors.hpp"
#include "dscex/operator.hpp"

namespace dscex {

namespace {

using boost::multiprecision::cpp_int;

// floor(a / b) for a >= 0, b > 0
cpp_int floor_div(const Rational& a, const Rational& b) {
    const Rational q = a / b;
    return numerator(q) / denominator(q);
}

Rational power_of_two(std::uint64_t e) {
    if (e > 4096) throw IndexOverflow("cell index too large for the doubling schedule");
    return Rational(cpp_int(1) << static_cast<unsigned>(e));
}

bool in_strip(const ExactComplex& value, const ExactComplex& z0) {
    const Rational re = real_of_quotient(value, z0);
    return re >= Rational(1, 2) && re <= 1;
}

void check_sorted_disjoint(const std::vector<Interval>& intervals, const std::string& what) {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (intervals[i].lo >= intervals[i].hi) throw InvalidSpace(what + ": empty or reversed interval");
        if (i > 0 && intervals[i].lo < intervals[i - 1].hi) {
            throw InvalidSpace(what + ": intervals must be sorted and disjoint");
        }
    }
}

std::string describe(const Interval& iv) { return "[" + format_rational(iv.lo) + "," + format_rational(iv.hi) + ")"; }

}  // namespace

BaseSpace::BaseSpace(std::vector<Rational> atoms, std::vector<Interval> segments, std::optional<TailMotif> motif)
    : atoms_(std::move(atoms)), segments_(std::move(segments)), motif_(std::move(motif)) {
    for (const Rational& w : atoms_) {
        if (w <= 0) throw InvalidSpace("atom weights must be positive");
    }
    check_sorted_disjoint(segments_, "segments");
    if (!segments_.empty() && segments_.front().lo < 0) throw InvalidSpace("segments must lie in [0, inf)");
    if (motif_) {
        if (motif_->period <= 0) throw InvalidSpace("motif period must be positive");
        if (motif_->pattern.empty()) throw InvalidSpace("motif pattern must not be empty");
        check_sorted_disjoint(motif_->pattern, "motif pattern");
        if (motif_->pattern.front().lo < 0 || motif_->pattern.back().hi > motif_->period) {
            throw InvalidSpace("motif pattern must lie inside one period");
        }
        if (!segments_.empty() && segments_.back().hi > motif_->start) {
            throw InvalidSpace("segments must end before the motif starts");
        }
    }
}

Rational BaseSpace::motif_period_measure() const {
    Rational c = 0;
    if (motif_) {
        for (const Interval& iv : motif_->pattern) c += iv.length();
    }
    return c;
}

Rational BaseSpace::motif_position(const Rational& u) const {
    if (!motif_) throw InvalidArgument("space has no motif");
    const Rational c = motif_period_measure();
    const cpp_int p = floor_div(u, c);
    Rational r = u - Rational(p) * c;
    for (const Interval& iv : motif_->pattern) {
        if (r < iv.length()) return motif_->start + Rational(p) * motif_->period + iv.lo + r;
        r -= iv.length();
    }
    return motif_->start + Rational(p + 1) * motif_->period + motif_->pattern.front().lo;
}

PiecewiseFunction::PiecewiseFunction(const BaseSpace& space, std::vector<ExactComplex> atom_values,
                                     std::vector<ExactComplex> segment_values, std::vector<ExactComplex> motif_values)
    : atom_values_(std::move(atom_values)),
      segment_values_(std::move(segment_values)),
      motif_values_(std::move(motif_values)) {
    const std::size_t motif_size = space.motif() ? space.motif()->pattern.size() : 0;
    if (atom_values_.size() != space.atoms().size() || segment_values_.size() != space.segments().size() ||
        motif_values_.size() != motif_size) {
        throw InvalidArgument("piecewise function does not match the pieces of its space");
    }
}

PiecewiseFunction PiecewiseFunction::constant(const BaseSpace& space, const ExactComplex& value) {
    const std::size_t motif_size = space.motif() ? space.motif()->pattern.size() : 0;
    return PiecewiseFunction(space, std::vector<ExactComplex>(space.atoms().size(), value),
                             std::vector<ExactComplex>(space.segments().size(), value),
                             std::vector<ExactComplex>(motif_size, value));
}

const ExactComplex& PiecewiseFunction::value(PieceRef piece) const {
    switch (piece.kind) {
        case PieceRef::Kind::Atom:
            return atom_values_.at(piece.index);
        case PieceRef::Kind::Segment:
            return segment_values_.at(piece.index);
        case PieceRef::Kind::Motif:
            return motif_values_.at(piece.index);
    }
    throw InvalidArgument("unknown piece kind");
}

bool PiecewiseFunction::zero_on_motif() const {
    return std::all_of(motif_values_.begin(), motif_values_.end(), [](const auto& z) { return z.is_zero(); });
}

Measure measure_of_halfstrip(const BaseSpace& space, const PiecewiseFunction& f, const ExactComplex& z0) {
    if (z0.is_zero()) throw InvalidArgument("z0 must be nonzero");
    Measure m;
    for (std::size_t i = 0; i < space.atoms().size(); ++i) {
        if (in_strip(f.atom_values()[i], z0)) m.finite += space.atoms()[i];
    }
    for (std::size_t i = 0; i < space.segments().size(); ++i) {
        if (in_strip(f.segment_values()[i], z0)) m.finite += space.segments()[i].length();
    }
    for (const ExactComplex& v : f.motif_values()) {
        if (in_strip(v, z0)) return Measure::infinity();
    }
    return m;
}

Measure measure_above(const BaseSpace& space, const PiecewiseFunction& f, const Rational& epsilon) {
    const Rational threshold = epsilon * epsilon;
    Measure m;
    for (std::size_t i = 0; i < space.atoms().size(); ++i) {
        if (f.atom_values()[i].norm_squared() > threshold) m.finite += space.atoms()[i];
    }
    for (std::size_t i = 0; i < space.segments().size(); ++i) {
        if (f.segment_values()[i].norm_squared() > threshold) m.finite += space.segments()[i].length();
    }
    for (const ExactComplex& v : f.motif_values()) {
        if (v.norm_squared() > threshold) return Measure::infinity();
    }
    return m;
}

HalfStripScan choose_z0(const BaseSpace& space, const PiecewiseFunction& f, const Rational& epsilon, unsigned directions,
                        unsigned radii) {
    if (epsilon <= 0) throw InvalidArgument("epsilon must be positive");
    if (directions == 0 || radii == 0) throw InvalidArgument("direction and radius counts must be positive");
    if (!measure_above(space, f, epsilon).infinite) {
        throw NoZ0Found("mu({|f| > epsilon}) is finite; no z0 can capture an infinite half-strip");
    }

    struct Candidate {
        ExactComplex z;
        Rational per_period;
        int tier = 0;  // 0: 4v/3 from a motif value, 1: grid
    };
    const auto& pattern = space.motif()->pattern;
    auto per_period = [&](const ExactComplex& z) {
        Rational c = 0;
        for (std::size_t e = 0; e < pattern.size(); ++e) {
            if (in_strip(f.motif_values()[e], z)) c += pattern[e].length();
        }
        return c;
    };

    std::vector<Candidate> candidates;
    const Rational eps2 = epsilon * epsilon;
    for (const ExactComplex& v : f.motif_values()) {
        if (v.norm_squared() <= eps2) continue;
        ExactComplex z = v * Rational(4, 3);
        if (std::none_of(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.z == z; })) {
            candidates.push_back({z, per_period(z), 0});
        }
    }

    double sup = 0.0;
    std::vector<double> moduli;
    auto collect = [&](const std::vector<ExactComplex>& values) {
        for (const auto& v : values) {
            const double m = std::abs(v.to_complex());
            sup = std::max(sup, m);
            moduli.push_back(m);
        }
    };
    collect(f.atom_values());
    collect(f.segment_values());
    collect(f.motif_values());
    const double eps = epsilon.convert_to<double>();
    std::vector<double> grid_radii;
    for (double m : moduli) {
        if (m >= eps && m <= 2 * sup) grid_radii.push_back(m);
    }
    for (unsigned i = 0; i < radii; ++i) grid_radii.push_back(eps + (2 * sup - eps) * (i + 1) / (radii + 1));
    std::sort(grid_radii.begin(), grid_radii.end());
    grid_radii.erase(std::unique(grid_radii.begin(), grid_radii.end()), grid_radii.end());
    for (double r : grid_radii) {
        for (unsigned k = 0; k < directions; ++k) {
            const double theta = 2 * std::numbers::pi * k / directions;
            const Complex z = std::polar(4.0 / 3.0 * r, theta);
            if (z == Complex{}) continue;
            const ExactComplex ez = ExactComplex::from(z);
            candidates.push_back({ez, per_period(ez), 1});
        }
    }
    // value candidates first, then the grid; each tier by decreasing captured measure
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.tier != b.tier) return a.tier < b.tier;
        return a.per_period > b.per_period;
    });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].per_period > 0) {
            return {candidates[i].z, epsilon, Measure::infinity(), candidates[i].per_period, i + 1};
        }
    }
    std::string densest = candidates.empty() ? "none" : format_complex(candidates.front().z);
    throw NoZ0Found("no grid candidate captures a periodic piece (densest direction tried: z0 = " + densest + ")");
}

// ---------------------------------------------------------------------------
// Partition

namespace {

// Consumes A from left to right: finite A pieces first, then the motif.
class StreamCursor {
public:
    StreamCursor(std::vector<Fragment> finite, bool has_motif) : finite_(std::move(finite)), has_motif_(has_motif) {}

    [[nodiscard]] bool finite_exhausted() const { return next_ == finite_.size(); }
    [[nodiscard]] const Rational& motif_coordinate() const { return u_; }

    Cell take(const Rational& amount) {
        Cell cell;
        cell.measure = amount;
        Rational rem = amount;
        while (rem > 0 && next_ < finite_.size()) {
            Fragment& f = finite_[next_];
            if (f.measure() <= rem) {
                rem -= f.measure();
                cell.fragments.push_back(f);
                ++next_;
            } else if (f.piece.kind == PieceRef::Kind::Atom) {
                throw MisalignedCellMeasure("atom of weight " + format_rational(f.measure()) +
                                            " does not fit the remaining slab capacity " + format_rational(rem));
            } else {
                cell.fragments.push_back({f.piece, {f.span.lo, f.span.lo + rem}});
                f.span.lo += rem;
                rem = 0;
            }
        }
        if (rem > 0) {
            if (!has_motif_) throw ConstructionError("ran out of space while filling cells");
            cell.run = MotifRun{u_, u_ + rem};
            u_ += rem;
        }
        return cell;
    }

private:
    std::vector<Fragment> finite_;
    std::size_t next_ = 0;
    bool has_motif_;
    Rational u_{0};
};

// Packs the complement into slabs of measure <= capacity.
std::vector<Cell> pack_complement(const std::vector<Fragment>& pieces, const Rational& capacity) {
    std::vector<Cell> slabs;
    Cell current;
    current.measure = 0;
    auto close = [&] {
        if (current.measure > 0) slabs.push_back(std::move(current));
        current = Cell{};
        current.measure = 0;
    };
    for (Fragment f : pieces) {
        if (f.piece.kind == PieceRef::Kind::Atom) {
            if (f.measure() > capacity) {
                throw MisalignedCellMeasure("complement atom of weight " + format_rational(f.measure()) +
                                            " exceeds cell_measure; H(j,0) would be larger than H(j,1)");
            }
            if (current.measure + f.measure() > capacity) close();
            current.measure += f.measure();
            current.fragments.push_back(f);
            continue;
        }
        while (f.measure() > 0) {
            const Rational room = capacity - current.measure;
            if (room == 0) {
                close();
                continue;
            }
            const Rational piece = std::min(room, f.measure());
            current.fragments.push_back({f.piece, {f.span.lo, f.span.lo + piece}});
            current.measure += piece;
            f.span.lo += piece;
        }
    }
    close();
    return slabs;
}

}  // namespace

Partition build_partition(const BaseSpace& space, const PiecewiseFunction& f, const HalfStripScan& scan,
                          const PartitionOptions& options) {
    if (options.chain_count == 0) throw InvalidArgument("chain_count must be at least 1");
    if (options.cell_measure <= 0) throw InvalidArgument("cell_measure must be positive");
    if (scan.z0.is_zero()) throw InvalidArgument("z0 must be nonzero");
    if (!scan.captured.infinite || !measure_of_halfstrip(space, f, scan.z0).infinite) {
        throw InvalidArgument("the half-strip of z0 must have infinite measure");
    }

    Partition p(space, options);
    p.z0_ = scan.z0;
    const std::size_t J = options.chain_count;
    const Rational& cm = options.cell_measure;

    const auto& motif = *space.motif();
    for (std::size_t e = 0; e < motif.pattern.size(); ++e) {
        if (!in_strip(f.motif_values()[e], scan.z0)) {
            throw ComplementTooLarge("motif element " + std::to_string(e) +
                                     " lies outside A, so the complement has infinite measure and would need "
                                     "infinitely many chains");
        }
    }
    const Rational c = space.motif_period_measure();
    const Rational q = cm / c;
    if (denominator(q) != 1) {
        throw MisalignedCellMeasure("cell_measure " + format_rational(cm) +
                                    " is not an integer multiple of the motif measure per period " +
                                    format_rational(c));
    }

    std::vector<Fragment> complement;
    std::vector<Fragment> finite_A;
    for (std::size_t i = 0; i < space.atoms().size(); ++i) {
        const bool inside = in_strip(f.atom_values()[i], scan.z0);
        p.atom_in_A_.push_back(inside);
        (inside ? finite_A : complement).push_back({{PieceRef::Kind::Atom, i}, {0, space.atoms()[i]}});
    }
    for (std::size_t i = 0; i < space.segments().size(); ++i) {
        const bool inside = in_strip(f.segment_values()[i], scan.z0);
        p.segment_in_A_.push_back(inside);
        (inside ? finite_A : complement).push_back({{PieceRef::Kind::Segment, i}, space.segments()[i]});
    }

    std::vector<Cell> slabs = pack_complement(complement, cm);
    if (slabs.size() > J) {
        throw ComplementTooLarge("the complement of A needs " + std::to_string(slabs.size()) +
                                 " slabs of measure <= " + format_rational(cm) + " but only " + std::to_string(J) +
                                 " chains are available");
    }

    StreamCursor cursor(std::move(finite_A), true);
    p.prefix_cells_.assign(J, {});
    for (std::size_t j = 0; j < J; ++j) {
        p.prefix_cells_[j].push_back(j < slabs.size() ? std::move(slabs[j]) : cursor.take(cm));
    }
    std::uint64_t slot = 0;
    while (!cursor.finite_exhausted() || slot % J != 0) {
        const std::uint64_t n = 1 + slot / J;
        p.prefix_cells_[slot % J].push_back(cursor.take(p.slab_measure(n)));
        ++slot;
    }
    p.tail_slot_ = slot;
    p.tail_start_ = cursor.motif_coordinate();
    p.prefix_length_ = 1 + slot / J;

    for (ChainId j = 0; j < J; ++j) {
        for (std::uint64_t n = 0; n < p.prefix_length_; ++n) {
            const Cell& cell = p.prefix_cells_[j][n];
            for (const Fragment& frag : cell.fragments) p.fragment_owner_[{frag.piece, frag.span.lo}] = {j, n};
            if (cell.run) p.prefix_runs_.push_back({*cell.run, {j, n}});
        }
    }
    std::sort(p.prefix_runs_.begin(), p.prefix_runs_.end(),
              [](const auto& a, const auto& b) { return a.first.begin < b.first.begin; });

    if (auto problems = p.check_invariants(); !problems.empty()) {
        throw ConstructionError("constructed partition is invalid: " + problems.front());
    }
    return p;
}

bool Partition::in_A(PieceRef piece) const {
    switch (piece.kind) {
        case PieceRef::Kind::Atom:
            return atom_in_A_.at(piece.index);
        case PieceRef::Kind::Segment:
            return segment_in_A_.at(piece.index);
        case PieceRef::Kind::Motif:
            return true;
    }
    return false;
}

Rational Partition::slab_measure(std::uint64_t n) const {
    if (options_.schedule == CellSchedule::Constant || n <= 1) return options_.cell_measure;
    return options_.cell_measure * power_of_two(n - 1);
}

Rational Partition::tail_slot_start(std::uint64_t slot) const {
    const std::uint64_t J = options_.chain_count;
    const Rational& cm = options_.cell_measure;
    if (options_.schedule == CellSchedule::Constant) return tail_start_ + Rational(slot - tail_slot_) * cm;
    const std::uint64_t round = slot / J;
    const std::uint64_t first_round = tail_slot_ / J;
    return tail_start_ + Rational(J) * cm * (power_of_two(round) - power_of_two(first_round)) +
           Rational(slot % J) * cm * power_of_two(round);
}

Cell Partition::cell(CellIndex idx) const {
    if (idx.chain >= chain_count()) throw InvalidChain("invalid chain id " + std::to_string(idx.chain));
    if (idx.n < prefix_length_) return prefix_cells_[idx.chain][idx.n];
    const std::uint64_t slot = (idx.n - 1) * chain_count() + idx.chain;
    const Rational begin = tail_slot_start(slot);
    const Rational m = slab_measure(idx.n);
    return Cell{{}, MotifRun{begin, begin + m}, m};
}

Rational Partition::measure(CellIndex idx) const {
    if (idx.chain >= chain_count()) throw InvalidChain("invalid chain id " + std::to_string(idx.chain));
    if (idx.n < prefix_length_) return prefix_cells_[idx.chain][idx.n].measure;
    return slab_measure(idx.n);
}

FactorSpace Partition::factor_space() const {
    std::vector<FactorSpace::Chain> chains(chain_count());
    for (ChainId j = 0; j < chain_count(); ++j) {
        for (std::uint64_t n = 0; n < prefix_length_; ++n) chains[j].weight_prefix.push_back(measure({j, n}));
        chains[j].weight_tail = options_.schedule == CellSchedule::Constant
                                    ? WeightTail::constant(options_.cell_measure)
                                    : WeightTail::geometric(options_.cell_measure / 2, 2);
    }
    return FactorSpace(std::move(chains));
}

CellIndex Partition::locate(const Fragment& fragment) const {
    auto it = fragment_owner_.upper_bound({fragment.piece, fragment.span.lo});
    if (it != fragment_owner_.begin()) {
        --it;
        if (it->first.first == fragment.piece) {
            const CellIndex owner = it->second;
            for (const Fragment& f : prefix_cells_[owner.chain][owner.n].fragments) {
                if (f.piece == fragment.piece && f.span.lo <= fragment.span.lo && fragment.span.hi <= f.span.hi) {
                    return owner;
                }
            }
        }
    }
    throw InvalidArgument("fragment is not contained in a single cell");
}

CellIndex Partition::locate_motif(const Rational& u) const {
    if (u < 0) throw InvalidArgument("negative motif coordinate");
    if (u < tail_start_) {
        auto it = std::upper_bound(prefix_runs_.begin(), prefix_runs_.end(), u,
                                   [](const Rational& x, const auto& entry) { return x < entry.first.begin; });
        if (it != prefix_runs_.begin()) {
            --it;
            if (u < it->first.end) return it->second;
        }
        throw ConstructionError("motif coordinate not covered by the prefix cells");
    }
    const std::uint64_t J = chain_count();
    const Rational& cm = options_.cell_measure;
    std::uint64_t slot = 0;
    if (options_.schedule == CellSchedule::Constant) {
        slot = tail_slot_ + floor_div(u - tail_start_, cm).convert_to<std::uint64_t>();
    } else {
        std::uint64_t round = tail_slot_ / J;
        while (tail_slot_start((round + 1) * J) <= u) ++round;
        const Rational round_start = tail_slot_start(round * J);
        slot = round * J + floor_div(u - round_start, cm * power_of_two(round)).convert_to<std::uint64_t>();
    }
    return {static_cast<ChainId>(slot % J), 1 + slot / J};
}

std::vector<std::string> Partition::check_invariants() const {
    std::vector<std::string> problems;
    const std::uint64_t J = chain_count();
    auto where = [](ChainId j, std::uint64_t n) {
        return "H(" + std::to_string(j) + "," + std::to_string(n) + ")";
    };

    // (iv) positive finite measures, consistent with the pieces they list
    // (iii) nondecreasing along each chain, including the seam into the tail
    // (ii) cells with n >= 1 lie inside A
    for (ChainId j = 0; j < J; ++j) {
        for (std::uint64_t n = 0; n < prefix_length_; ++n) {
            const Cell& cell = prefix_cells_[j][n];
            Rational sum = 0;
            for (const Fragment& f : cell.fragments) {
                sum += f.measure();
                if (n >= 1 && !in_A(f.piece)) problems.push_back(where(j, n) + " contains a piece outside A");
            }
            if (cell.run) sum += cell.run->end - cell.run->begin;
            if (sum != cell.measure) problems.push_back(where(j, n) + " measure does not match its pieces");
            if (cell.measure <= 0) problems.push_back(where(j, n) + " has nonpositive measure");
        }
        for (std::uint64_t n = 0; n <= prefix_length_; ++n) {
            if (measure({j, n + 1}) < measure({j, n})) problems.push_back(where(j, n + 1) + " is smaller than its predecessor");
        }
    }
    // tail: slabs at n >= prefix_length are motif-only (inside A), measures cm * r^(n-1) >= cm > 0

    // (i) disjoint and exhaustive: every finite piece is covered exactly once
    auto cover = [&](PieceRef piece, const Interval& whole) {
        std::vector<Interval> parts;
        for (ChainId j = 0; j < J; ++j) {
            for (std::uint64_t n = 0; n < prefix_length_; ++n) {
                for (const Fragment& f : prefix_cells_[j][n].fragments) {
                    if (f.piece == piece) parts.push_back(f.span);
                }
            }
        }
        std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        Rational at = whole.lo;
        for (const Interval& iv : parts) {
            if (iv.lo != at) {
                problems.push_back("piece " + describe(whole) + " is not covered exactly once");
                return;
            }
            at = iv.hi;
        }
        if (at != whole.hi) problems.push_back("piece " + describe(whole) + " is not fully covered");
    };
    for (std::size_t i = 0; i < space_.atoms().size(); ++i) cover({PieceRef::Kind::Atom, i}, {0, space_.atoms()[i]});
    for (std::size_t i = 0; i < space_.segments().size(); ++i) cover({PieceRef::Kind::Segment, i}, space_.segments()[i]);

    // the motif is covered by the prefix runs on [0, tail_start) and by the
    // slabs from there on, which are contiguous by construction
    Rational at = 0;
    for (const auto& [run, owner] : prefix_runs_) {
        if (run.begin != at) {
            problems.push_back("motif coverage gap or overlap at u = " + format_rational(at));
            break;
        }
        at = run.end;
    }
    if (at != tail_start_) problems.push_back("prefix runs do not reach the tail start");
    return problems;
}

std::string Partition::serialize() const {
    const std::uint64_t J = chain_count();
    std::string out = "partition chains=" + std::to_string(J) + " cell_measure=" +
                      format_rational(options_.cell_measure) + " schedule=" +
                      (options_.schedule == CellSchedule::Constant ? "constant" : "doubling") +
                      " prefix_cells=" + std::to_string(prefix_length_) + "\n";
    out += "z0 " + format_complex(z0_) + "\n";
    const Rational c = space_.motif_period_measure();
    auto run_text = [&](const MotifRun& run) {
        // spell out absolute intervals for short runs
        std::string s;
        Rational u = run.begin;
        int pieces = 0;
        while (u < run.end && pieces < 16) {
            const Rational x = space_.motif_position(u);
            const cpp_int period = floor_div(u, c);
            Rational within = u - Rational(period) * c;
            Rational remaining_in_element = 0;
            for (const Interval& iv : space_.motif()->pattern) {
                if (within < iv.length()) {
                    remaining_in_element = iv.length() - within;
                    break;
                }
                within -= iv.length();
            }
            const Rational step = std::min(remaining_in_element, Rational(run.end - u));
            s += (pieces ? "; " : "") + describe({x, x + step});
            u += step;
            ++pieces;
        }
        if (u < run.end) return "motif[" + format_rational(run.begin) + "," + format_rational(run.end) + ")";
        return s;
    };
    for (ChainId j = 0; j < J; ++j) {
        out += "chain " + std::to_string(j) + "\n";
        for (std::uint64_t n = 0; n < prefix_length_; ++n) {
            const Cell& cell = prefix_cells_[j][n];
            out += "  cell " + std::to_string(n) + " measure=" + format_rational(cell.measure) + " :";
            bool first = true;
            for (const Fragment& f : cell.fragments) {
                out += first ? " " : "; ";
                first = false;
                if (f.piece.kind == PieceRef::Kind::Atom) {
                    out += "atom " + std::to_string(f.piece.index);
                } else {
                    out += describe(f.span);
                }
            }
            if (cell.run) out += (first ? " " : "; ") + run_text(*cell.run);
            out += "\n";
        }
    }
    out += "tail from_slot=" + std::to_string(tail_slot_) + " motif_offset=" + format_rational(tail_start_) +
           " slab_measure=" + format_rational(options_.cell_measure) +
           (options_.schedule == CellSchedule::Doubling ? "*2^(n-1)" : "") +
           " periods_per_slab=" + format_rational(options_.cell_measure / c) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// P, Q, T

namespace {

// Integral of a piecewise function along the motif over coordinates [0, u).
ExactComplex motif_primitive(const BaseSpace& space, const PiecewiseFunction& g, const Rational& u) {
    const auto& pattern = space.motif()->pattern;
    const Rational c = space.motif_period_measure();
    ExactComplex per_period;
    for (std::size_t e = 0; e < pattern.size(); ++e) per_period += g.motif_values()[e] * pattern[e].length();
    const cpp_int periods = floor_div(u, c);
    Rational r = u - Rational(periods) * c;
    ExactComplex out = per_period * Rational(periods);
    for (std::size_t e = 0; e < pattern.size() && r > 0; ++e) {
        const Rational take = std::min(r, pattern[e].length());
        out += g.motif_values()[e] * take;
        r -= take;
    }
    return out;
}

const ExactComplex& step_value(const StepFunction& s, CellIndex idx) {
    if (idx.n >= s.cells.valid_below) {
        throw MisalignedFunction("step function is undefined on cell (" + std::to_string(idx.chain) + "," +
                                 std::to_string(idx.n) + ")");
    }
    return s.cells.function.exact_value(idx);
}

std::uint64_t explicit_length(const Partition& partition, const BaseFunction& g) {
    if (const auto* s = std::get_if<StepFunction>(&g)) {
        return std::max<std::uint64_t>(partition.prefix_length(), s->cells.function.max_prefix_length());
    }
    return partition.prefix_length();
}

void check_shape(const Partition& partition, const BaseFunction& g) {
    if (const auto* s = std::get_if<StepFunction>(&g)) {
        if (s->cells.function.chain_count() != partition.chain_count()) {
            throw MismatchedSpaces("step function and partition have different chain counts");
        }
    } else {
        // constructing a checked copy validates the piece counts
        const auto& f = std::get<PiecewiseFunction>(g);
        (void)PiecewiseFunction(partition.space(), f.atom_values(), f.segment_values(), f.motif_values());
    }
}

ExactComplex average(const Partition& partition, const BaseFunction& g, CellIndex idx) {
    const Cell cell = partition.cell(idx);
    return integrate(partition, g, cell) / cell.measure;
}

}  // namespace

ExactComplex integrate(const Partition& partition, const BaseFunction& g, const Cell& cell) {
    ExactComplex total;
    if (const auto* f = std::get_if<PiecewiseFunction>(&g)) {
        for (const Fragment& frag : cell.fragments) total += f->value(frag.piece) * frag.measure();
        if (cell.run) {
            total += motif_primitive(partition.space(), *f, cell.run->end) -
                     motif_primitive(partition.space(), *f, cell.run->begin);
        }
        return total;
    }
    const auto& s = std::get<StepFunction>(g);
    for (const Fragment& frag : cell.fragments) total += step_value(s, partition.locate(frag)) * frag.measure();
    if (cell.run) {
        Rational u = cell.run->begin;
        while (u < cell.run->end) {
            const CellIndex owner = partition.locate_motif(u);
            const Cell owner_cell = partition.cell(owner);
            const Rational stop = std::min(cell.run->end, owner_cell.run->end);
            total += step_value(s, owner) * (stop - u);
            u = stop;
        }
    }
    return total;
}

CellFunction project_P(const Partition& partition, const BaseFunction& g) {
    check_shape(partition, g);
    if (const auto* s = std::get_if<StepFunction>(&g); s && s->cells.bounded()) {
        throw MisalignedFunction("P needs a step function defined on every cell");
    }
    const std::uint64_t len = explicit_length(partition, g);
    std::vector<CellFunction::Chain> out(partition.chain_count());
    for (ChainId j = 0; j < partition.chain_count(); ++j) {
        for (std::uint64_t n = 0; n < len; ++n) out[j].prefix.push_back(average(partition, g, {j, n}));
        // every later cell has the same average: a whole number of motif periods,
        // or a cell on which the step function takes its tail value
        out[j].tail = ValueTail::constant(average(partition, g, {j, len}));
    }
    return CellFunction(std::move(out));
}

StepFunction embed_Q(const Partition& partition, const CellFunction& v) {
    if (v.chain_count() != partition.chain_count()) {
        throw MismatchedSpaces("function and partition have different chain counts");
    }
    return StepFunction{WindowedFunction{v}};
}

StepFunction apply_T_base(const Partition& partition, const BaseFunction& g, std::uint64_t horizon) {
    check_shape(partition, g);
    const std::size_t J = partition.chain_count();
    std::uint64_t len = std::max(horizon, explicit_length(partition, g));
    bool exact_tail = true;
    if (const auto* s = std::get_if<StepFunction>(&g); s && s->cells.bounded()) {
        if (s->cells.valid_below == 0) throw MisalignedFunction("step function has an empty window");
        len = std::min(horizon, s->cells.valid_below - 1);
        exact_tail = false;
    } else {
        for (ChainId j = 0; j < J && exact_tail; ++j) {
            exact_tail = average(partition, g, {j, len + 1}).is_zero();
        }
    }
    std::vector<CellFunction::Chain> out(J);
    for (ChainId j = 0; j < J; ++j) {
        out[j].prefix.reserve(len);
        for (std::uint64_t n = 0; n < len; ++n) {
            ExactComplex value = average(partition, g, {j, n + 1});
            out[j].prefix.push_back(psi(n + 1) == 1 ? value : -value);
        }
    }
    return StepFunction{WindowedFunction{CellFunction(std::move(out)), exact_tail ? WindowedFunction::kUnbounded : len}};
}

double norm_L1_base(const Partition& partition, const BaseFunction& g) {
    check_shape(partition, g);
    const BaseSpace& space = partition.space();
    if (const auto* f = std::get_if<PiecewiseFunction>(&g)) {
        if (!f->zero_on_motif()) return std::numeric_limits<double>::infinity();
        CompensatedSum total;
        for (std::size_t i = 0; i < space.atoms().size(); ++i) {
            total.add(space.atoms()[i].convert_to<double>() * std::abs(f->atom_values()[i].to_complex()));
        }
        for (std::size_t i = 0; i < space.segments().size(); ++i) {
            total.add(space.segments()[i].length().convert_to<double>() * std::abs(f->segment_values()[i].to_complex()));
        }
        return total.value();
    }
    const auto& s = std::get<StepFunction>(g);
    if (s.cells.bounded()) throw MisalignedFunction("norm of a step function with a bounded window");
    if (!s.cells.function.has_zero_tails()) return std::numeric_limits<double>::infinity();
    CompensatedSum total;
    for (ChainId j = 0; j < partition.chain_count(); ++j) {
        for (std::uint64_t n = 0; n < s.cells.function.prefix_length(j); ++n) {
            const Cell cell = partition.cell({j, n});
            // measure re-derived from the pieces, not from the partition's bookkeeping
            Rational m = 0;
            for (const Fragment& f : cell.fragments) m += f.measure();
            if (cell.run) m += cell.run->end - cell.run->begin;
            total.add(m.convert_to<double>() * std::abs(s.cells.function.value({j, n})));
        }
    }
    return total.value();
}

double norm_Linf_base(const Partition& partition, const BaseFunction& g) {
    check_shape(partition, g);
    double sup = 0.0;
    if (const auto* f = std::get_if<PiecewiseFunction>(&g)) {
        for (const auto* values : {&f->atom_values(), &f->segment_values(), &f->motif_values()}) {
            for (const auto& z : *values) sup = std::max(sup, std::abs(z.to_complex()));
        }
        return sup;
    }
    const auto& s = std::get<StepFunction>(g);
    for (ChainId j = 0; j < partition.chain_count(); ++j) {
        const std::uint64_t len = s.cells.bounded()
                                      ? s.cells.valid_below
                                      : s.cells.function.prefix_length(j);
        for (std::uint64_t n = 0; n < len; ++n) sup = std::max(sup, std::abs(s.cells.function.value({j, n})));
        if (!s.cells.bounded()) sup = std::max(sup, std::abs(s.cells.function.tail_value(j)));
    }
    return sup;
}

FactorizationReport verify_factorization(const Partition& partition, const BaseFunction& g, std::uint64_t k_max) {
    if (k_max == 0) throw InvalidArgument("k_max must be at least 1");
    FactorizationReport report;
    report.k_max = k_max;
    const CellFunction v = project_P(partition, g);
    const std::uint64_t compare = explicit_length(partition, g) + 8;
    report.cells_compared = compare * partition.chain_count();

    const std::size_t J = partition.chain_count();
    std::vector<std::vector<CompensatedComplexSum>> running(J, std::vector<CompensatedComplexSum>(compare));
    BaseFunction current = g;
    for (std::uint64_t k = 1; k <= k_max; ++k) {
        StepFunction next = apply_T_base(partition, current, compare + k_max - k + 1);
        for (ChainId j = 0; j < J; ++j) {
            for (std::uint64_t n = 0; n < compare; ++n) {
                const ExactComplex& via_T = next.cells.function.exact_value({j, n});
                const ExactComplex via_S = iterate_value_exact(v, {j, n}, k);
                ++report.checks;
                if (via_T == via_S) ++report.exact_matches;
                const Complex t = via_T.to_complex();
                const Complex s = via_S.to_complex();
                if (std::abs(t - s) > kFactorizationTolerance) report.iterate_mismatches.push_back({{j, n}, k, t, s});
                running[j][n].add(t);
                const Complex avg_T = running[j][n].value() / static_cast<double>(k);
                const Complex avg_S = cesaro_naive(v, {j, n}, k);
                if (std::abs(avg_T - avg_S) > kFactorizationTolerance) {
                    report.average_mismatches.push_back({{j, n}, k, avg_T, avg_S});
                }
            }
        }
        current = std::move(next);
    }
    report.pass = report.iterate_mismatches.empty() && report.average_mismatches.empty();
    return report;
}

}  // namespace dscex
