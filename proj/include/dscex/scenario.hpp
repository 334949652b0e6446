#pragma once

// Scenario files: flat `key = value` lines grouped under [section] headers,
// '#' starts a comment. Sections:
//
//   [scenario]  name, seed, samples
//   [space]     chains, weight (uniform), chain (repeatable, core-space text form),
//               check_monotone
//   [function]  source (cells | base), value (constant), chain (repeatable)
//   [cesaro]    t_min, t_max, z0, start (repeatable, "j:n" or "*:n"), exact, l_max
//   [base]      atoms, atom_values, segments, segment_values, motif_start,
//               motif_period, motif_pattern, motif_values, epsilon, chains,
//               cell_measure, schedule (constant | doubling), directions, radii
//
// Intervals are written lo:hi, lists are comma separated. With source = base
// the factor space and v = P f come from the constructed partition.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dscex/base_space.hpp"
#include "dscex/core_space.hpp"

namespace dscex {

struct BaseScenario {
    BaseSpace space;
    PiecewiseFunction f;
    Rational epsilon{1, 2};
    PartitionOptions options;
    unsigned directions = kDefaultDirections;
    unsigned radii = kDefaultRadii;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    std::uint64_t samples = 1000;

    std::optional<FactorSpace> space;
    std::optional<CellFunction> function;
    bool function_from_base = false;

    unsigned t_min = 4;
    unsigned t_max = 20;
    std::optional<ExactComplex> z0;
    std::vector<CellIndex> starts;
    bool exact = false;
    unsigned l_max = 8;

    std::optional<BaseScenario> base;
    // filled by realize()
    std::optional<HalfStripScan> scan;
    std::optional<Partition> partition;

    [[nodiscard]] const FactorSpace& factor_space() const;
    [[nodiscard]] const CellFunction& v() const;
    [[nodiscard]] ExactComplex z0_or_default() const;
};

/// Throws ParseError (with the offending line) for malformed or inconsistent input.
[[nodiscard]] Scenario parse_scenario(std::string_view text);
[[nodiscard]] Scenario load_scenario(const std::string& path);

/// Runs the z0 scan and partition construction when a [base] section is
/// present and derives the space and function where requested. Throws
/// ConstructionError subclasses when the construction is infeasible.
void realize(Scenario& scenario);

/// The built-in canonical scenario: f = 1 on [0, inf) cut into unit intervals
/// (one chain), so v = P f = 1; z0 = 1, start n = 1, t in [2, 8].
[[nodiscard]] Scenario canonical_scenario();

}  // namespace dscex
