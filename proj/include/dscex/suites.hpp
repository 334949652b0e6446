#pragma once

// Verification suites behind `dscex verify`. Every suite returns a readable
// report; its last line is the machine row `suite,checks,passed,failed`.
// Output bytes depend only on the scenario and its seed, never on `threads`.

#include <cstdint>
#include <string>
#include <vector>

#include "dscex/scenario.hpp"

namespace dscex {

struct SuiteReport {
    std::string suite;
    std::vector<std::string> lines;
    std::uint64_t checks = 0;
    std::uint64_t passed = 0;

    [[nodiscard]] std::uint64_t failed() const { return checks - passed; }
    void check(const std::string& name, bool ok, const std::string& detail = {});
    void note(const std::string& text);
    void absorb(const SuiteReport& other);
    [[nodiscard]] std::string summary_row() const;
    [[nodiscard]] std::string text() const;
};

[[nodiscard]] const std::vector<std::string>& suite_names();

/// `suite` is one of theorem1, lemmas, norms, residuality, all. The scenario
/// must already be realized. Throws InvalidArgument for an unknown suite.
[[nodiscard]] SuiteReport run_verify(const Scenario& scenario, const std::string& suite, unsigned threads = 1);

/// The unit-interval partition of [0, inf) for f = 3/4 (one chain, unit cells).
[[nodiscard]] Partition unit_interval_partition(std::size_t chains = 1);

}  // namespace dscex
