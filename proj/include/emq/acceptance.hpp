#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace emq {

// One release gate.  `detail` carries the failing sub-checks, or the key
// measured numbers when everything passed.
struct CriterionResult {
    int number = 0;
    std::string label;
    bool passed = false;
    std::string detail;
    double runtime_ms = 0.0;
};

// Runs all ten gates in order.  Every tolerance and every anchor expression
// is pinned inside; deterministic for a fixed seed.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 2026);

// One [PASS]/[FAIL] line per gate plus a closing tally.
std::string acceptance_lines(const std::vector<CriterionResult>& results);

}  // namespace emq
