#pragma once

#include <random>
#include <string>

#include "specleak/coverage/coverage.hpp"
#include "specleak/fuzz/fuzz.hpp"
#include "specleak/sim/waveform.hpp"

namespace testsupport {

/// Random waveform over 1-12 hierarchical signals (some of them memory
/// elements) of width 1-64, with 1-40 cycles of random value changes.
specleak::sim::Waveform random_waveform(std::mt19937_64& rng);

/// Small random map over path ids p0-p7 and signals s0-s5.
specleak::coverage::CoverageMap random_coverage_map(std::mt19937_64& rng, specleak::coverage::Kind kind);

/// Empty when merge is commutative, associative and idempotent on the
/// triple and the merged map absorbs each operand; otherwise what broke.
std::string merge_law_violation(const specleak::coverage::CoverageMap& a, const specleak::coverage::CoverageMap& b,
                                const specleak::coverage::CoverageMap& c);

/// Empty when `child` obeys the laws of `op` applied to `parent`.
std::string mutation_law_violation(const specleak::fuzz::TestInput& parent, const specleak::fuzz::TestInput& child,
                                   specleak::fuzz::MutationOp op, const specleak::fuzz::InputLimits& limits);

} // namespace testsupport
