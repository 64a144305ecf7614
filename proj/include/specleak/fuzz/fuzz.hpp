#pragma once

// Coverage-guided mutation fuzzing of instruction-memory images.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "specleak/coverage/coverage.hpp"
#include "specleak/detect/detect.hpp"
#include "specleak/pipeline.hpp"

namespace specleak::fuzz {

using Rng = std::mt19937_64;

enum class MutationOp { BitFlip, ByteFlip, WordSwap, WordDelete, WordClone };
inline constexpr std::size_t kMutationOps = 5;

const char* to_string(MutationOp op);

/// Relative weights, indexed by MutationOp.
struct MutationWeights {
  unsigned w[kMutationOps] = {30, 20, 20, 15, 15};
};

struct InputLimits {
  std::size_t min_len = 2;   // bytes
  std::size_t max_len = 128; // bytes; instruction memory depth x 2
};

struct TestInput {
  std::vector<std::uint8_t> bytes;
  std::string id;     // fnv1a64 of the bytes, 16 hex digits
  std::string parent; // empty for seeds
  std::string origin; // mutation name, or "seed-random" / "seed-special-<template>"
};

std::string input_id(const std::vector<std::uint8_t>& bytes);
TestInput make_input(std::vector<std::uint8_t> bytes, std::string parent, std::string origin);

enum class SeedKind { Random, Special };

/// Random seeds are uniform bytes of `random_len` (clamped to the limits,
/// rounded down to even). Special seeds cycle through three templates that
/// always open a mispredicted window on the toy CPU:
///   a  counted loop whose back edge is trained taken, then falls through
///   b  loop exit through a branch that flips between two jump targets
///   c  call via a linking jump whose return check mismatches at depth
std::vector<TestInput> make_seeds(SeedKind kind, std::size_t n, Rng& rng, const InputLimits& limits,
                                  std::size_t random_len = 32);

/// Applies exactly one weighted operation. Operations that cannot apply at
/// the current length are redrawn.
TestInput mutate(const TestInput& input, Rng& rng, const InputLimits& limits, const MutationWeights& weights = {},
                 MutationOp* applied = nullptr);

/// What an LP-guided campaign treats as new coverage, besides newly
/// activated paths. All: any new toggle bucket of a PDLC signal. Frontier:
/// only buckets of signals on paths not yet activated. Progress: more chain
/// signals of a not yet activated path toggling together in one window.
enum class LpFeedback { All, Frontier, Progress };

const char* to_string(LpFeedback f);
LpFeedback lp_feedback_from_string(std::string_view s);

struct CampaignConfig {
  coverage::Kind mode = coverage::Kind::Lp;
  std::uint64_t budget = 1000;               // mutation iterations after the seeds
  std::optional<double> wall_seconds;        // stops early when exceeded
  unsigned workers = 1;
  std::uint64_t rng_seed = 1;
  std::set<sim::Vuln> vulns;
  bool stop_on_leak = false;
  LpFeedback lp_feedback = LpFeedback::Frontier;
  std::optional<std::size_t> stop_at_covered; // stop once this many PDLCs are activated
  std::size_t random_seeds = 4;
  std::size_t special_seeds = 6;
  std::size_t random_seed_len = 32;
  std::uint64_t max_cycles = 512;
};

struct CorpusEntry {
  TestInput input;
  coverage::CoverageMap feedback; // in the campaign's mode
  coverage::CoverageMap lp;
  bool leak = false;
  std::uint64_t admitted_at = 0;
  std::optional<std::uint64_t> last_gain; // latest iteration this entry or a child gained coverage
};

struct CampaignResult {
  std::vector<CorpusEntry> corpus;
  coverage::CoverageMap accumulated;    // campaign mode
  coverage::CoverageMap lp_accumulated; // always tracked, for the PDLC count
  std::vector<detect::LeakReport> reports;
  std::vector<coverage::CoveragePoint> series;
  std::uint64_t iterations = 0;
  std::uint64_t simulations = 0;
  std::optional<std::uint64_t> first_leak_iteration;
  double wall_seconds = 0;
  std::size_t pdlc_total = 0;
};

/// Seeds are evaluated at iteration 0, mutation k at iteration k. With one
/// worker the result is a function of the pipeline and config only; with
/// more, each batch of `workers` inputs is drawn before any is evaluated.
CampaignResult run_campaign(const Pipeline& pipeline, const CampaignConfig& config,
                            const std::function<void(const std::string&)>& log = {});

/// Writes corpus/, reports/, coverage.csv and campaign.json.
void write_campaign(const CampaignResult& result, const CampaignConfig& config, const std::filesystem::path& dir);

/// First iteration at which `covered` PDLCs were active, if reached.
std::optional<std::uint64_t> iterations_to_reach(const std::vector<coverage::CoveragePoint>& series,
                                                 std::size_t covered);

} // namespace specleak::fuzz
