#pragma once

// Everything derived once per design and shared by analysis, fuzzing and
// the CLI: compiled schedule, IFG, register classes, PDLC list, indicators.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <vector>

#include "specleak/detect/detect.hpp"
#include "specleak/ifg/ifg.hpp"
#include "specleak/netlist/design.hpp"
#include "specleak/pdlc/pdlc.hpp"
#include "specleak/sim/run.hpp"
#include "specleak/sim/simulator.hpp"
#include "specleak/trace/trace.hpp"

namespace specleak {

struct Pipeline {
  sim::Schedule schedule;
  ifg::Ifg graph;
  pdlc::Classification classes;
  trace::RegisterSets regs;
  pdlc::PdlcResult pdlc;
  trace::IndicatorManifest indicators;

  const netlist::Design& design() const { return *schedule.design; }
  /// Largest instruction image the design accepts, in bytes.
  std::size_t imem_bytes() const;
};

netlist::Design load_design(const std::filesystem::path& path);

/// Extracts the PDLC list when none is given; a given list must only name
/// signals of the design. Indicator signals must exist as well.
Pipeline build_pipeline(const netlist::Design& design, const pdlc::RegisterManifest& arch,
                        const trace::IndicatorManifest& indicators,
                        std::optional<pdlc::PdlcResult> pdlc = std::nullopt);

Pipeline load_pipeline(const std::filesystem::path& design, const std::filesystem::path& arch,
                       const std::filesystem::path& indicators,
                       const std::optional<std::filesystem::path>& pdlc = std::nullopt);

struct Evaluation {
  sim::RunResult run;
  detect::Analysis analysis;
};

Evaluation evaluate(const Pipeline& p, const std::vector<std::uint8_t>& program, const std::set<sim::Vuln>& vulns,
                    std::uint64_t max_cycles);

} // namespace specleak
