#pragma once

// Direct leakage detection: architectural changes across a mispredicted
// window that no retirement accounts for, attributed to PDLC paths.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specleak/pdlc/pdlc.hpp"
#include "specleak/sim/run.hpp"
#include "specleak/trace/trace.hpp"

namespace specleak::detect {

inline constexpr const char* kCwe = "CWE-1342";

struct WindowLeak {
  trace::MisspecWindow window;
  std::vector<trace::SignalChange> leaked_regs;
  std::vector<std::string> root_causes; // PDLC path ids, in PDLC file order
  bool unexplained = false;             // no PDLC path accounts for the leak
};

/// Retirements recorded in [start - 1, end + settle) are visible in the
/// diff; any of them writing the same (register, value) explains the change.
std::optional<WindowLeak> detect_leaks(const trace::WindowDiff& diff, const trace::MisspecWindow& win,
                                       const std::vector<sim::RetireRecord>& retire_log,
                                       const pdlc::PdlcResult& pdlc, unsigned settle);

struct LeakReport {
  std::string input_id;
  std::vector<WindowLeak> windows; // window id order
  std::string cwe = kCwe;
};

std::string export_report(const LeakReport& r);
LeakReport import_report(std::string_view json_text);
void save_report(const LeakReport& r, const std::filesystem::path& path);
LeakReport load_report(const std::filesystem::path& path);

struct Analysis {
  trace::Mst mst;
  std::vector<trace::WindowDiff> diffs; // mispredicted windows that fit in the trace
  std::vector<WindowLeak> leaks;
  std::uint64_t skipped = 0; // mispredicted windows too close to the trace end
};

/// MST, per-window diffs and leak detection for one simulated input.
Analysis analyze(const sim::Waveform& w, const std::vector<sim::RetireRecord>& retire_log,
                 const trace::IndicatorManifest& indicators, const trace::RegisterSets& regs,
                 const pdlc::PdlcResult& pdlc);

} // namespace specleak::detect
