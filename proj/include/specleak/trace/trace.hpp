#pragma once

// Speculative window detection over waveforms (the misspeculation table)
// and start/end snapshot discrepancies.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "specleak/error.hpp"
#include "specleak/ifg/ifg.hpp"
#include "specleak/pdlc/pdlc.hpp"
#include "specleak/sim/waveform.hpp"

namespace specleak::trace {

class TraceError : public Error {
public:
  using Error::Error;
};

struct Indicator {
  std::string signal;
  std::uint64_t value = 1;
};

struct IndicatorManifest {
  Indicator start;
  Indicator resolve;
  Indicator mispredict;
  std::string instr_signal;
  unsigned settle_cycles = 2;
};

IndicatorManifest parse_indicators(std::string_view json_text);
IndicatorManifest load_indicators(const std::filesystem::path& path);
std::string export_indicators(const IndicatorManifest& m);

/// Throws ConfigError naming the first indicator signal missing from `w`.
void check_indicators(const IndicatorManifest& m, const sim::Waveform& w);

struct MisspecWindow {
  std::uint64_t id = 0; // consecutive from 1
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  std::uint64_t instruction = 0;
  bool mispredicted = false;

  friend bool operator==(const MisspecWindow&, const MisspecWindow&) = default;
};

struct Mst {
  std::vector<MisspecWindow> windows;
  std::uint64_t unresolved = 0;         // still open when the trace ended
  std::vector<std::uint64_t> anomalies; // cycles with a resolve but no open window, or a nested start
  unsigned instr_width = 32;

  friend bool operator==(const Mst&, const Mst&) = default;
};

/// A window opens where the start indicator becomes asserted and closes at
/// the first later cycle with the resolve indicator asserted.
Mst build_mst(const sim::Waveform& w, const IndicatorManifest& m);

std::vector<MisspecWindow> mispredicted_only(const Mst& mst);

std::string export_mst(const Mst& mst);
Mst import_mst(std::string_view json_text);

/// "ID | Start | End | Instruction | Instruction(Readable)" rows. Without a
/// disassembler the last column repeats the hex encoding.
std::string mst_table(const Mst& mst, const std::function<std::string(std::uint64_t)>& readable = {});

/// Base names of architectural and microarchitectural registers.
struct RegisterSets {
  std::unordered_set<std::string> arch;
  std::unordered_set<std::string> micro;

  static RegisterSets from(const ifg::Ifg& graph, const pdlc::Classification& c);
};

struct SignalChange {
  std::string signal; // waveform name, memories element-wise
  std::uint64_t before = 0;
  std::uint64_t after = 0;

  friend bool operator==(const SignalChange&, const SignalChange&) = default;
};

struct WindowDiff {
  std::uint64_t window_id = 0;
  std::uint64_t before_cycle = 0;
  std::uint64_t after_cycle = 0;
  std::vector<SignalChange> arch;  // waveform order
  std::vector<SignalChange> micro; // waveform order
};

/// Compares cycle start - 1 against end + settle. Signals outside both
/// register sets (wires, ports) are not reported.
WindowDiff window_diff(const sim::Waveform& w, const MisspecWindow& win, unsigned settle, const RegisterSets& regs);

} // namespace specleak::trace
