#pragma once

// Program-driven runs of the toy CPU fixture (or any design following its
// port conventions): instruction image in `<top>.imem`, bug-enable inputs
// `<top>.vuln_zen` / `<top>.vuln_mwait`, halt flag `<top>.halt`, and retire
// slots `<top>.rt_<slot>_*` read by the retirement monitor.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "specleak/sim/simulator.hpp"

namespace specleak::sim {

enum class Vuln { ZenbleedLike, MwaitLike };

const char* to_string(Vuln v);
/// Comma-separated list, e.g. "zenbleed_like,mwait_like"; empty means none.
std::set<Vuln> parse_vuln_list(std::string_view text);
std::string format_vuln_list(const std::set<Vuln>& v);

struct SimConfig {
  std::uint64_t max_cycles = 1000;
  std::vector<std::uint8_t> program;
  std::set<Vuln> vuln_flags;
  std::optional<std::filesystem::path> vcd_out;
  std::optional<std::filesystem::path> retire_log_out;
};

struct ArchWrite {
  std::string reg;
  std::uint64_t old_value = 0;
  std::uint64_t new_value = 0;
};

struct RetireRecord {
  std::uint64_t cycle = 0;
  std::uint64_t pc = 0;
  std::uint64_t encoding = 0;
  std::vector<ArchWrite> writes; // register file, then CSR, then pc
};

/// Speculation window as seen by the simulator's own instrumentation: opens
/// the cycle after a branch issues and closes when that branch resolves.
struct GroundTruthWindow {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  std::uint64_t instruction = 0;
  bool mispredicted = false;
};

struct RunResult {
  Waveform waveform;
  std::vector<RetireRecord> retire_log;
  std::vector<GroundTruthWindow> windows;
  bool halted = false;
};

/// Throws ConfigError for odd-length images or images larger than imem.
RunResult run(const Schedule& schedule, const SimConfig& config);

std::string retire_log_to_jsonl(const std::vector<RetireRecord>& log);
std::vector<RetireRecord> parse_retire_log(std::string_view jsonl);

} // namespace specleak::sim
