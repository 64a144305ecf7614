#include "specleak/sim/run.hpp"

#include <sstream>

#include <json.hpp>

#include "specleak/error.hpp"
#include "specleak/sim/vcd.hpp"
#include "specleak/util.hpp"

namespace specleak::sim {

using netlist::SignalId;

const char* to_string(Vuln v) { return v == Vuln::ZenbleedLike ? "zenbleed_like" : "mwait_like"; }

std::set<Vuln> parse_vuln_list(std::string_view text) {
  std::set<Vuln> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = text.substr(start, comma - start);
    if (item == "zenbleed_like") {
      out.insert(Vuln::ZenbleedLike);
    } else if (item == "mwait_like") {
      out.insert(Vuln::MwaitLike);
    } else if (!item.empty()) {
      throw ConfigError("unknown vulnerability flag '" + std::string(item) + "'");
    }
    start = comma + 1;
  }
  return out;
}

std::string format_vuln_list(const std::set<Vuln>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : ",") + std::string(to_string(x));
  return s;
}

namespace {

const char* const kCsrNames[4] = {"csr_zen_en", "csr_mwait_en", "csr_monitor_addr", "csr_mwait_timer"};
const char* const kSlots[] = {"rt_br_", "rt_sb0_", "rt_sb1_", "rt_sb2_", "rt_sb3_", "rt_w_"};

struct Slot {
  SignalId valid, pc, instr, npc;
  std::optional<SignalId> wen, rd, old_value, new_value;
  std::optional<SignalId> cwen, cidx, cold, cnew;
};

class RetireMonitor {
public:
  RetireMonitor(const netlist::Design& d, const std::string& top) : top_(top) {
    auto opt = [&](const std::string& n) { return d.find(top + "." + n); };
    for (const char* prefix : kSlots) {
      const std::string p = prefix;
      auto valid = opt(p + "valid");
      if (!valid) continue;
      Slot s{*valid, d.require(top + "." + p + "pc"), d.require(top + "." + p + "instr"),
             d.require(top + "." + p + "npc"), opt(p + "wen"), opt(p + "rd"), opt(p + "old"), opt(p + "new"),
             opt(p + "cwen"), opt(p + "cidx"), opt(p + "cold"), opt(p + "cnew")};
      slots_.push_back(s);
    }
    pc_ = d.find(top + ".pc");
  }

  bool active() const { return !slots_.empty(); }

  void observe(const Simulator& sim, std::vector<RetireRecord>& log) const {
    std::uint64_t pc = pc_ ? sim.value(*pc_) : 0;
    for (const auto& s : slots_) {
      if (!sim.value(s.valid)) continue;
      RetireRecord r;
      r.cycle = sim.cycle();
      r.pc = sim.value(s.pc);
      r.encoding = sim.value(s.instr);
      if (s.wen && sim.value(*s.wen)) {
        r.writes.push_back({top_ + ".regfile[" + std::to_string(sim.value(*s.rd)) + "]", sim.value(*s.old_value),
                            sim.value(*s.new_value)});
      }
      if (s.cwen && sim.value(*s.cwen)) {
        r.writes.push_back({top_ + "." + kCsrNames[sim.value(*s.cidx) & 3], sim.value(*s.cold), sim.value(*s.cnew)});
      }
      const std::uint64_t npc = sim.value(s.npc);
      if (pc_ && npc != pc) {
        r.writes.push_back({top_ + ".pc", pc, npc});
        pc = npc;
      }
      log.push_back(std::move(r));
    }
  }

private:
  std::string top_;
  std::vector<Slot> slots_;
  std::optional<SignalId> pc_;
};

} // namespace

RunResult run(const Schedule& schedule, const SimConfig& config) {
  const auto& d = *schedule.design;
  const std::string& top = d.top;
  if (config.max_cycles < 1) throw ConfigError("max_cycles must be at least 1");
  if (config.program.size() % 2 != 0) throw ConfigError("program image must be a whole number of 16-bit words");

  Simulator sim(schedule);
  if (auto imem = d.find(top + ".imem")) {
    const auto& m = d.signal(*imem);
    if (config.program.size() > m.depth * 2) {
      throw ConfigError("program of " + std::to_string(config.program.size()) + " bytes exceeds instruction memory (" +
                        std::to_string(m.depth * 2) + " bytes)");
    }
    std::vector<std::uint64_t> words;
    for (std::size_t i = 0; i < config.program.size(); i += 2) words.push_back(config.program[i] | config.program[i + 1] << 8);
    sim.load_memory(*imem, words);
  } else if (!config.program.empty()) {
    throw ConfigError("design has no instruction memory '" + top + ".imem'");
  }
  auto set_flag = [&](const char* name, bool on) {
    if (auto id = d.find(top + "." + name)) {
      sim.set_input(*id, on ? 1 : 0);
    } else if (on) {
      throw ConfigError("design has no input '" + top + "." + name + "'");
    }
  };
  set_flag("vuln_zen", config.vuln_flags.count(Vuln::ZenbleedLike) > 0);
  set_flag("vuln_mwait", config.vuln_flags.count(Vuln::MwaitLike) > 0);

  const auto halt = d.find(top + ".halt");
  const auto br_issue = d.find(top + ".x_br_issue");
  const auto x_instr = d.find(top + ".x_instr");
  const auto resolve = d.find(top + ".br_resolve_valid");
  const auto mispredict = d.find(top + ".br_mispredict");
  const RetireMonitor monitor(d, top);

  RunResult result;
  result.waveform = Waveform(sim.wave_signals());
  std::vector<std::uint64_t> row;
  std::optional<GroundTruthWindow> open;
  for (std::uint64_t t = 0; t < config.max_cycles; ++t) {
    sim.settle();
    sim.sample(row);
    result.waveform.append(row);
    if (open && resolve && sim.value(*resolve)) {
      open->end = t;
      open->mispredicted = mispredict && sim.value(*mispredict);
      result.windows.push_back(*open);
      open.reset();
    }
    if (br_issue && sim.value(*br_issue)) {
      open = GroundTruthWindow{t + 1, 0, x_instr ? sim.value(*x_instr) : 0, false};
    }
    if (halt && sim.value(*halt)) {
      result.halted = true;
      break;
    }
    // The last edge would commit state the waveform never shows; leave it out
    // so the log and the final snapshot agree.
    if (t + 1 == config.max_cycles) break;
    monitor.observe(sim, result.retire_log);
    sim.clock();
  }
  if (config.vcd_out) vcd::save_vcd(result.waveform, *config.vcd_out);
  if (config.retire_log_out) write_text_file(*config.retire_log_out, retire_log_to_jsonl(result.retire_log));
  return result;
}

std::string retire_log_to_jsonl(const std::vector<RetireRecord>& log) {
  std::string out;
  for (const auto& r : log) {
    nlohmann::json writes = nlohmann::json::array();
    for (const auto& w : r.writes) writes.push_back({{"reg", w.reg}, {"old", w.old_value}, {"new", w.new_value}});
    nlohmann::json j = {{"format_version", kFormatVersion},
                        {"cycle", r.cycle},
                        {"pc", r.pc},
                        {"encoding", r.encoding},
                        {"writes", writes}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<RetireRecord> parse_retire_log(std::string_view jsonl) {
  std::vector<RetireRecord> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RetireRecord r;
      r.cycle = j.at("cycle").get<std::uint64_t>();
      r.pc = j.at("pc").get<std::uint64_t>();
      r.encoding = j.at("encoding").get<std::uint64_t>();
      for (const auto& w : j.at("writes")) {
        r.writes.push_back({w.at("reg").get<std::string>(), w.at("old").get<std::uint64_t>(),
                            w.at("new").get<std::uint64_t>()});
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed retire log line: ") + e.what());
    }
  }
  return out;
}

} // namespace specleak::sim
