#include "specleak/trace/trace.hpp"

#include <sstream>

#include <json.hpp>

#include "specleak/util.hpp"

namespace specleak::trace {

using nlohmann::json;

namespace {

Indicator indicator_from(const json& j) { return {j.at("signal").get<std::string>(), j.value("value", std::uint64_t{1})}; }

json indicator_to(const Indicator& i) { return {{"signal", i.signal}, {"value", i.value}}; }

} // namespace

IndicatorManifest parse_indicators(std::string_view json_text) {
  IndicatorManifest m;
  try {
    const json doc = json::parse(json_text);
    m.start = indicator_from(doc.at("start"));
    m.resolve = indicator_from(doc.at("resolve"));
    m.mispredict = indicator_from(doc.at("mispredict"));
    m.instr_signal = doc.at("instr").get<std::string>();
    const auto settle = doc.value("settle_cycles", 2);
    if (settle < 0) throw ConfigError("settle_cycles must be non-negative");
    m.settle_cycles = static_cast<unsigned>(settle);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed indicator manifest: ") + e.what());
  }
  return m;
}

IndicatorManifest load_indicators(const std::filesystem::path& path) { return parse_indicators(read_text_file(path)); }

std::string export_indicators(const IndicatorManifest& m) {
  json doc = {{"format_version", kFormatVersion},
              {"start", indicator_to(m.start)},
              {"resolve", indicator_to(m.resolve)},
              {"mispredict", indicator_to(m.mispredict)},
              {"instr", m.instr_signal},
              {"settle_cycles", m.settle_cycles}};
  return doc.dump(1) + "\n";
}

void check_indicators(const IndicatorManifest& m, const sim::Waveform& w) {
  for (const auto* name : {&m.start.signal, &m.resolve.signal, &m.mispredict.signal, &m.instr_signal}) {
    if (!w.find(*name)) throw ConfigError("indicator signal '" + *name + "' is not in the waveform");
  }
}

Mst build_mst(const sim::Waveform& w, const IndicatorManifest& m) {
  check_indicators(m, w);
  const auto start = w.require(m.start.signal);
  const auto resolve = w.require(m.resolve.signal);
  const auto mispredict = w.require(m.mispredict.signal);
  const auto instr = w.require(m.instr_signal);

  Mst mst;
  mst.instr_width = w.signals()[instr].width;
  bool open = false;
  bool prev_started = false;
  MisspecWindow cur;
  for (std::uint64_t t = 0; t < w.cycles(); ++t) {
    const bool started = w.value(start, t) == m.start.value;
    const bool resolved = w.value(resolve, t) == m.resolve.value;
    if (resolved) {
      if (open) {
        cur.end = t;
        cur.mispredicted = w.value(mispredict, t) == m.mispredict.value;
        cur.id = mst.windows.size() + 1;
        mst.windows.push_back(cur);
        open = false;
      } else if (!(started && !prev_started)) {
        mst.anomalies.push_back(t);
      }
    }
    if (started && !prev_started) {
      if (open) {
        mst.anomalies.push_back(t);
      } else {
        open = true;
        cur = MisspecWindow{};
        cur.start = t;
        cur.instruction = w.value(instr, t);
      }
    }
    prev_started = started;
  }
  if (open) ++mst.unresolved;
  return mst;
}

std::vector<MisspecWindow> mispredicted_only(const Mst& mst) {
  std::vector<MisspecWindow> out;
  for (const auto& win : mst.windows) {
    if (win.mispredicted) out.push_back(win);
  }
  return out;
}

std::string export_mst(const Mst& mst) {
  json rows = json::array();
  for (const auto& win : mst.windows) {
    rows.push_back({{"id", win.id},
                    {"start", win.start},
                    {"end", win.end},
                    {"instruction", win.instruction},
                    {"mispredicted", win.mispredicted}});
  }
  json doc = {{"format_version", kFormatVersion},
              {"windows", rows},
              {"unresolved", mst.unresolved},
              {"anomalies", mst.anomalies},
              {"instr_width", mst.instr_width}};
  return doc.dump(1) + "\n";
}

Mst import_mst(std::string_view json_text) {
  Mst mst;
  try {
    const json doc = json::parse(json_text);
    if (doc.value("format_version", 0) != kFormatVersion) throw ConfigError("unsupported MST format_version");
    for (const auto& r : doc.at("windows")) {
      mst.windows.push_back({r.at("id").get<std::uint64_t>(), r.at("start").get<std::uint64_t>(),
                             r.at("end").get<std::uint64_t>(), r.at("instruction").get<std::uint64_t>(),
                             r.at("mispredicted").get<bool>()});
    }
    mst.unresolved = doc.at("unresolved").get<std::uint64_t>();
    mst.anomalies = doc.at("anomalies").get<std::vector<std::uint64_t>>();
    mst.instr_width = doc.value("instr_width", 32u);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed MST file: ") + e.what());
  }
  return mst;
}

std::string mst_table(const Mst& mst, const std::function<std::string(std::uint64_t)>& readable) {
  const unsigned digits = (mst.instr_width + 3) / 4;
  std::ostringstream out;
  out << "ID | Start | End | Instruction | Instruction(Readable)\n";
  for (const auto& win : mst.windows) {
    std::string hex = to_hex(win.instruction, digits);
    for (auto& c : hex) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out << win.id << " | " << win.start << " | " << win.end << " | " << hex << " | "
        << (readable ? readable(win.instruction) : hex) << "\n";
  }
  return out.str();
}

RegisterSets RegisterSets::from(const ifg::Ifg& graph, const pdlc::Classification& c) {
  RegisterSets s;
  for (auto v : c.arch) s.arch.insert(graph.vertex(v).name);
  for (auto v : c.micro) s.micro.insert(graph.vertex(v).name);
  return s;
}

WindowDiff window_diff(const sim::Waveform& w, const MisspecWindow& win, unsigned settle, const RegisterSets& regs) {
  if (win.start < 1 || win.end < win.start || win.end + settle >= w.cycles()) {
    throw TraceError("window " + std::to_string(win.id) + " [" + std::to_string(win.start) + ", " +
                     std::to_string(win.end) + "] plus settle " + std::to_string(settle) +
                     " exceeds the trace (" + std::to_string(w.cycles()) + " cycles)");
  }
  WindowDiff d;
  d.window_id = win.id;
  d.before_cycle = win.start - 1;
  d.after_cycle = win.end + settle;
  const auto& sigs = w.signals();
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    const std::string base(base_signal_name(sigs[i].name));
    const bool arch = regs.arch.count(base) != 0;
    if (!arch && regs.micro.count(base) == 0) continue;
    const auto before = w.value(i, d.before_cycle);
    const auto after = w.value(i, d.after_cycle);
    if (before == after) continue;
    (arch ? d.arch : d.micro).push_back({sigs[i].name, before, after});
  }
  return d;
}

} // namespace specleak::trace
