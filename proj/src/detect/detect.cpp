#include "specleak/detect/detect.hpp"

#include <set>

#include <json.hpp>

#include "specleak/error.hpp"
#include "specleak/util.hpp"

namespace specleak::detect {

using nlohmann::json;

std::optional<WindowLeak> detect_leaks(const trace::WindowDiff& diff, const trace::MisspecWindow& win,
                                       const std::vector<sim::RetireRecord>& retire_log,
                                       const pdlc::PdlcResult& pdlc, unsigned settle) {
  if (diff.window_id != win.id) {
    throw Error("diff belongs to window " + std::to_string(diff.window_id) + ", not window " + std::to_string(win.id));
  }
  if (!win.mispredicted) throw Error("window " + std::to_string(win.id) + " was predicted correctly");

  const std::uint64_t lo = win.start - 1;
  const std::uint64_t hi = win.end + settle;
  std::set<std::pair<std::string, std::uint64_t>> explained;
  for (const auto& r : retire_log) {
    if (r.cycle < lo || r.cycle >= hi) continue;
    for (const auto& wr : r.writes) explained.emplace(wr.reg, wr.new_value);
  }

  WindowLeak leak;
  leak.window = win;
  std::set<std::string> sinks;
  for (const auto& c : diff.arch) {
    if (explained.count({c.signal, c.after})) continue;
    leak.leaked_regs.push_back(c);
    sinks.emplace(base_signal_name(c.signal));
  }
  if (leak.leaked_regs.empty()) return std::nullopt;

  std::set<std::string> sources;
  for (const auto& c : diff.micro) sources.emplace(base_signal_name(c.signal));
  for (const auto& p : pdlc.paths) {
    if (sinks.count(p.sink) && sources.count(p.source)) leak.root_causes.push_back(p.id);
  }
  leak.unexplained = leak.root_causes.empty();
  return leak;
}

namespace {

json change_to_json(const trace::SignalChange& c) { return {{"reg", c.signal}, {"before", c.before}, {"after", c.after}}; }

} // namespace

std::string export_report(const LeakReport& r) {
  json windows = json::array();
  for (const auto& l : r.windows) {
    json regs = json::array();
    for (const auto& c : l.leaked_regs) regs.push_back(change_to_json(c));
    windows.push_back({{"window",
                        {{"id", l.window.id},
                         {"start", l.window.start},
                         {"end", l.window.end},
                         {"instruction", l.window.instruction},
                         {"mispredicted", l.window.mispredicted}}},
                       {"leaked_regs", regs},
                       {"root_causes", l.root_causes},
                       {"unexplained", l.unexplained}});
  }
  json doc = {{"format_version", kFormatVersion}, {"input_id", r.input_id}, {"windows", windows}, {"cwe", r.cwe}};
  return doc.dump(1) + "\n";
}

LeakReport import_report(std::string_view json_text) {
  LeakReport r;
  try {
    const json doc = json::parse(json_text);
    if (doc.value("format_version", 0) != kFormatVersion) throw ConfigError("unsupported report format_version");
    r.input_id = doc.at("input_id").get<std::string>();
    r.cwe = doc.at("cwe").get<std::string>();
    for (const auto& w : doc.at("windows")) {
      WindowLeak l;
      const auto& win = w.at("window");
      l.window = {win.at("id").get<std::uint64_t>(), win.at("start").get<std::uint64_t>(),
                  win.at("end").get<std::uint64_t>(), win.at("instruction").get<std::uint64_t>(),
                  win.at("mispredicted").get<bool>()};
      for (const auto& c : w.at("leaked_regs")) {
        l.leaked_regs.push_back(
            {c.at("reg").get<std::string>(), c.at("before").get<std::uint64_t>(), c.at("after").get<std::uint64_t>()});
      }
      l.root_causes = w.at("root_causes").get<std::vector<std::string>>();
      l.unexplained = w.at("unexplained").get<bool>();
      r.windows.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed leak report: ") + e.what());
  }
  return r;
}

void save_report(const LeakReport& r, const std::filesystem::path& path) { write_text_file(path, export_report(r)); }

LeakReport load_report(const std::filesystem::path& path) { return import_report(read_text_file(path)); }

Analysis analyze(const sim::Waveform& w, const std::vector<sim::RetireRecord>& retire_log,
                 const trace::IndicatorManifest& indicators, const trace::RegisterSets& regs,
                 const pdlc::PdlcResult& pdlc) {
  Analysis a;
  a.mst = trace::build_mst(w, indicators);
  const unsigned settle = indicators.settle_cycles;
  for (const auto& win : a.mst.windows) {
    if (!win.mispredicted) continue;
    if (win.end + settle >= w.cycles()) {
      ++a.skipped;
      continue;
    }
    a.diffs.push_back(trace::window_diff(w, win, settle, regs));
    if (auto leak = detect_leaks(a.diffs.back(), win, retire_log, pdlc, settle)) a.leaks.push_back(std::move(*leak));
  }
  return a;
}

} // namespace specleak::detect
