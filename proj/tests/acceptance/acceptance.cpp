// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Run from the build tree; fixtures are found through
// SPECLEAK_SOURCE_DIR.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "specleak/cli/cli.hpp"
#include "specleak/coverage/coverage.hpp"
#include "specleak/fuzz/fuzz.hpp"
#include "specleak/ifg/ifg.hpp"
#include "specleak/pdlc/pdlc.hpp"
#include "specleak/pipeline.hpp"
#include "specleak/sim/isa.hpp"
#include "specleak/sim/vcd.hpp"
#include "specleak/trace/trace.hpp"
#include "specleak/util.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/graph_oracle.hpp"
#include "support/programs.hpp"
#include "support/ref_isa.hpp"
#include "support/taint_oracle.hpp"
#include "support/toycpu.hpp"

using namespace specleak;
namespace fs = std::filesystem;
using testsupport::toycpu;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string join(const std::vector<std::string>& v, const char* sep = " ") {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("specleak_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1. The two-flop example through the CLI: exact vertex and edge sets.
Verdict listing1_ifg() {
  const auto dir = scratch("ifg");
  std::ostringstream out, err;
  const int code = cli::run({"ifg", "build", "--design", testsupport::fixture("listing1.ntl").string(), "--out",
                             (dir / "ifg.json").string()},
                            out, err);
  if (code != cli::kExitOk) return {false, "ifg build exited " + std::to_string(code) + ": " + err.str()};
  const auto g = ifg::load_ifg(dir / "ifg.json");
  const std::set<std::string> want_vertices = {"top.clk",    "top.i",      "top.o",     "top.q1",    "top.df1.d",
                                               "top.df1.clk", "top.df1.q", "top.df2.d", "top.df2.clk", "top.df2.q"};
  const std::set<std::pair<std::string, std::string>> want_edges = {
      {"top.clk", "top.df1.clk"}, {"top.clk", "top.df2.clk"}, {"top.i", "top.df1.d"},
      {"top.df1.d", "top.df1.q"}, {"top.df1.q", "top.q1"},    {"top.q1", "top.df2.d"},
      {"top.df2.d", "top.df2.q"}, {"top.df2.q", "top.o"},
  };
  std::set<std::string> vertices;
  for (const auto& v : g.vertices()) vertices.insert(v.name);
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto& e : g.edges()) edges.emplace(g.vertex(e.src).name, g.vertex(e.dst).name);
  const bool ok = vertices == want_vertices && edges == want_edges;
  return {ok, std::to_string(vertices.size()) + " vertices, " + std::to_string(edges.size()) + " edges" +
                  (ok ? ", both sets exact" : ", sets differ")};
}

// 2. Reverse search against forward brute force on random DAGs.
Verdict dag_oracle() {
  std::mt19937_64 rng(20240501);
  int equal = 0;
  std::size_t paths = 0, largest = 0;
  for (int i = 0; i < 100; ++i) {
    const auto lg = testsupport::random_dag(rng, 200, 600);
    const auto r = pdlc::extract_pdlc(lg.graph, lg.arch, lg.micro, {lg.graph.size() + 1, 10'000'000});
    std::set<std::vector<std::string>> got;
    for (const auto& p : r.paths) got.insert(p.chain);
    const bool same = !r.truncated && got == testsupport::forward_paths(lg);
    equal += same;
    paths += got.size();
    largest = std::max(largest, lg.graph.size());
  }
  return {equal == 100, std::to_string(equal) + "/100 path sets equal (" + std::to_string(paths) +
                            " paths, largest graph " + std::to_string(largest) + " vertices)"};
}

// Committed state at cycle `t`. Register, CSR and pc writes land when an
// instruction leaves W, so they match the reference after every retirement
// logged before `t`. Stores write dmem one stage earlier, so dmem also
// includes the instruction retiring at `t`.
std::string state_mismatch(const sim::Waveform& w, std::uint64_t t, const testsupport::RefState& regs,
                           const testsupport::RefState& mem) {
  for (unsigned r = 0; r < 8; ++r) {
    const auto name = "cpu.regfile[" + std::to_string(r) + "]";
    if (w.value(name, t) != regs.regs[r]) return name;
  }
  if (w.value("cpu.pc", t) != regs.pc) return "cpu.pc";
  static const char* const kCsrs[] = {"cpu.csr_zen_en", "cpu.csr_mwait_en", "cpu.csr_monitor_addr",
                                      "cpu.csr_mwait_timer"};
  for (unsigned c = 0; c < 4; ++c) {
    if (w.value(kCsrs[c], t) != regs.csr[c]) return kCsrs[c];
  }
  for (unsigned a = 0; a < 64; ++a) {
    const auto name = "cpu.dmem[" + std::to_string(a) + "]";
    if (w.value(name, t) != mem.dmem[a]) return name;
  }
  return {};
}

// 3. Clean core: no leak reports, retirement stream and committed state
// equal to the reference interpreter.
Verdict clean_core() {
  std::mt19937_64 rng(77);
  int reports = 0, mismatches = 0, halted = 0;
  std::size_t windows = 0;
  std::string first;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t words = 1 + rng() % 40;
    const auto program =
        i % 2 ? testsupport::branchy_program(rng, words) : testsupport::random_program(rng, words);
    const auto e = evaluate(toycpu(), program, {}, 512);
    if (!e.analysis.leaks.empty()) ++reports;
    windows += trace::mispredicted_only(e.analysis.mst).size();
    const auto& w = e.run.waveform;
    // Last cycle with no open speculation whose retirements are all logged.
    std::uint64_t t = w.cycles() >= 2 ? w.cycles() - 2 : 0;
    while (t > 0 && w.value("cpu.spec_active", t) != 0) --t;
    std::size_t before = 0, through = 0;
    for (const auto& r : e.run.retire_log) {
      before += r.cycle < t;
      through += r.cycle <= t;
    }
    testsupport::RefInterpreter ref(program);
    const auto steps = ref.run(e.run.retire_log.size());
    std::string why;
    if (steps.size() != e.run.retire_log.size()) why = "retire count";
    for (std::size_t k = 0; why.empty() && k < steps.size(); ++k) {
      const auto& a = steps[k];
      const auto& b = e.run.retire_log[k];
      bool same = a.pc == b.pc && a.encoding == b.encoding && a.writes.size() == b.writes.size();
      for (std::size_t j = 0; same && j < a.writes.size(); ++j) {
        same = a.writes[j].reg == b.writes[j].reg && a.writes[j].old_value == b.writes[j].old_value &&
               a.writes[j].new_value == b.writes[j].new_value;
      }
      if (!same) why = "retirement " + std::to_string(k);
    }
    if (why.empty()) {
      testsupport::RefInterpreter regs(program), mem(program);
      regs.run(before);
      mem.run(through);
      why = state_mismatch(w, t, regs.state(), mem.state());
    }
    if (why.empty() && e.run.halted && !ref.state().halted) why = "halt";
    halted += e.run.halted;
    if (!why.empty()) {
      ++mismatches;
      if (first.empty()) first = "program " + std::to_string(i) + ": " + why;
    }
  }
  return {reports == 0 && mismatches == 0,
          std::to_string(reports) + " leak reports, " + std::to_string(mismatches) +
              " reference mismatches over 10000 programs (" + std::to_string(halted) + " halted, " +
              std::to_string(windows) + " mispredicted windows)" + (first.empty() ? "" : "; first: " + first)};
}

// 4. Planted bugs found by LP-guided campaigns with the expected register and
// root-cause source.
Verdict planted_bugs() {
  const auto& p = toycpu();
  std::map<std::string, const pdlc::PdlcPath*> by_id;
  for (const auto& path : p.pdlc.paths) by_id[path.id] = &path;
  struct Bug {
    sim::Vuln vuln;
    std::string reg_prefix;
    std::function<bool(const std::string&)> source_ok;
  };
  const std::vector<Bug> bugs = {
      {sim::Vuln::ZenbleedLike, "cpu.regfile", [](const std::string& s) { return s.rfind("cpu.shadow_", 0) == 0; }},
      {sim::Vuln::MwaitLike, "cpu.csr_mwait_timer",
       [](const std::string& s) { return s == "cpu.dc_tag" || s == "cpu.dc_valid"; }},
  };
  bool pass = true;
  std::vector<std::string> parts;
  for (const auto& bug : bugs) {
    int found = 0;
    std::vector<std::string> firsts;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      fuzz::CampaignConfig cfg;
      cfg.mode = coverage::Kind::Lp;
      cfg.budget = 5000;
      cfg.rng_seed = seed;
      cfg.vulns = {bug.vuln};
      const auto r = fuzz::run_campaign(p, cfg);
      bool hit = false;
      for (const auto& rep : r.reports) {
        for (const auto& wl : rep.windows) {
          const bool reg = std::any_of(wl.leaked_regs.begin(), wl.leaked_regs.end(), [&](const trace::SignalChange& c) {
            return c.signal.rfind(bug.reg_prefix, 0) == 0;
          });
          const bool root = std::any_of(wl.root_causes.begin(), wl.root_causes.end(), [&](const std::string& id) {
            auto it = by_id.find(id);
            return it != by_id.end() && bug.source_ok(it->second->source);
          });
          hit = hit || (reg && root);
        }
      }
      found += hit;
      firsts.push_back(r.first_leak_iteration ? std::to_string(*r.first_leak_iteration) : "-");
    }
    pass = pass && found >= 4;
    parts.push_back(std::string(sim::to_string(bug.vuln)) + " " + std::to_string(found) + "/5 (first leak at " +
                    join(firsts, ",") + ")");
  }
  return {pass, join(parts, "; ")};
}

// 5. Iterations to a fixed activation threshold, LP against toggle feedback.
Verdict lp_vs_toggle() {
  const auto& p = toycpu();
  const double fraction = 0.6;
  const std::size_t target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(p.pdlc.paths.size())));
  int lp_wins = 0;
  std::vector<double> ratios;
  std::vector<std::string> rows;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::optional<std::uint64_t> reach[2];
    for (int m = 0; m < 2; ++m) {
      fuzz::CampaignConfig cfg;
      cfg.mode = m == 0 ? coverage::Kind::Lp : coverage::Kind::Toggle;
      cfg.budget = 5000;
      cfg.rng_seed = seed;
      cfg.stop_at_covered = target;
      reach[m] = fuzz::iterations_to_reach(fuzz::run_campaign(p, cfg).series, target);
    }
    // Not reaching the target within the budget counts as budget + 1.
    const double lp = reach[0] ? static_cast<double>(*reach[0]) : 5001.0;
    const double tg = reach[1] ? static_cast<double>(*reach[1]) : 5001.0;
    lp_wins += lp < tg;
    ratios.push_back(tg / std::max(lp, 1.0));
    rows.push_back("seed " + std::to_string(seed) + " lp " + (reach[0] ? std::to_string(*reach[0]) : ">5000") +
                   " toggle " + (reach[1] ? std::to_string(*reach[1]) : ">5000"));
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios[ratios.size() / 2];
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", median);
  return {lp_wins >= 4 && median >= 1.5, "target " + std::to_string(target) + "/" +
                                              std::to_string(p.pdlc.paths.size()) + " PDLCs; LP faster in " +
                                              std::to_string(lp_wins) + "/5, median toggle/LP ratio " + buf + " (" +
                                              join(rows, "; ") + ")"};
}

// 6. Window boundaries against the simulator's own instrumentation, and the
// text table schema.
Verdict mst_ground_truth() {
  std::mt19937_64 rng(606);
  fuzz::Rng seed_rng(606);
  std::vector<std::vector<std::uint8_t>> corpus;
  for (int i = 0; i < 300; ++i) corpus.push_back(testsupport::branchy_program(rng, 1 + rng() % 40));
  for (int i = 0; i < 300; ++i) corpus.push_back(testsupport::random_program(rng, 1 + rng() % 40));
  for (const auto& s : fuzz::make_seeds(fuzz::SeedKind::Special, 100, seed_rng, {2, toycpu().imem_bytes()})) {
    corpus.push_back(s.bytes);
  }
  const std::vector<std::set<sim::Vuln>> configs = {{}, {sim::Vuln::ZenbleedLike}, {sim::Vuln::MwaitLike}};
  const std::regex row(R"(^\d+ \| \d+ \| \d+ \| [0-9A-F]{4} \| \S.*$)");
  std::size_t runs = 0, windows = 0, mismatched = 0, bad_rows = 0;
  bool header_ok = true;
  for (const auto& vulns : configs) {
    for (const auto& program : corpus) {
      const auto e = evaluate(toycpu(), program, vulns, 512);
      ++runs;
      const auto& mst = e.analysis.mst;
      bool same = mst.windows.size() == e.run.windows.size() && mst.anomalies.empty();
      for (std::size_t k = 0; same && k < mst.windows.size(); ++k) {
        const auto& a = mst.windows[k];
        const auto& b = e.run.windows[k];
        same = a.start == b.start && a.end == b.end && a.mispredicted == b.mispredicted && a.instruction == b.instruction;
      }
      mismatched += !same;
      windows += mst.windows.size();
      const auto table = trace::mst_table(mst, [](std::uint64_t x) { return isa::disassemble(static_cast<std::uint16_t>(x)); });
      std::istringstream lines(table);
      std::string line;
      std::getline(lines, line);
      header_ok = header_ok && line == "ID | Start | End | Instruction | Instruction(Readable)";
      while (std::getline(lines, line)) bad_rows += !std::regex_match(line, row);
    }
  }
  return {mismatched == 0 && header_ok && bad_rows == 0 && windows > 0,
          std::to_string(runs) + " runs, " + std::to_string(windows) + " windows, " + std::to_string(mismatched) +
              " runs with boundary mismatches, " + std::to_string(bad_rows) + " malformed table rows" +
              (header_ok ? "" : ", bad header")};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& f : fs::recursive_directory_iterator(dir)) {
    if (f.is_regular_file()) out[fs::relative(f.path(), dir).string()] = read_text_file(f.path());
  }
  return out;
}

// 7. Single-worker reruns write byte-identical campaign directories.
Verdict determinism() {
  struct Case {
    coverage::Kind mode;
    std::set<sim::Vuln> vulns;
    std::uint64_t seed;
  };
  const std::vector<Case> cases = {{coverage::Kind::Lp, {}, 3},
                                   {coverage::Kind::Toggle, {}, 4},
                                   {coverage::Kind::Lp, {sim::Vuln::ZenbleedLike}, 5},
                                   {coverage::Kind::Lp, {sim::Vuln::MwaitLike}, 2}};
  const auto base = scratch("determinism");
  int identical = 0;
  std::size_t files = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    fuzz::CampaignConfig cfg;
    cfg.mode = cases[i].mode;
    cfg.vulns = cases[i].vulns;
    cfg.rng_seed = cases[i].seed;
    cfg.budget = 400;
    std::map<std::string, std::string> trees[2];
    for (int run = 0; run < 2; ++run) {
      const auto dir = base / (std::to_string(i) + "_" + std::to_string(run));
      fuzz::write_campaign(fuzz::run_campaign(toycpu(), cfg), cfg, dir);
      trees[run] = read_tree(dir);
    }
    identical += trees[0] == trees[1];
    files += trees[0].size();
  }
  return {identical == static_cast<int>(cases.size()),
          std::to_string(identical) + "/" + std::to_string(cases.size()) + " campaign pairs identical (" +
              std::to_string(files) + " files compared)"};
}

// 8. Property suites, 1000 cases each.
Verdict properties() {
  std::vector<std::string> failures;
  std::mt19937_64 rng(8080);

  int merge_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto kind = i % 2 ? coverage::Kind::Lp : coverage::Kind::Toggle;
    const auto a = testsupport::random_coverage_map(rng, kind);
    const auto b = testsupport::random_coverage_map(rng, kind);
    const auto c = testsupport::random_coverage_map(rng, kind);
    const auto why = testsupport::merge_law_violation(a, b, c);
    if (!why.empty()) failures.push_back("merge: " + why);
    ++merge_cases;
  }

  int mutation_cases = 0;
  fuzz::Rng frng(8081);
  const fuzz::InputLimits limits{2, toycpu().imem_bytes()};
  auto parent = fuzz::make_seeds(fuzz::SeedKind::Random, 1, frng, limits, 40)[0];
  for (int i = 0; i < 1000; ++i) {
    fuzz::MutationOp op;
    const auto child = fuzz::mutate(parent, frng, limits, {}, &op);
    const auto why = testsupport::mutation_law_violation(parent, child, op, limits);
    if (!why.empty()) failures.push_back("mutation: " + why);
    parent = child;
    ++mutation_cases;
  }

  int vcd_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto w = testsupport::random_waveform(rng);
    const auto text = vcd::write_vcd(w);
    const auto back = vcd::parse_vcd(text);
    if (!(back == w) || vcd::write_vcd(back) != text) failures.push_back("vcd round trip " + std::to_string(i));
    ++vcd_cases;
  }

  int taint_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const unsigned inputs = 1 + static_cast<unsigned>(rng() % 12);
    const auto v = testsupport::check_ifg_against_taint(testsupport::random_taint_design(rng, inputs));
    if (v) failures.push_back("taint: " + v->input + " reaches " + v->signal);
    ++taint_cases;
  }

  std::string detail = "merge " + std::to_string(merge_cases) + ", mutation " + std::to_string(mutation_cases) +
                       ", vcd " + std::to_string(vcd_cases) + ", ifg-vs-taint " + std::to_string(taint_cases) +
                       " cases; " + std::to_string(failures.size()) + " failures";
  if (!failures.empty()) detail += " (first: " + failures.front() + ")";
  return {failures.empty(), detail};
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria = {
      {"listing-1 IFG", listing1_ifg},           {"PDLC oracle on random DAGs", dag_oracle},
      {"clean core soundness", clean_core},      {"planted bug detection", planted_bugs},
      {"LP vs toggle efficiency", lp_vs_toggle}, {"MST ground truth", mst_ground_truth},
      {"campaign determinism", determinism},     {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto started = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::printf("%s %zu %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
