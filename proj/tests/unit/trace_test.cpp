#include <doctest.h>

#include <random>

#include "specleak/sim/isa.hpp"
#include "specleak/sim/vcd.hpp"
#include "specleak/trace/trace.hpp"
#include "specleak/util.hpp"
#include "support/fixtures.hpp"
#include "support/programs.hpp"
#include "support/toycpu.hpp"

using namespace specleak;
using testsupport::toycpu;

namespace {

sim::RunResult run_words(const std::vector<std::uint16_t>& words, std::uint64_t cycles = 200,
                         std::set<sim::Vuln> vulns = {}) {
  sim::SimConfig cfg;
  cfg.program = isa::to_bytes(words);
  cfg.max_cycles = cycles;
  cfg.vuln_flags = std::move(vulns);
  return sim::run(toycpu().schedule, cfg);
}

std::vector<std::uint16_t> mispredict_program() {
  using namespace isa;
  return {addi(1, 0, 5), beq(0, 0, 4), addi(2, 0, 7), addi(3, 0, 9), addi(4, 1, 1), addi(5, 0, 3), halt()};
}

} // namespace

TEST_SUITE("trace") {

TEST_CASE("hand-written VCD reconstructs the expected snapshots") {
  const char* text = "$timescale 1ns $end\n"
                     "$scope module t $end\n"
                     "$var wire 1 ! a $end\n$var wire 4 \" b $end\n$var reg 8 # c $end\n"
                     "$upscope $end\n$enddefinitions $end\n"
                     "#0\n$dumpvars\n0!\nb0 \"\nb11111111 #\n$end\n"
                     "#1\n1!\n"
                     "#2\nb1010 \"\n"
                     "#3\n0!\nb1 #\n"
                     "#4\nb0 \"\n";
  const auto w = vcd::parse_vcd(text);
  REQUIRE(w.cycles() == 5);
  const std::uint64_t table[5][3] = {{0, 0, 255}, {1, 0, 255}, {1, 10, 255}, {0, 10, 1}, {0, 0, 1}};
  for (std::uint64_t t = 0; t < 5; ++t) {
    const auto snap = w.snapshot(t);
    for (int s = 0; s < 3; ++s) CHECK(snap[w.require(std::string("t.") + "abc"[s])] == table[t][s]);
  }
}

TEST_CASE("indicator manifest parses and names real signals") {
  const auto m = trace::load_indicators(testsupport::fixture("toycpu_indicators.json"));
  CHECK(m.start.signal == "cpu.spec_active");
  CHECK(m.settle_cycles == 2);
  CHECK(trace::parse_indicators(trace::export_indicators(m)).instr_signal == m.instr_signal);
  auto bad = m;
  bad.resolve.signal = "cpu.nope";
  const auto run = run_words({isa::halt()}, 10);
  CHECK_THROWS_AS(trace::check_indicators(bad, run.waveform), ConfigError);
  CHECK_THROWS_AS(trace::parse_indicators("{\"start\":{}}"), ConfigError);
}

TEST_CASE("straight-line program has an empty table") {
  using namespace isa;
  const auto run = run_words({addi(1, 0, 1), addi(2, 1, 1), sw(2, 0, 3), lw(3, 0, 3), halt()});
  const auto mst = trace::build_mst(run.waveform, toycpu().indicators);
  CHECK(mst.windows.empty());
  CHECK(mst.unresolved == 0);
  CHECK(mst.anomalies.empty());
}

TEST_CASE("taken branch mispredicted by the cold predictor gives one row") {
  const auto run = run_words(mispredict_program());
  const auto mst = trace::build_mst(run.waveform, toycpu().indicators);
  REQUIRE(mst.windows.size() == 1);
  REQUIRE(run.windows.size() == 1);
  CHECK(mst.windows[0].id == 1);
  CHECK(mst.windows[0].mispredicted);
  CHECK(mst.windows[0].start == run.windows[0].start);
  CHECK(mst.windows[0].end == run.windows[0].end);
  CHECK(mst.windows[0].instruction == isa::beq(0, 0, 4));
}

TEST_CASE("table boundaries equal simulator ground truth") {
  std::mt19937_64 rng(2024);
  std::size_t windows = 0, mispredicted = 0;
  for (int i = 0; i < 400; ++i) {
    CAPTURE(i);
    sim::SimConfig cfg;
    cfg.program = i % 2 ? testsupport::branchy_program(rng, 8 + rng() % 57) : testsupport::random_program(rng, 64);
    cfg.max_cycles = 400;
    const auto run = sim::run(toycpu().schedule, cfg);
    const auto mst = trace::build_mst(run.waveform, toycpu().indicators);
    REQUIRE(mst.windows.size() == run.windows.size());
    CHECK(mst.anomalies.empty());
    for (std::size_t k = 0; k < mst.windows.size(); ++k) {
      CHECK(mst.windows[k].id == k + 1);
      CHECK(mst.windows[k].start == run.windows[k].start);
      CHECK(mst.windows[k].end == run.windows[k].end);
      CHECK(mst.windows[k].mispredicted == run.windows[k].mispredicted);
      CHECK(mst.windows[k].instruction == run.windows[k].instruction);
      CHECK(mst.windows[k].start < mst.windows[k].end);
      if (k) CHECK(mst.windows[k - 1].end < mst.windows[k].start);
      mispredicted += mst.windows[k].mispredicted;
    }
    windows += mst.windows.size();
  }
  CHECK(windows > 1000);
  CHECK(mispredicted > 100);
}

TEST_CASE("resolve without an open window is an anomaly and open windows are counted") {
  sim::Waveform w({{"s", 1, false}, {"r", 1, false}, {"m", 1, false}, {"i", 8, false}});
  // cycle:          0  1  2  3  4  5  6
  const int s[] = {0, 0, 1, 1, 0, 1, 1};
  const int r[] = {1, 0, 0, 1, 0, 0, 0};
  for (int t = 0; t < 7; ++t) w.append({std::uint64_t(s[t]), std::uint64_t(r[t]), 1, std::uint64_t(t)});
  trace::IndicatorManifest m{{"s", 1}, {"r", 1}, {"m", 1}, "i", 0};
  const auto mst = trace::build_mst(w, m);
  REQUIRE(mst.windows.size() == 1);
  CHECK(mst.windows[0].start == 2);
  CHECK(mst.windows[0].end == 3);
  CHECK(mst.windows[0].instruction == 2);
  CHECK(mst.anomalies == std::vector<std::uint64_t>{0});
  CHECK(mst.unresolved == 1);
  CHECK(trace::import_mst(trace::export_mst(mst)) == mst);
}

TEST_CASE("text export follows the misspeculation table columns") {
  trace::Mst mst;
  mst.instr_width = 32;
  mst.windows = {{1, 34594, 34625, 0xFBEC52E3, true}, {2, 89991, 90121, 0xFB6F42E3, true}};
  const auto text = trace::mst_table(mst);
  CHECK(text ==
        "ID | Start | End | Instruction | Instruction(Readable)\n"
        "1 | 34594 | 34625 | FBEC52E3 | FBEC52E3\n"
        "2 | 89991 | 90121 | FB6F42E3 | FB6F42E3\n");
  mst.instr_width = 16;
  mst.windows = {{1, 4, 10, isa::beq(0, 0, 4), true}};
  const auto toy = trace::mst_table(mst, [](std::uint64_t e) { return isa::disassemble(static_cast<std::uint16_t>(e)); });
  CHECK(toy.find("1 | 4 | 10 | 9004 | " + isa::disassemble(isa::beq(0, 0, 4))) != std::string::npos);
}

TEST_CASE("window with no activity has an empty diff") {
  sim::Waveform w({{"a.r", 4, true}, {"a.w", 4, false}});
  for (int t = 0; t < 10; ++t) w.append({3, std::uint64_t(t)});
  trace::RegisterSets regs;
  regs.arch.insert("a.r");
  const auto d = trace::window_diff(w, {1, 2, 5, 0, true}, 2, regs);
  CHECK(d.arch.empty());
  CHECK(d.micro.empty());
  CHECK(d.before_cycle == 1);
  CHECK(d.after_cycle == 7);
}

TEST_CASE("window past the trace end is rejected by id") {
  sim::Waveform w({{"a.r", 4, true}});
  for (int t = 0; t < 10; ++t) w.append({0});
  try {
    trace::window_diff(w, {7, 3, 8, 0, true}, 2, {});
    FAIL("expected an error");
  } catch (const trace::TraceError& e) {
    CHECK(std::string(e.what()).find("window 7") != std::string::npos);
  }
  CHECK_THROWS_AS(trace::window_diff(w, {3, 0, 4, 0, true}, 0, {}), trace::TraceError);
}

TEST_CASE("clean rollback leaves no architectural difference") {
  const auto run = run_words({isa::beq(0, 0, 4), isa::addi(2, 0, 7), isa::addi(3, 0, 9), isa::nop(), isa::nop(),
                              isa::halt()});
  const auto mst = trace::build_mst(run.waveform, toycpu().indicators);
  REQUIRE(mst.windows.size() == 1);
  const auto d = trace::window_diff(run.waveform, mst.windows[0], 2, toycpu().regs);
  for (const auto& c : d.arch) CHECK(c.signal == "cpu.pc"); // only the branch's own commit
  CHECK(!d.micro.empty());
}

TEST_CASE("zenbleed-like trigger shows the victim register in the architectural diff") {
  using namespace isa;
  const auto run = run_words({addi(1, 0, 1), csrrw(0, 1, kZenEn), beq(0, 0, 4), addi(2, 0, 7), addi(3, 0, 9),
                              nop(), halt()},
                             200, {sim::Vuln::ZenbleedLike});
  const auto mst = trace::build_mst(run.waveform, toycpu().indicators);
  REQUIRE(mst.windows.size() == 1);
  const auto d = trace::window_diff(run.waveform, mst.windows[0], 2, toycpu().regs);
  bool r2 = false;
  for (const auto& c : d.arch) r2 |= c.signal == "cpu.regfile[2]" && c.before == 0 && c.after == 7;
  CHECK(r2);
}

TEST_CASE("a signal is reported exactly when its two snapshots differ") {
  std::mt19937_64 rng(9);
  const auto& regs = toycpu().regs;
  for (int i = 0; i < 30; ++i) {
    sim::SimConfig cfg;
    cfg.program = testsupport::branchy_program(rng, 40);
    cfg.max_cycles = 200;
    const auto run = sim::run(toycpu().schedule, cfg);
    const auto& w = run.waveform;
    if (w.cycles() < 10) continue;
    for (int k = 0; k < 20; ++k) {
      const std::uint64_t start = 1 + rng() % (w.cycles() - 5);
      const std::uint64_t end = start + 1 + rng() % (w.cycles() - start - 3);
      const auto d = trace::window_diff(w, {1, start, end, 0, true}, 2, regs);
      std::set<std::string> reported;
      for (const auto& c : d.arch) reported.insert(c.signal);
      for (const auto& c : d.micro) reported.insert(c.signal);
      for (std::size_t s = 0; s < w.signals().size(); ++s) {
        const auto& name = w.signals()[s].name;
        const std::string base(base_signal_name(name));
        if (!regs.arch.count(base) && !regs.micro.count(base)) continue;
        CHECK((w.value(s, start - 1) != w.value(s, end + 2)) == (reported.count(name) == 1));
      }
    }
  }
}

TEST_CASE("snapshot reconstruction agrees with full replay") {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 10; ++i) {
    const auto prog = testsupport::branchy_program(rng, 50);
    sim::Simulator sim(toycpu().schedule);
    const auto words = isa::to_words(prog);
    sim.load_memory(toycpu().design().require("cpu.imem"), std::vector<std::uint64_t>(words.begin(), words.end()));
    std::vector<std::vector<std::uint64_t>> rows;
    std::vector<std::uint64_t> row;
    sim::Waveform w(sim.wave_signals());
    for (int t = 0; t < 300; ++t) {
      sim.settle();
      sim.sample(row);
      rows.push_back(row);
      w.append(row);
      sim.clock();
    }
    for (int k = 0; k < 100; ++k) {
      const auto t = rng() % 300;
      CHECK(w.snapshot(t) == rows[t]);
    }
  }
}

}
