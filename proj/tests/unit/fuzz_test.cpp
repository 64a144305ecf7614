#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "specleak/fuzz/fuzz.hpp"
#include "specleak/util.hpp"
#include "support/generators.hpp"
#include "support/toycpu.hpp"

using namespace specleak;
using fuzz::Rng;
using testsupport::toycpu;

namespace {

std::string read_tree(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& f : std::filesystem::recursive_directory_iterator(dir)) {
    if (f.is_regular_file()) files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) {
    out += std::filesystem::relative(f, dir).string() + "\n";
    out += read_text_file(f);
  }
  return out;
}

} // namespace

TEST_SUITE("fuzz") {

TEST_CASE("special seeds open mispredicted windows on the clean core") {
  Rng rng(12);
  const fuzz::InputLimits limits{2, toycpu().imem_bytes()};
  const auto seeds = fuzz::make_seeds(fuzz::SeedKind::Special, 60, rng, limits);
  for (const auto& s : seeds) {
    CAPTURE(s.origin);
    const auto e = evaluate(toycpu(), s.bytes, {}, 512);
    CHECK(!trace::mispredicted_only(e.analysis.mst).empty());
    CHECK(e.analysis.leaks.empty());
    CHECK(s.bytes.size() % 2 == 0);
    CHECK(s.bytes.size() <= limits.max_len);
  }
}

TEST_CASE("random seed lengths are clamped") {
  Rng rng(1);
  const fuzz::InputLimits limits{2, 128};
  CHECK(fuzz::make_seeds(fuzz::SeedKind::Random, 1, rng, limits, 0)[0].bytes.size() == 2);
  CHECK(fuzz::make_seeds(fuzz::SeedKind::Random, 1, rng, limits, 1000)[0].bytes.size() == 128);
  CHECK(fuzz::make_seeds(fuzz::SeedKind::Random, 1, rng, limits, 33)[0].bytes.size() == 32);
}

TEST_CASE("seed generation is deterministic") {
  Rng a(77), b(77);
  const fuzz::InputLimits limits{2, 128};
  const auto x = fuzz::make_seeds(fuzz::SeedKind::Special, 9, a, limits);
  const auto y = fuzz::make_seeds(fuzz::SeedKind::Special, 9, b, limits);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].bytes == y[i].bytes);
}

TEST_CASE("mutation laws") {
  Rng rng(5);
  const fuzz::InputLimits limits{2, 128};
  auto parent = fuzz::make_seeds(fuzz::SeedKind::Random, 1, rng, limits, 40)[0];
  std::size_t seen[fuzz::kMutationOps] = {};
  for (int i = 0; i < 3000; ++i) {
    fuzz::MutationOp op;
    const auto child = fuzz::mutate(parent, rng, limits, {}, &op);
    seen[static_cast<int>(op)]++;
    CHECK(testsupport::mutation_law_violation(parent, child, op, limits) == "");
    parent = child;
  }
  for (auto n : seen) CHECK(n > 0);
}

TEST_CASE("mutation never leaves the length bounds") {
  Rng rng(6);
  const fuzz::InputLimits limits{2, 8};
  auto tiny = fuzz::make_input({1, 2}, "", "seed-random");
  for (int i = 0; i < 500; ++i) {
    fuzz::MutationOp op;
    const auto c = fuzz::mutate(tiny, rng, limits, {}, &op);
    CHECK(op != fuzz::MutationOp::WordDelete);
    CHECK(op != fuzz::MutationOp::WordSwap);
    CHECK(c.bytes.size() >= 2);
  }
  auto full = fuzz::make_input(std::vector<std::uint8_t>(8, 0), "", "seed-random");
  for (int i = 0; i < 500; ++i) {
    fuzz::MutationOp op;
    fuzz::mutate(full, rng, limits, {}, &op);
    CHECK(op != fuzz::MutationOp::WordClone);
  }
}

TEST_CASE("mutation frequencies follow the weights") {
  Rng rng(2025);
  const fuzz::InputLimits limits{2, 128};
  const auto parent = fuzz::make_seeds(fuzz::SeedKind::Random, 1, rng, limits, 64)[0];
  const fuzz::MutationWeights weights;
  std::size_t seen[fuzz::kMutationOps] = {};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    fuzz::MutationOp op;
    fuzz::mutate(parent, rng, limits, weights, &op);
    seen[static_cast<int>(op)]++;
  }
  unsigned total = 0;
  for (auto w : weights.w) total += w;
  for (std::size_t k = 0; k < fuzz::kMutationOps; ++k) {
    CAPTURE(k);
    CHECK(std::abs(double(seen[k]) / n - double(weights.w[k]) / total) < 0.02);
  }
}

TEST_CASE("zero budget evaluates only the seeds") {
  fuzz::CampaignConfig cfg;
  cfg.budget = 0;
  cfg.random_seeds = 2;
  cfg.special_seeds = 3;
  const auto r = fuzz::run_campaign(toycpu(), cfg);
  CHECK(r.simulations == 5);
  CHECK(r.iterations == 0);
  CHECK(r.corpus.size() == 5);
  coverage::CoverageMap merged;
  for (const auto& e : r.corpus) coverage::merge_into(merged, e.feedback);
  CHECK(merged == r.accumulated);
}

TEST_CASE("campaign bookkeeping") {
  fuzz::CampaignConfig cfg;
  cfg.budget = 300;
  cfg.rng_seed = 3;
  const auto r = fuzz::run_campaign(toycpu(), cfg);
  CHECK(r.simulations == cfg.budget + cfg.random_seeds + cfg.special_seeds);
  CHECK(r.reports.empty());
  // Coverage never shrinks and every admitted mutant brought something new.
  for (std::size_t i = 1; i < r.series.size(); ++i) {
    CHECK(r.series[i - 1].iteration <= r.series[i].iteration);
    CHECK(r.series[i - 1].covered_pdlc <= r.series[i].covered_pdlc);
  }
  coverage::CoverageMap acc;
  for (const auto& e : r.corpus) {
    if (e.input.parent.empty()) {
      CHECK(e.admitted_at == 0);
    } else {
      CHECK((coverage::is_interesting(e.feedback, acc) || e.leak));
    }
    coverage::merge_into(acc, e.feedback);
  }
  CHECK(acc == r.accumulated);
  for (const auto& id : r.lp_accumulated.activated) {
    CHECK(std::any_of(toycpu().pdlc.paths.begin(), toycpu().pdlc.paths.end(),
                      [&](const pdlc::PdlcPath& p) { return p.id == id; }));
  }
}

TEST_CASE("stop on leak and leak replay") {
  fuzz::CampaignConfig cfg;
  cfg.vulns = {sim::Vuln::ZenbleedLike};
  cfg.stop_on_leak = true;
  cfg.budget = 2000;
  const auto r = fuzz::run_campaign(toycpu(), cfg);
  REQUIRE(r.reports.size() == 1);
  const auto& rep = r.reports[0];
  const auto it = std::find_if(r.corpus.begin(), r.corpus.end(), [&](const fuzz::CorpusEntry& e) { return e.input.id == rep.input_id; });
  REQUIRE(it != r.corpus.end());
  CHECK(it->leak);
  const auto again = evaluate(toycpu(), it->input.bytes, cfg.vulns, cfg.max_cycles);
  const detect::LeakReport replay{rep.input_id, again.analysis.leaks, detect::kCwe};
  CHECK(detect::export_report(replay) == detect::export_report(rep));
  bool regfile = false;
  for (const auto& w : rep.windows) {
    for (const auto& c : w.leaked_regs) regfile |= base_signal_name(c.signal) == "cpu.regfile";
  }
  CHECK(regfile);
}

TEST_CASE("single-worker campaigns are reproducible byte for byte") {
  const auto base = std::filesystem::temp_directory_path() / "specleak_fuzz_det";
  std::filesystem::remove_all(base);
  fuzz::CampaignConfig cfg;
  cfg.budget = 150;
  cfg.rng_seed = 42;
  cfg.vulns = {sim::Vuln::ZenbleedLike};
  fuzz::write_campaign(fuzz::run_campaign(toycpu(), cfg), cfg, base / "a");
  fuzz::write_campaign(fuzz::run_campaign(toycpu(), cfg), cfg, base / "b");
  const auto a = read_tree(base / "a");
  CHECK(!a.empty());
  CHECK(a == read_tree(base / "b"));
  CHECK(std::filesystem::exists(base / "a" / "coverage.csv"));
  CHECK(std::filesystem::exists(base / "a" / "campaign.json"));
  CHECK(!std::filesystem::is_empty(base / "a" / "reports"));
  cfg.rng_seed = 43;
  fuzz::write_campaign(fuzz::run_campaign(toycpu(), cfg), cfg, base / "c");
  CHECK(a != read_tree(base / "c"));
  std::filesystem::remove_all(base);
}

TEST_CASE("several workers still admit soundly") {
  fuzz::CampaignConfig cfg;
  cfg.budget = 120;
  cfg.workers = 3;
  const auto r = fuzz::run_campaign(toycpu(), cfg);
  CHECK(r.simulations == cfg.budget + cfg.random_seeds + cfg.special_seeds);
  CHECK(r.iterations == cfg.budget);
}

TEST_CASE("iterations to reach a coverage level") {
  const std::vector<coverage::CoveragePoint> s = {{0, 0}, {0, 10}, {40, 20}, {90, 30}};
  CHECK(fuzz::iterations_to_reach(s, 10) == 0u);
  CHECK(fuzz::iterations_to_reach(s, 11) == 40u);
  CHECK(fuzz::iterations_to_reach(s, 30) == 90u);
  CHECK(!fuzz::iterations_to_reach(s, 31));
}

}
