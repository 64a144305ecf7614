#include "specleak/fuzz/fuzz.hpp"

#include <chrono>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "specleak/error.hpp"
#include "specleak/util.hpp"

namespace specleak::fuzz {

using nlohmann::json;

namespace {

struct Outcome {
  coverage::CoverageMap feedback;
  coverage::CoverageMap lp;
  coverage::CoverageMap progress;
  std::vector<detect::WindowLeak> leaks;
};

Outcome assess(const Pipeline& p, const CampaignConfig& cfg, const TestInput& in) {
  const auto e = evaluate(p, in.bytes, cfg.vulns, cfg.max_cycles);
  Outcome o;
  const bool progress = cfg.mode == coverage::Kind::Lp && cfg.lp_feedback == LpFeedback::Progress;
  o.lp = coverage::lp_coverage(e.run.waveform, e.analysis.mst.windows, p.pdlc, progress ? &o.progress : nullptr);
  if (cfg.mode == coverage::Kind::Toggle) {
    o.feedback = coverage::toggle_coverage(e.run.waveform);
  } else if (!progress) {
    o.feedback = o.lp;
  }
  o.leaks = e.analysis.leaks;
  return o;
}

std::vector<Outcome> assess_all(const Pipeline& p, const CampaignConfig& cfg, const std::vector<TestInput>& batch) {
  std::vector<Outcome> out(batch.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(batch.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = assess(p, cfg, batch[i]);
    return out;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned k = 0; k < workers; ++k) {
    threads.emplace_back([&, k] {
      try {
        for (std::size_t i = k; i < batch.size(); i += workers) out[i] = assess(p, cfg, batch[i]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

class Coordinator {
public:
  Coordinator(const CampaignConfig& cfg, const pdlc::PdlcResult& pdlc, CampaignResult& r,
              const std::function<void(const std::string&)>& log)
      : cfg_(cfg), pdlc_(pdlc), r_(r), log_(log) {
    r_.accumulated.kind = cfg.mode;
    r_.lp_accumulated.kind = coverage::Kind::Lp;
  }

  // Returns true when the campaign should stop.
  bool admit(const TestInput& in, Outcome o, std::uint64_t iteration, bool seed) {
    ++r_.simulations;
    if (cfg_.mode == coverage::Kind::Lp && cfg_.lp_feedback == LpFeedback::Frontier) {
      o.feedback = coverage::restrict_to_frontier(o.feedback, pdlc_, r_.lp_accumulated.activated);
    } else if (cfg_.mode == coverage::Kind::Lp && cfg_.lp_feedback == LpFeedback::Progress) {
      o.feedback = coverage::drop_activated(o.progress, r_.lp_accumulated.activated);
    }
    const bool gain = coverage::is_interesting(o.feedback, r_.accumulated);
    const bool leak = !o.leaks.empty();
    const auto covered_before = r_.lp_accumulated.activated.size();
    coverage::merge_into(r_.lp_accumulated, o.lp);
    if (r_.lp_accumulated.activated.size() != covered_before) {
      if (r_.series.back().iteration == iteration) {
        r_.series.back().covered_pdlc = r_.lp_accumulated.activated.size();
      } else {
        r_.series.push_back({iteration, r_.lp_accumulated.activated.size()});
      }
    }
    if (leak && !reported_.count(in.id)) {
      reported_.insert(in.id);
      r_.reports.push_back({in.id, o.leaks, detect::kCwe});
      if (!r_.first_leak_iteration) r_.first_leak_iteration = iteration;
      if (log_) log_("iteration " + std::to_string(iteration) + ": leak in input " + in.id);
    }
    if ((seed || gain || leak) && !index_.count(in.id)) {
      index_[in.id] = r_.corpus.size();
      CorpusEntry e{in, o.feedback, o.lp, leak, iteration, {}};
      if (gain) e.last_gain = iteration;
      r_.corpus.push_back(std::move(e));
      coverage::merge_into(r_.accumulated, o.feedback);
    }
    if (gain && !in.parent.empty()) {
      auto it = index_.find(in.parent);
      if (it != index_.end()) r_.corpus[it->second].last_gain = iteration;
    }
    if (gain && log_ && !seed) {
      log_("iteration " + std::to_string(iteration) + ": coverage gain, " +
           std::to_string(r_.lp_accumulated.activated.size()) + "/" + std::to_string(r_.pdlc_total) + " PDLCs active");
    }
    if (leak && cfg_.stop_on_leak) return true;
    if (cfg_.stop_at_covered && r_.lp_accumulated.activated.size() >= *cfg_.stop_at_covered) return true;
    return false;
  }

  // Round robin; an entry that gained coverage in the last 100 iterations is
  // picked twice in a row.
  std::size_t pick(std::uint64_t iteration) {
    if (cursor_ >= r_.corpus.size()) cursor_ = 0;
    const auto& e = r_.corpus[cursor_];
    const unsigned times = e.last_gain && iteration - *e.last_gain <= 100 ? 2 : 1;
    const auto chosen = cursor_;
    if (++used_ >= times) {
      used_ = 0;
      ++cursor_;
    }
    return chosen;
  }

private:
  const CampaignConfig& cfg_;
  const pdlc::PdlcResult& pdlc_;
  CampaignResult& r_;
  const std::function<void(const std::string&)>& log_;
  std::unordered_map<std::string, std::size_t> index_;
  std::set<std::string> reported_;
  std::size_t cursor_ = 0;
  unsigned used_ = 0;
};

} // namespace

const char* to_string(LpFeedback f) {
  switch (f) {
  case LpFeedback::All: return "all";
  case LpFeedback::Frontier: return "frontier";
  default: return "progress";
  }
}

LpFeedback lp_feedback_from_string(std::string_view s) {
  if (s == "all") return LpFeedback::All;
  if (s == "frontier") return LpFeedback::Frontier;
  if (s == "progress") return LpFeedback::Progress;
  throw ConfigError("unknown LP feedback '" + std::string(s) + "' (expected all, frontier or progress)");
}

CampaignResult run_campaign(const Pipeline& pipeline, const CampaignConfig& config,
                            const std::function<void(const std::string&)>& log) {
  if (config.workers < 1) throw ConfigError("workers must be at least 1");
  if (pipeline.imem_bytes() < 2) throw ConfigError("design has no instruction memory");
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

  CampaignResult r;
  r.pdlc_total = pipeline.pdlc.paths.size();
  r.series.push_back({0, 0});
  Coordinator coord(config, pipeline.pdlc, r, log);
  Rng rng(config.rng_seed);
  const InputLimits limits{2, pipeline.imem_bytes()};

  auto seeds = make_seeds(SeedKind::Random, config.random_seeds, rng, limits, config.random_seed_len);
  for (auto& s : make_seeds(SeedKind::Special, config.special_seeds, rng, limits)) seeds.push_back(std::move(s));
  if (seeds.empty()) throw ConfigError("campaign needs at least one seed");

  bool stop = false;
  const auto seed_outcomes = assess_all(pipeline, config, seeds);
  for (std::size_t i = 0; i < seeds.size() && !stop; ++i) stop = coord.admit(seeds[i], seed_outcomes[i], 0, true);

  std::uint64_t iteration = 0;
  while (!stop && iteration < config.budget) {
    if (config.wall_seconds && elapsed() >= *config.wall_seconds) break;
    const auto n = std::min<std::uint64_t>(config.workers, config.budget - iteration);
    std::vector<TestInput> batch;
    for (std::uint64_t k = 0; k < n; ++k) batch.push_back(mutate(r.corpus[coord.pick(iteration + k + 1)].input, rng, limits));
    const auto outcomes = assess_all(pipeline, config, batch);
    for (std::size_t k = 0; k < batch.size() && !stop; ++k) {
      ++iteration;
      stop = coord.admit(batch[k], outcomes[k], iteration, false);
    }
  }
  r.iterations = iteration;
  if (r.series.back().iteration != iteration) r.series.push_back({iteration, r.lp_accumulated.activated.size()});
  r.wall_seconds = elapsed();
  return r;
}

void write_campaign(const CampaignResult& r, const CampaignConfig& config, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const auto corpus_dir = dir / "corpus";
  const auto reports_dir = dir / "reports";
  for (const auto& [sub, ext] : {std::pair{corpus_dir, ".bin"}, std::pair{reports_dir, ".json"}}) {
    fs::create_directories(sub);
    for (const auto& f : fs::directory_iterator(sub)) {
      if (f.is_regular_file() && f.path().extension() == ext) fs::remove(f.path());
    }
  }
  json entries = json::array();
  for (const auto& e : r.corpus) {
    write_binary_file(corpus_dir / (e.input.id + ".bin"), e.input.bytes);
    entries.push_back({{"id", e.input.id},
                       {"parent", e.input.parent},
                       {"origin", e.input.origin},
                       {"admitted_at", e.admitted_at},
                       {"leak", e.leak},
                       {"bytes", e.input.bytes.size()}});
  }
  for (const auto& rep : r.reports) detect::save_report(rep, reports_dir / (rep.input_id + ".json"));
  write_text_file(dir / "coverage.csv", coverage::coverage_csv(r.series));
  json cfg = {{"mode", coverage::to_string(config.mode)},
              {"budget", config.budget},
              {"workers", config.workers},
              {"rng_seed", config.rng_seed},
              {"vulns", sim::format_vuln_list(config.vulns)},
              {"stop_on_leak", config.stop_on_leak},
              {"lp_feedback", to_string(config.lp_feedback)},
              {"random_seeds", config.random_seeds},
              {"special_seeds", config.special_seeds},
              {"max_cycles", config.max_cycles}};
  if (config.wall_seconds) cfg["wall_seconds"] = *config.wall_seconds;
  json doc = {{"format_version", kFormatVersion},
              {"config", cfg},
              {"iterations", r.iterations},
              {"simulations", r.simulations},
              {"leaks_found", r.reports.size()},
              {"first_leak_iteration", r.first_leak_iteration ? json(*r.first_leak_iteration) : json(nullptr)},
              {"covered_pdlc", r.lp_accumulated.activated.size()},
              {"pdlc_total", r.pdlc_total},
              {"accumulated", json::parse(coverage::export_coverage(r.accumulated))},
              {"corpus", entries}};
  write_text_file(dir / "campaign.json", doc.dump(1) + "\n");
}

std::optional<std::uint64_t> iterations_to_reach(const std::vector<coverage::CoveragePoint>& series,
                                                 std::size_t covered) {
  for (const auto& p : series) {
    if (p.covered_pdlc >= covered) return p.iteration;
  }
  return std::nullopt;
}

} // namespace specleak::fuzz
