#include "specleak/cli/cli.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "specleak/coverage/coverage.hpp"
#include "specleak/detect/detect.hpp"
#include "specleak/error.hpp"
#include "specleak/fuzz/fuzz.hpp"
#include "specleak/ifg/ifg.hpp"
#include "specleak/netlist/parser.hpp"
#include "specleak/pdlc/pdlc.hpp"
#include "specleak/pipeline.hpp"
#include "specleak/sim/isa.hpp"
#include "specleak/sim/run.hpp"
#include "specleak/sim/vcd.hpp"
#include "specleak/trace/trace.hpp"
#include "specleak/util.hpp"

namespace specleak::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  bool verbose = false;
  bool quiet = false;

  std::string design, out, ifg, arch, pdlc, indicators, program, vcd, retire_log, mst_out, input_id, csv;
  std::size_t max_len = pdlc::PathLimits{}.max_len;
  std::size_t max_paths = pdlc::PathLimits{}.max_paths;
  std::uint64_t cycles = 1000;
  std::string vulns;

  std::string coverage_mode = "lp";
  std::string lp_feedback = "frontier";
  std::optional<std::uint64_t> budget;
  std::optional<double> wall;
  unsigned workers = 1;
  std::uint64_t rng_seed = 1;
  bool stop_on_leak = false;
  std::size_t random_seeds = fuzz::CampaignConfig{}.random_seeds;
  std::size_t special_seeds = fuzz::CampaignConfig{}.special_seeds;
  std::uint64_t max_cycles = fuzz::CampaignConfig{}.max_cycles;

  std::vector<std::string> campaigns, reports;
};

using Action = std::function<int(std::ostream&)>;

struct Tool {
  std::unique_ptr<CLI::App> app;
  Options opt;
  Action action;
  std::shared_ptr<spdlog::logger> log;
};

CLI::Option* existing(CLI::Option* o) { return o->check(CLI::ExistingFile); }

void describe_campaign_curve(std::ostream& out, const std::vector<coverage::CoveragePoint>& s) {
  out << "iteration | covered_pdlc\n";
  for (const auto& p : s) out << p.iteration << " | " << p.covered_pdlc << "\n";
}

void build(Tool& t) {
  auto& o = t.opt;
  t.app = std::make_unique<CLI::App>("Speculative-execution direct leakage detection toolkit", "specleak");
  auto& app = *t.app;
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.add_flag("-v,--verbose", o.verbose, "Log debug detail to standard error");
  app.add_flag("-q,--quiet", o.quiet, "Log only warnings and errors");

  auto* elab = app.add_subcommand("elab", "Parse and flatten a netlist, write the elaborated design as JSON");
  existing(elab->add_option("--design", o.design, "Netlist source file")->required());
  elab->add_option("--out", o.out, "Output JSON file")->required();
  elab->callback([&t] {
    t.action = [&t](std::ostream& out) {
      const auto d = load_design(t.opt.design);
      write_text_file(t.opt.out, netlist::design_to_json(d));
      out << d.signals.size() << " signals, " << d.comb.size() << " assignments, " << d.regs.size() << " registers\n";
      return kExitOk;
    };
  });

  auto* ifg = app.add_subcommand("ifg", "Information flow graph commands");
  ifg->require_subcommand(1);
  auto* ifg_build = ifg->add_subcommand("build", "Build the information flow graph of a design");
  existing(ifg_build->add_option("--design", o.design, "Netlist source file")->required());
  ifg_build->add_option("--out", o.out, "Output IFG JSON file")->required();
  ifg_build->callback([&t] {
    t.action = [&t](std::ostream& out) {
      const auto g = ifg::build_ifg(load_design(t.opt.design));
      ifg::save_ifg(g, t.opt.out);
      out << g.size() << " vertices, " << g.edges().size() << " edges\n";
      return kExitOk;
    };
  });

  auto* pdlc_cmd = app.add_subcommand("pdlc", "Potential direct leakage channel commands");
  pdlc_cmd->require_subcommand(1);
  auto* extract = pdlc_cmd->add_subcommand("extract", "Enumerate PDLC paths from micro to architectural registers");
  auto* from_design = existing(extract->add_option("--design", o.design, "Netlist source file (builds the IFG)"));
  auto* from_ifg = existing(extract->add_option("--ifg", o.ifg, "Prebuilt IFG JSON file"));
  from_design->excludes(from_ifg);
  existing(extract->add_option("--arch-manifest", o.arch, "Architectural register manifest (JSON)")->required());
  extract->add_option("--out", o.out, "Output PDLC JSON file")->required();
  extract->add_option("--max-len", o.max_len, "Longest chain in signals")->capture_default_str();
  extract->add_option("--max-paths", o.max_paths, "Stop after this many paths")->capture_default_str();
  extract->callback([&t] {
    t.action = [&t](std::ostream& out) {
      if (t.opt.design.empty() == t.opt.ifg.empty()) throw ConfigError("give exactly one of --design or --ifg");
      const auto g = t.opt.ifg.empty() ? ifg::build_ifg(load_design(t.opt.design)) : ifg::load_ifg(t.opt.ifg);
      const auto cls = pdlc::classify_registers(g, pdlc::load_manifest(t.opt.arch));
      for (const auto& w : cls.warnings) t.log->warn("{}", w);
      const auto r = pdlc::extract_pdlc(g, cls.arch, cls.micro, {t.opt.max_len, t.opt.max_paths});
      for (const auto& w : r.warnings) t.log->warn("{}", w);
      pdlc::save_pdlc(r, t.opt.out);
      out << r.paths.size() << " paths from " << cls.micro.size() << " microarchitectural to " << cls.arch.size()
          << " architectural registers" << (r.truncated ? " (truncated)" : "") << "\n";
      return kExitOk;
    };
  });

  auto* simc = app.add_subcommand("sim", "Simulation commands");
  simc->require_subcommand(1);
  auto* sim_run = simc->add_subcommand("run", "Simulate a program on a design and dump the waveform");
  existing(sim_run->add_option("--design", o.design, "Netlist source file")->required());
  existing(sim_run->add_option("--program", o.program, "Program image (.hex words or raw little-endian bytes)")->required());
  sim_run->add_option("--cycles", o.cycles, "Cycles to simulate unless the program halts")->capture_default_str();
  sim_run->add_option("--vuln", o.vulns, "Planted bugs to enable: zenbleed_like,mwait_like");
  sim_run->add_option("--vcd", o.vcd, "Waveform output (VCD)")->required();
  sim_run->add_option("--retire-log", o.retire_log, "Retirement log output (JSON lines)");
  sim_run->callback([&t] {
    t.action = [&t](std::ostream& out) {
      sim::SimConfig cfg;
      cfg.max_cycles = t.opt.cycles;
      cfg.program = isa::load_program(t.opt.program);
      cfg.vuln_flags = sim::parse_vuln_list(t.opt.vulns);
      cfg.vcd_out = t.opt.vcd;
      if (!t.opt.retire_log.empty()) cfg.retire_log_out = t.opt.retire_log;
      const auto r = sim::run(sim::compile(load_design(t.opt.design)), cfg);
      out << r.waveform.cycles() << " cycles, " << r.retire_log.size() << " instructions retired"
          << (r.halted ? ", halted" : "") << "\n";
      return kExitOk;
    };
  });

  auto* analyze = app.add_subcommand("analyze", "Find speculative windows in a waveform and check them for leaks");
  existing(analyze->add_option("--design", o.design, "Netlist source file")->required());
  existing(analyze->add_option("--vcd", o.vcd, "Waveform from sim run")->required());
  existing(analyze->add_option("--retire-log", o.retire_log, "Retirement log from sim run")->required());
  existing(analyze->add_option("--arch-manifest", o.arch, "Architectural register manifest (JSON)")->required());
  existing(analyze->add_option("--indicators", o.indicators, "Speculation indicator manifest (JSON)")->required());
  existing(analyze->add_option("--pdlc", o.pdlc, "PDLC file; extracted from the design when omitted"));
  analyze->add_option("--out", o.out, "Leak report output (JSON)")->required();
  analyze->add_option("--mst-out", o.mst_out, "Misspeculation table output (JSON)");
  analyze->add_option("--input-id", o.input_id, "Identifier recorded in the report")->capture_default_str();
  analyze->callback([&t] {
    t.action = [&t](std::ostream& out) {
      std::optional<fs::path> pdlc_path;
      if (!t.opt.pdlc.empty()) pdlc_path = t.opt.pdlc;
      const auto p = load_pipeline(t.opt.design, t.opt.arch, t.opt.indicators, pdlc_path);
      const auto w = vcd::load_vcd(t.opt.vcd);
      const auto log = sim::parse_retire_log(read_text_file(t.opt.retire_log));
      const auto a = detect::analyze(w, log, p.indicators, p.regs, p.pdlc);
      if (a.mst.unresolved) t.log->info("{} window(s) still open at trace end", a.mst.unresolved);
      if (!a.mst.anomalies.empty()) t.log->warn("{} resolve(s) without an open window", a.mst.anomalies.size());
      if (a.skipped) t.log->warn("{} mispredicted window(s) too close to the trace end", a.skipped);
      if (!t.opt.mst_out.empty()) write_text_file(t.opt.mst_out, trace::export_mst(a.mst));
      const std::string id = t.opt.input_id.empty() ? fs::path(t.opt.vcd).stem().string() : t.opt.input_id;
      detect::save_report({id, a.leaks, detect::kCwe}, t.opt.out);
      out << trace::mst_table(a.mst, [](std::uint64_t e) { return isa::disassemble(static_cast<std::uint16_t>(e)); });
      out << a.leaks.size() << " leaking window(s) of " << trace::mispredicted_only(a.mst).size() << " mispredicted\n";
      return a.leaks.empty() ? kExitOk : kExitLeaks;
    };
  });

  auto* fz = app.add_subcommand("fuzz", "Run a coverage-guided fuzzing campaign");
  existing(fz->add_option("--design", o.design, "Netlist source file")->required());
  existing(fz->add_option("--pdlc", o.pdlc, "PDLC file from pdlc extract")->required());
  existing(fz->add_option("--arch-manifest", o.arch, "Architectural register manifest (JSON)")->required());
  existing(fz->add_option("--indicators", o.indicators, "Speculation indicator manifest (JSON)")->required());
  fz->add_option("--coverage", o.coverage_mode, "Feedback metric: lp or toggle")
      ->check(CLI::IsMember({"lp", "toggle"}))
      ->capture_default_str();
  fz->add_option("--lp-feedback", o.lp_feedback,
                 "LP novelty besides new paths: frontier (signals of uncovered paths), all, or progress (partial paths)")
      ->check(CLI::IsMember({"frontier", "all", "progress"}))
      ->capture_default_str();
  fz->add_option("--budget", o.budget, "Mutation iterations after the seeds");
  fz->add_option("--wall", o.wall, "Wall-clock limit in seconds");
  fz->add_option("--workers", o.workers, "Parallel simulation workers")->check(CLI::PositiveNumber)->capture_default_str();
  fz->add_option("--rng-seed", o.rng_seed, "Random seed; single-worker campaigns are reproducible from it")
      ->capture_default_str();
  fz->add_option("--out", o.out, "Output directory (corpus/, reports/, coverage.csv, campaign.json)")->required();
  fz->add_option("--vuln", o.vulns, "Planted bugs to enable: zenbleed_like,mwait_like");
  fz->add_flag("--stop-on-leak", o.stop_on_leak, "Stop at the first leaking input");
  fz->add_option("--random-seeds", o.random_seeds, "Number of uniform random seeds")->capture_default_str();
  fz->add_option("--special-seeds", o.special_seeds, "Number of templated seeds with speculative windows")
      ->capture_default_str();
  fz->add_option("--max-cycles", o.max_cycles, "Cycles per simulation unless the program halts")->capture_default_str();
  fz->callback([&t] {
    t.action = [&t](std::ostream& out) {
      const auto& o = t.opt;
      if (!o.budget && !o.wall) throw ConfigError("give --budget or --wall");
      fuzz::CampaignConfig cfg;
      cfg.mode = coverage::kind_from_string(o.coverage_mode);
      cfg.lp_feedback = fuzz::lp_feedback_from_string(o.lp_feedback);
      cfg.budget = o.budget ? *o.budget : std::numeric_limits<std::uint64_t>::max();
      cfg.wall_seconds = o.wall;
      cfg.workers = o.workers;
      cfg.rng_seed = o.rng_seed;
      cfg.vulns = sim::parse_vuln_list(o.vulns);
      cfg.stop_on_leak = o.stop_on_leak;
      cfg.random_seeds = o.random_seeds;
      cfg.special_seeds = o.special_seeds;
      cfg.max_cycles = o.max_cycles;
      const auto p = load_pipeline(o.design, o.arch, o.indicators, fs::path(o.pdlc));
      fs::create_directories(o.out);
      const auto r = fuzz::run_campaign(p, cfg, [&t](const std::string& m) { t.log->info("{}", m); });
      fuzz::write_campaign(r, cfg, o.out);
      t.log->info("campaign took {:.2f} s", r.wall_seconds);
      out << r.iterations << " iterations, " << r.simulations << " simulations, " << r.corpus.size()
          << " corpus entries, " << r.lp_accumulated.activated.size() << "/" << r.pdlc_total << " PDLCs covered, "
          << r.reports.size() << " leaking input(s)\n";
      return r.reports.empty() ? kExitOk : kExitLeaks;
    };
  });

  auto* rep = app.add_subcommand("report", "Render leak reports and coverage curves as text and CSV");
  rep->add_option("--campaign", o.campaigns, "Campaign output directory (repeatable)")->check(CLI::ExistingDirectory);
  rep->add_option("--report", o.reports, "Leak report JSON file (repeatable)")->check(CLI::ExistingFile);
  existing(rep->add_option("--pdlc", o.pdlc, "PDLC file used to print root-cause chains"));
  rep->add_option("--csv", o.csv, "Write coverage curves as campaign,iteration,covered_pdlc_count");
  rep->callback([&t] {
    t.action = [&t](std::ostream& out) {
      const auto& o = t.opt;
      if (o.campaigns.empty() && o.reports.empty()) throw ConfigError("give --campaign or --report");
      std::optional<pdlc::PdlcResult> paths;
      if (!o.pdlc.empty()) paths = pdlc::load_pdlc(o.pdlc);
      std::vector<fs::path> files(o.reports.begin(), o.reports.end());
      std::ostringstream csv;
      csv << "campaign,iteration,covered_pdlc_count\n";
      for (const auto& dir : o.campaigns) {
        const auto series = coverage::parse_coverage_csv(read_text_file(fs::path(dir) / "coverage.csv"));
        out << "== campaign " << dir << "\n";
        describe_campaign_curve(out, series);
        for (const auto& p : series) csv << dir << ',' << p.iteration << ',' << p.covered_pdlc << '\n';
        if (fs::exists(fs::path(dir) / "reports")) {
          std::vector<fs::path> found;
          for (const auto& f : fs::directory_iterator(fs::path(dir) / "reports")) found.push_back(f.path());
          std::sort(found.begin(), found.end());
          files.insert(files.end(), found.begin(), found.end());
        }
      }
      for (const auto& f : files) {
        const auto r = detect::load_report(f);
        out << "== input " << r.input_id << " (" << r.cwe << ")\n";
        for (const auto& w : r.windows) {
          out << "window " << w.window.id << " cycles " << w.window.start << "-" << w.window.end << " branch "
              << isa::disassemble(static_cast<std::uint16_t>(w.window.instruction))
              << (w.unexplained ? " [unexplained]" : "") << "\n";
          for (const auto& c : w.leaked_regs) {
            out << "  leaked " << c.signal << ": " << c.before << " -> " << c.after << "\n";
          }
          for (const auto& id : w.root_causes) {
            out << "  root cause " << id;
            if (paths) {
              for (const auto& p : paths->paths) {
                if (p.id != id) continue;
                out << ":";
                for (const auto& s : p.chain) out << " " << s;
              }
            }
            out << "\n";
          }
        }
      }
      if (!o.csv.empty()) write_text_file(o.csv, csv.str());
      return kExitOk;
    };
  });
}

void collect(const CLI::App* app, const std::string& prefix, std::vector<const CLI::App*>& apps,
             std::vector<std::string>& names) {
  apps.push_back(app);
  names.push_back(prefix);
  for (const auto* sub : app->get_subcommands([](const CLI::App*) { return true; })) {
    collect(sub, prefix.empty() ? sub->get_name() : prefix + " " + sub->get_name(), apps, names);
  }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Tool t;
  build(t);
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  t.log = std::make_shared<spdlog::logger>("specleak", sink);
  t.log->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l msg=\"%v\"");
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    t.app->parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << t.app->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << t.app->help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << t.app->help();
    return kExitError;
  }
  t.log->set_level(t.opt.verbose ? spdlog::level::debug : t.opt.quiet ? spdlog::level::warn : spdlog::level::info);
  if (!t.action) {
    err << t.app->help();
    return kExitError;
  }
  try {
    return t.action(out);
  } catch (const Error& e) {
    t.log->error("{}", e.what());
    return kExitError;
  } catch (const std::filesystem::filesystem_error& e) {
    t.log->error("{}", e.what());
    return kExitError;
  }
}

std::vector<std::string> commands() {
  Tool t;
  build(t);
  std::vector<const CLI::App*> apps;
  std::vector<std::string> names;
  collect(t.app.get(), "", apps, names);
  return names;
}

std::vector<OptionDoc> options() {
  Tool t;
  build(t);
  std::vector<const CLI::App*> apps;
  std::vector<std::string> names;
  collect(t.app.get(), "", apps, names);
  std::vector<OptionDoc> out;
  for (std::size_t i = 0; i < apps.size(); ++i) {
    for (const auto* opt : apps[i]->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
      out.push_back({names[i], opt->get_name(), opt->get_description()});
    }
  }
  return out;
}

std::string help(const std::string& command) {
  std::vector<std::string> args;
  std::istringstream in(command);
  for (std::string w; in >> w;) args.push_back(w);
  args.push_back("--help");
  std::ostringstream out, err;
  run(args, out, err);
  return out.str();
}

} // namespace specleak::cli
