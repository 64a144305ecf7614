#include "specleak/pipeline.hpp"

#include "specleak/error.hpp"
#include "specleak/netlist/parser.hpp"
#include "specleak/util.hpp"

namespace specleak {

std::size_t Pipeline::imem_bytes() const {
  const auto id = design().find(design().top + ".imem");
  return id ? design().signal(*id).depth * 2 : 0;
}

netlist::Design load_design(const std::filesystem::path& path) {
  return netlist::elaborate(netlist::parse_design(read_text_file(path)));
}

Pipeline build_pipeline(const netlist::Design& design, const pdlc::RegisterManifest& arch,
                        const trace::IndicatorManifest& indicators, std::optional<pdlc::PdlcResult> pdlc) {
  Pipeline p;
  p.schedule = sim::compile(design);
  p.graph = ifg::build_ifg(design);
  p.classes = pdlc::classify_registers(p.graph, arch);
  p.regs = trace::RegisterSets::from(p.graph, p.classes);
  if (pdlc) {
    for (const auto& path : pdlc->paths) {
      for (const auto& s : path.chain) {
        if (!p.graph.find(s)) throw ConfigError("PDLC path " + path.id + " names unknown signal '" + s + "'");
      }
    }
    p.pdlc = std::move(*pdlc);
  } else {
    p.pdlc = pdlc::extract_pdlc(p.graph, p.classes.arch, p.classes.micro);
  }
  for (const auto* name :
       {&indicators.start.signal, &indicators.resolve.signal, &indicators.mispredict.signal, &indicators.instr_signal}) {
    if (!design.find(*name)) throw ConfigError("indicator signal '" + *name + "' is not in the design");
  }
  p.indicators = indicators;
  return p;
}

Pipeline load_pipeline(const std::filesystem::path& design, const std::filesystem::path& arch,
                       const std::filesystem::path& indicators, const std::optional<std::filesystem::path>& pdlc) {
  std::optional<pdlc::PdlcResult> paths;
  if (pdlc) paths = pdlc::load_pdlc(*pdlc);
  return build_pipeline(load_design(design), pdlc::load_manifest(arch), trace::load_indicators(indicators),
                        std::move(paths));
}

Evaluation evaluate(const Pipeline& p, const std::vector<std::uint8_t>& program, const std::set<sim::Vuln>& vulns,
                    std::uint64_t max_cycles) {
  sim::SimConfig cfg;
  cfg.program = program;
  cfg.vuln_flags = vulns;
  cfg.max_cycles = max_cycles;
  Evaluation e{sim::run(p.schedule, cfg), {}};
  e.analysis = detect::analyze(e.run.waveform, e.run.retire_log, p.indicators, p.regs, p.pdlc);
  return e;
}

} // namespace specleak
