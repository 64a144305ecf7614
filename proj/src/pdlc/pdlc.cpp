#include "specleak/pdlc/pdlc.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <deque>
#include <set>

#include <json.hpp>

#include "specleak/error.hpp"
#include "specleak/util.hpp"

namespace specleak::pdlc {

using ifg::Ifg;
using ifg::VertexId;
using nlohmann::json;

RegisterManifest parse_manifest(std::string_view json_text) {
  RegisterManifest m;
  try {
    const json doc = json::parse(json_text);
    for (const auto& p : doc.at("arch_patterns")) m.arch_patterns.push_back(p.get<std::string>());
    if (doc.contains("notes")) {
      for (const auto& n : doc.at("notes")) m.notes.push_back(n.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed register manifest: ") + e.what());
  }
  return m;
}

RegisterManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_text_file(path)); }

Classification classify_registers(const Ifg& graph, const RegisterManifest& manifest) {
  Classification out;
  std::vector<bool> is_arch(graph.size(), false);
  for (const auto& pattern : manifest.arch_patterns) {
    std::size_t matched = 0;
    for (VertexId v = 0; v < graph.size(); ++v) {
      const auto& vx = graph.vertex(v);
      if (fnmatch(pattern.c_str(), vx.name.c_str(), 0) != 0) continue;
      if (!vx.stateful()) {
        throw ConfigError("pattern '" + pattern + "' matches '" + vx.name + "', which is a " +
                          netlist::to_string(vx.kind) + ", not a register");
      }
      is_arch[v] = true;
      ++matched;
    }
    if (matched == 0) out.warnings.push_back("pattern '" + pattern + "' matches no register");
  }
  for (VertexId v = 0; v < graph.size(); ++v) {
    if (is_arch[v]) {
      out.arch.push_back(v);
    } else if (graph.vertex(v).stateful()) {
      out.micro.push_back(v);
    }
  }
  return out;
}

std::string path_id(const std::vector<std::string>& chain) {
  std::string joined;
  for (const auto& s : chain) {
    if (!joined.empty()) joined += '\n';
    joined += s;
  }
  return to_hex(fnv1a64(joined), 16);
}

namespace {

class ReverseSearch {
public:
  ReverseSearch(const Ifg& g, const std::vector<VertexId>& arch, const std::vector<VertexId>& micro,
                const PathLimits& limits)
      : g_(g), limits_(limits), role_(g.size(), Role::Other), useful_(g.size(), false), on_path_(g.size(), false) {
    for (VertexId v : arch) role_[v] = Role::Arch;
    for (VertexId v : micro) {
      if (role_[v] == Role::Arch) throw ConfigError("'" + g.vertex(v).name + "' is both architectural and microarchitectural");
      role_[v] = Role::Micro;
    }
    prune(micro);
  }

  void run(VertexId sink, PdlcResult& out) {
    stack_.assign(1, sink);
    on_path_[sink] = true;
    visit(sink, out);
    on_path_[sink] = false;
  }

private:
  enum class Role { Other, Arch, Micro };

  bool interior_ok(VertexId v) const { return !g_.vertex(v).stateful() && role_[v] == Role::Other; }

  // A vertex can only appear inside a chain if some microarchitectural
  // register reaches it through stateless vertices. One forward sweep
  // computes that set so the enumeration never explores dead branches.
  void prune(const std::vector<VertexId>& micro) {
    std::deque<VertexId> work;
    for (VertexId m : micro) {
      for (VertexId s : g_.successors(m)) {
        if (interior_ok(s) && !useful_[s]) {
          useful_[s] = true;
          work.push_back(s);
        }
      }
    }
    while (!work.empty()) {
      const VertexId v = work.front();
      work.pop_front();
      for (VertexId s : g_.successors(v)) {
        if (interior_ok(s) && !useful_[s]) {
          useful_[s] = true;
          work.push_back(s);
        }
      }
    }
  }

  void emit(PdlcResult& out) {
    if (out.paths.size() >= limits_.max_paths) {
      out.truncated = true;
      return;
    }
    PdlcPath p;
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) p.chain.push_back(g_.vertex(*it).name);
    p.source = p.chain.front();
    p.sink = p.chain.back();
    p.id = path_id(p.chain);
    out.paths.push_back(std::move(p));
  }

  void visit(VertexId v, PdlcResult& out) {
    for (VertexId p : g_.predecessors(v)) {
      if (on_path_[p]) continue;
      const bool source = role_[p] == Role::Micro;
      if (!source && !useful_[p]) continue;
      if (stack_.size() + 1 > limits_.max_len) {
        out.truncated = true;
        continue;
      }
      if (out.truncated && out.paths.size() >= limits_.max_paths) return;
      stack_.push_back(p);
      if (source) {
        emit(out);
      } else {
        on_path_[p] = true;
        visit(p, out);
        on_path_[p] = false;
      }
      stack_.pop_back();
    }
  }

  const Ifg& g_;
  PathLimits limits_;
  std::vector<Role> role_;
  std::vector<bool> useful_;
  std::vector<bool> on_path_;
  std::vector<VertexId> stack_;
};

} // namespace

PdlcResult extract_pdlc(const Ifg& graph, const std::vector<VertexId>& arch, const std::vector<VertexId>& micro,
                        const PathLimits& limits) {
  if (limits.max_len < 2 || limits.max_paths < 1) {
    throw ConfigError("path limits need max_len >= 2 and max_paths >= 1");
  }
  PdlcResult out;
  out.limits = limits;
  if (arch.empty()) {
    out.warnings.push_back("no architectural registers; nothing to extract");
    return out;
  }
  ReverseSearch search(graph, arch, micro, limits);
  for (VertexId a : arch) search.run(a, out);
  std::sort(out.paths.begin(), out.paths.end(), [](const PdlcPath& x, const PdlcPath& y) {
    return std::tie(x.sink, x.source) != std::tie(y.sink, y.source) ? std::tie(x.sink, x.source) < std::tie(y.sink, y.source)
           : x.chain.size() != y.chain.size()                        ? x.chain.size() < y.chain.size()
                                                                      : x.chain < y.chain;
  });
  out.paths.erase(std::unique(out.paths.begin(), out.paths.end(),
                              [](const PdlcPath& x, const PdlcPath& y) { return x.chain == y.chain; }),
                  out.paths.end());
  return out;
}

std::string export_pdlc(const PdlcResult& result) {
  json paths = json::array();
  for (const auto& p : result.paths) {
    paths.push_back({{"id", p.id}, {"source", p.source}, {"sink", p.sink}, {"chain", p.chain}});
  }
  json doc = {{"format_version", kFormatVersion},
              {"paths", paths},
              {"truncated", result.truncated},
              {"limits", {{"max_len", result.limits.max_len}, {"max_paths", result.limits.max_paths}}},
              {"warnings", result.warnings}};
  return doc.dump(1) + "\n";
}

PdlcResult import_pdlc(std::string_view json_text) {
  PdlcResult r;
  try {
    const json doc = json::parse(json_text);
    if (doc.value("format_version", 0) != kFormatVersion) throw ConfigError("unsupported PDLC format_version");
    for (const auto& p : doc.at("paths")) {
      PdlcPath path;
      path.id = p.at("id").get<std::string>();
      path.source = p.at("source").get<std::string>();
      path.sink = p.at("sink").get<std::string>();
      path.chain = p.at("chain").get<std::vector<std::string>>();
      if (path.chain.size() < 2 || path.chain.front() != path.source || path.chain.back() != path.sink ||
          path_id(path.chain) != path.id) {
        throw ConfigError("PDLC entry " + path.id + " is inconsistent");
      }
      r.paths.push_back(std::move(path));
    }
    r.truncated = doc.at("truncated").get<bool>();
    r.limits.max_len = doc.at("limits").at("max_len").get<std::size_t>();
    r.limits.max_paths = doc.at("limits").at("max_paths").get<std::size_t>();
    if (doc.contains("warnings")) r.warnings = doc.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed PDLC file: ") + e.what());
  }
  return r;
}

void save_pdlc(const PdlcResult& result, const std::filesystem::path& path) {
  write_text_file(path, export_pdlc(result));
}

PdlcResult load_pdlc(const std::filesystem::path& path) { return import_pdlc(read_text_file(path)); }

} // namespace specleak::pdlc
