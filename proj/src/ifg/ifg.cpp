#include "specleak/ifg/ifg.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <json.hpp>

#include "specleak/error.hpp"
#include "specleak/util.hpp"

namespace specleak::ifg {

using netlist::Design;
using netlist::Node;
using netlist::SignalId;

const char* to_string(Provenance p) {
  switch (p) {
  case Provenance::Assignment: return "assignment";
  case Provenance::PortBinding: return "port-binding";
  case Provenance::MemoryFlow: return "memory-flow";
  }
  return "assignment";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "assignment") return Provenance::Assignment;
  if (s == "port-binding") return Provenance::PortBinding;
  if (s == "memory-flow") return Provenance::MemoryFlow;
  throw ConfigError("unknown edge provenance '" + s + "'");
}

Ifg Ifg::from_parts(std::vector<Vertex> vertices,
                    const std::vector<std::tuple<std::string, std::string, Provenance>>& edges) {
  Ifg g;
  std::sort(vertices.begin(), vertices.end(), [](const Vertex& a, const Vertex& b) { return a.name < b.name; });
  g.vertices_ = std::move(vertices);
  for (VertexId i = 0; i < g.vertices_.size(); ++i) {
    if (!g.index_.emplace(g.vertices_[i].name, i).second) {
      throw ConfigError("duplicate vertex '" + g.vertices_[i].name + "'");
    }
  }
  std::map<std::pair<VertexId, VertexId>, Provenance> unique;
  for (const auto& [src, dst, prov] : edges) {
    const auto s = g.find(src);
    const auto d = g.find(dst);
    if (!s || !d) {
      throw ConfigError("edge (" + src + ", " + dst + ") has an endpoint outside the vertex set");
    }
    if (*s == *d) continue;
    unique.emplace(std::make_pair(*s, *d), prov);
  }
  g.succ_.assign(g.vertices_.size(), {});
  g.pred_.assign(g.vertices_.size(), {});
  for (const auto& [key, prov] : unique) {
    g.edges_.push_back({key.first, key.second, prov});
    g.succ_[key.first].push_back(key.second);
    g.pred_[key.second].push_back(key.first);
  }
  return g;
}

std::optional<VertexId> Ifg::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Ifg::has_edge(VertexId src, VertexId dst) const {
  const auto& s = succ_[src];
  return std::binary_search(s.begin(), s.end(), dst);
}

bool operator==(const Ifg& a, const Ifg& b) {
  if (a.vertices_.size() != b.vertices_.size() || a.edges_.size() != b.edges_.size()) return false;
  for (std::size_t i = 0; i < a.vertices_.size(); ++i) {
    const Vertex& x = a.vertices_[i];
    const Vertex& y = b.vertices_[i];
    if (x.name != y.name || x.width != y.width || x.kind != y.kind) return false;
  }
  for (std::size_t i = 0; i < a.edges_.size(); ++i) {
    const Edge& x = a.edges_[i];
    const Edge& y = b.edges_[i];
    if (x.src != y.src || x.dst != y.dst || x.provenance != y.provenance) return false;
  }
  return true;
}

namespace {

class Builder {
public:
  explicit Builder(const Design& d) : design_(d) {}

  void add(SignalId src, SignalId dst, Provenance prov) {
    edges_.emplace_back(design_.signal(src).name, design_.signal(dst).name, prov);
  }

  void add_operands(const Node& expr, SignalId dst, Provenance data_prov) {
    for (SignalId op : netlist::expr_operands(expr)) {
      const bool memory = design_.signal(op).kind == netlist::SignalKind::Memory;
      add(op, dst, memory ? Provenance::MemoryFlow : data_prov);
    }
  }

  Ifg finish() {
    std::vector<Vertex> vertices;
    for (const auto& s : design_.signals) vertices.push_back({s.name, s.width, s.kind});
    return Ifg::from_parts(std::move(vertices), edges_);
  }

private:
  const Design& design_;
  std::vector<std::tuple<std::string, std::string, Provenance>> edges_;
};

} // namespace

Ifg build_ifg(const Design& design) {
  Builder b(design);
  for (const auto& a : design.comb) {
    b.add_operands(a.expr, a.target,
                   a.origin == netlist::AssignOrigin::PortBinding ? Provenance::PortBinding : Provenance::Assignment);
  }
  // Clock pins are deliberately not turned into edges here: they reach the
  // register's clock port through the binding edges, and a clock carries no
  // data into the register's value.
  for (const auto& r : design.regs) b.add_operands(r.next, r.target, Provenance::Assignment);
  for (const auto& w : design.mem_writes) {
    b.add_operands(w.data, w.memory, Provenance::MemoryFlow);
    b.add_operands(w.addr, w.memory, Provenance::MemoryFlow);
    b.add_operands(w.enable, w.memory, Provenance::MemoryFlow);
  }
  return b.finish();
}

std::string export_ifg(const Ifg& graph) {
  using nlohmann::json;
  json vertices = json::array();
  for (const auto& v : graph.vertices()) {
    vertices.push_back({{"name", v.name}, {"width", v.width}, {"kind", netlist::to_string(v.kind)}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges()) {
    edges.push_back({graph.vertex(e.src).name, graph.vertex(e.dst).name, to_string(e.provenance)});
  }
  json doc = {{"format_version", kFormatVersion}, {"vertices", vertices}, {"edges", edges}};
  return doc.dump(1) + "\n";
}

Ifg import_ifg(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("IFG file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format_version", 0) != kFormatVersion) {
      throw ConfigError("unsupported IFG format_version");
    }
    std::vector<Vertex> vertices;
    for (const auto& v : doc.at("vertices")) {
      vertices.push_back({v.at("name").get<std::string>(), v.at("width").get<unsigned>(),
                          netlist::signal_kind_from_string(v.at("kind").get<std::string>())});
    }
    std::vector<std::tuple<std::string, std::string, Provenance>> edges;
    for (const auto& e : doc.at("edges")) {
      edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>(),
                         provenance_from_string(e.at(2).get<std::string>()));
    }
    return Ifg::from_parts(std::move(vertices), edges);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed IFG file: ") + e.what());
  }
}

void save_ifg(const Ifg& graph, const std::filesystem::path& path) { write_text_file(path, export_ifg(graph)); }

Ifg load_ifg(const std::filesystem::path& path) { return import_ifg(read_text_file(path)); }

} // namespace specleak::ifg
