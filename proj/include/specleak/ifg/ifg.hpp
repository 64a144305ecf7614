#pragma once

// Information flow graph over the signals of an elaborated design.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "specleak/netlist/design.hpp"

namespace specleak::ifg {

using VertexId = std::uint32_t;

enum class Provenance { Assignment, PortBinding, MemoryFlow };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct Vertex {
  std::string name;
  unsigned width = 1;
  netlist::SignalKind kind = netlist::SignalKind::Wire;

  bool stateful() const {
    return kind == netlist::SignalKind::Reg || kind == netlist::SignalKind::Memory;
  }
};

struct Edge {
  VertexId src = 0;
  VertexId dst = 0;
  Provenance provenance = Provenance::Assignment;
};

/// Vertices are kept sorted by name, edges sorted by (src, dst) with no
/// duplicates and no self loops.
class Ifg {
public:
  Ifg() = default;

  /// Normalizes the given parts. Duplicate edges keep the first provenance
  /// seen; self loops are dropped. Throws ConfigError on dangling endpoints
  /// or duplicate vertex names.
  static Ifg from_parts(std::vector<Vertex> vertices,
                        const std::vector<std::tuple<std::string, std::string, Provenance>>& edges);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vertex& vertex(VertexId v) const { return vertices_[v]; }
  std::size_t size() const { return vertices_.size(); }

  std::optional<VertexId> find(std::string_view name) const;
  const std::vector<VertexId>& successors(VertexId v) const { return succ_[v]; }
  const std::vector<VertexId>& predecessors(VertexId v) const { return pred_[v]; }
  bool has_edge(VertexId src, VertexId dst) const;

  friend bool operator==(const Ifg& a, const Ifg& b);

private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<VertexId>> succ_;
  std::vector<std::vector<VertexId>> pred_;
  std::unordered_map<std::string, VertexId> index_;
};

Ifg build_ifg(const netlist::Design& design);

std::string export_ifg(const Ifg& graph);
Ifg import_ifg(std::string_view json_text);

void save_ifg(const Ifg& graph, const std::filesystem::path& path);
Ifg load_ifg(const std::filesystem::path& path);

} // namespace specleak::ifg
