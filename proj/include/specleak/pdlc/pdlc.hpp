#pragma once

// Architectural register labeling and potential direct leakage channel
// (PDLC) enumeration over an IFG.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "specleak/ifg/ifg.hpp"

namespace specleak::pdlc {

struct RegisterManifest {
  std::vector<std::string> arch_patterns; // fnmatch-style globs over hierarchical names
  std::vector<std::string> notes;
};

RegisterManifest parse_manifest(std::string_view json_text);
RegisterManifest load_manifest(const std::filesystem::path& path);

struct Classification {
  std::vector<ifg::VertexId> arch;  // ascending
  std::vector<ifg::VertexId> micro; // ascending
  std::vector<std::string> warnings;
};

/// Throws ConfigError when a pattern selects a non-stateful signal.
Classification classify_registers(const ifg::Ifg& graph, const RegisterManifest& manifest);

struct PathLimits {
  std::size_t max_len = 32; // signals per chain
  std::size_t max_paths = 1'000'000;
};

struct PdlcPath {
  std::string id;
  std::string source;
  std::string sink;
  std::vector<std::string> chain; // source first, sink last
};

struct PdlcResult {
  std::vector<PdlcPath> paths;
  bool truncated = false;
  PathLimits limits;
  std::vector<std::string> warnings;
};

std::string path_id(const std::vector<std::string>& chain);

/// Reverse depth-first enumeration from every architectural register.
/// A chain ends at the first microarchitectural register met walking
/// backwards; interior vertices are never stateful. Output is sorted by
/// (sink, source, length, chain) and deduplicated.
PdlcResult extract_pdlc(const ifg::Ifg& graph, const std::vector<ifg::VertexId>& arch,
                        const std::vector<ifg::VertexId>& micro, const PathLimits& limits = {});

std::string export_pdlc(const PdlcResult& result);
PdlcResult import_pdlc(std::string_view json_text);
void save_pdlc(const PdlcResult& result, const std::filesystem::path& path);
PdlcResult load_pdlc(const std::filesystem::path& path);

} // namespace specleak::pdlc
