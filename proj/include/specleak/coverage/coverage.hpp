#pragma once

// Leakage-path (LP) coverage over PDLC signals inside mispredicted windows,
// and whole-trace toggle coverage as the baseline metric.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "specleak/pdlc/pdlc.hpp"
#include "specleak/sim/waveform.hpp"
#include "specleak/trace/trace.hpp"

namespace specleak::coverage {

enum class Kind { Lp, Toggle };

const char* to_string(Kind k);
Kind kind_from_string(std::string_view s);

/// Toggle-count ladder: 1, 2, 3, 4-7, 8-15, 16-31, 32+.
inline constexpr unsigned kBucketCount = 7;
unsigned bucket_of(std::uint64_t toggles); // toggles >= 1
const char* bucket_label(unsigned bucket);

struct CoverageMap {
  Kind kind = Kind::Lp;
  std::set<std::string> activated;                 // PDLC path ids (LP only)
  std::map<std::string, std::uint8_t> buckets;     // base signal name -> occupied bucket bits
  std::uint64_t windows_seen = 0;                  // LP only

  bool empty() const { return activated.empty() && buckets.empty() && windows_seen == 0; }
  std::size_t bucket_pairs() const;
  friend bool operator==(const CoverageMap&, const CoverageMap&) = default;
};

/// Signals are keyed by base name; memory elements add up into their memory.
/// When `progress` is given it receives the partial activation of every path:
/// buckets keyed by path id, bit k-1 set when k of its chain signals (capped
/// at 8) toggled inside one mispredicted window.
CoverageMap lp_coverage(const sim::Waveform& w, const std::vector<trace::MisspecWindow>& windows,
                        const pdlc::PdlcResult& pdlc, CoverageMap* progress = nullptr);

CoverageMap toggle_coverage(const sim::Waveform& w);

/// Drops buckets of signals that lie only on already activated paths, so
/// feedback comes from the unexplored part of the PDLC list.
CoverageMap restrict_to_frontier(const CoverageMap& m, const pdlc::PdlcResult& pdlc,
                                 const std::set<std::string>& activated);

/// Drops buckets keyed by an activated path id (progress maps).
CoverageMap drop_activated(const CoverageMap& progress, const std::set<std::string>& activated);

/// Throws Error when the kinds differ.
CoverageMap merge(const CoverageMap& a, const CoverageMap& b);
void merge_into(CoverageMap& acc, const CoverageMap& add);
bool is_interesting(const CoverageMap& fresh, const CoverageMap& accumulated);

std::string export_coverage(const CoverageMap& m);
CoverageMap import_coverage(std::string_view json_text);

struct CoveragePoint {
  std::uint64_t iteration = 0;
  std::size_t covered_pdlc = 0;
};

/// "iteration,covered_pdlc_count" with a header line.
std::string coverage_csv(const std::vector<CoveragePoint>& series);
std::vector<CoveragePoint> parse_coverage_csv(std::string_view text);

} // namespace specleak::coverage
