#include "specleak/coverage/coverage.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "specleak/error.hpp"
#include "specleak/util.hpp"

namespace specleak::coverage {

using nlohmann::json;

const char* to_string(Kind k) { return k == Kind::Lp ? "lp" : "toggle"; }

Kind kind_from_string(std::string_view s) {
  if (s == "lp") return Kind::Lp;
  if (s == "toggle") return Kind::Toggle;
  throw ConfigError("unknown coverage mode '" + std::string(s) + "' (expected lp or toggle)");
}

unsigned bucket_of(std::uint64_t toggles) {
  if (toggles <= 3) return toggles == 0 ? 0 : static_cast<unsigned>(toggles - 1);
  if (toggles < 8) return 3;
  if (toggles < 16) return 4;
  if (toggles < 32) return 5;
  return 6;
}

const char* bucket_label(unsigned bucket) {
  static const char* const labels[kBucketCount] = {"1", "2", "3", "4-7", "8-15", "16-31", "32+"};
  return labels[bucket];
}

std::size_t CoverageMap::bucket_pairs() const {
  std::size_t n = 0;
  for (const auto& [_, bits] : buckets) n += std::popcount(bits);
  return n;
}

namespace {

// Bit toggles of signal `s` over the transitions into cycles [lo, hi].
std::uint64_t toggles(const sim::Waveform& w, std::size_t s, std::uint64_t lo, std::uint64_t hi) {
  const auto& ch = w.changes(s);
  auto it = std::lower_bound(ch.begin(), ch.end(), lo, [](const sim::Change& c, std::uint64_t t) { return c.cycle < t; });
  if (it == ch.end() || it->cycle > hi) return 0;
  std::uint64_t prev = it == ch.begin() ? 0 : std::prev(it)->value;
  std::uint64_t n = 0;
  for (; it != ch.end() && it->cycle <= hi; ++it) {
    if (it->cycle == 0) {
      prev = it->value;
      continue;
    }
    n += std::popcount(prev ^ it->value);
    prev = it->value;
  }
  return n;
}

// Waveform signal indices grouped by base name.
std::unordered_map<std::string, std::vector<std::size_t>> group_by_base(const sim::Waveform& w) {
  std::unordered_map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < w.signals().size(); ++i) out[std::string(base_signal_name(w.signals()[i].name))].push_back(i);
  return out;
}

} // namespace

CoverageMap lp_coverage(const sim::Waveform& w, const std::vector<trace::MisspecWindow>& windows,
                        const pdlc::PdlcResult& pdlc, CoverageMap* progress) {
  CoverageMap m;
  m.kind = Kind::Lp;
  if (progress) *progress = CoverageMap{};
  std::vector<std::string> names;
  for (const auto& p : pdlc.paths) names.insert(names.end(), p.chain.begin(), p.chain.end());
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  const auto groups = group_by_base(w);
  std::vector<const std::vector<std::size_t>*> members(names.size(), nullptr);
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto it = groups.find(names[k]);
    if (it == groups.end()) throw ConfigError("PDLC signal '" + names[k] + "' is not in the waveform");
    members[k] = &it->second;
  }
  std::unordered_map<std::string, std::uint64_t> count;
  for (const auto& win : windows) {
    if (!win.mispredicted) continue;
    ++m.windows_seen;
    count.clear();
    for (std::size_t k = 0; k < names.size(); ++k) {
      std::uint64_t n = 0;
      for (auto s : *members[k]) n += toggles(w, s, win.start, win.end);
      if (n == 0) continue;
      count[names[k]] = n;
      m.buckets[names[k]] |= static_cast<std::uint8_t>(1u << bucket_of(n));
    }
    for (const auto& p : pdlc.paths) {
      const auto hit = std::count_if(p.chain.begin(), p.chain.end(), [&](const std::string& s) { return count.count(s) != 0; });
      if (hit == static_cast<std::ptrdiff_t>(p.chain.size())) m.activated.insert(p.id);
      if (progress && hit) progress->buckets[p.id] |= static_cast<std::uint8_t>(1u << (std::min<std::ptrdiff_t>(hit, 8) - 1));
    }
  }
  if (progress) {
    progress->activated = m.activated;
    progress->windows_seen = m.windows_seen;
  }
  return m;
}

CoverageMap toggle_coverage(const sim::Waveform& w) {
  CoverageMap m;
  m.kind = Kind::Toggle;
  if (w.cycles() == 0) return m;
  for (const auto& [name, members] : group_by_base(w)) {
    std::uint64_t n = 0;
    for (auto s : members) n += toggles(w, s, 0, w.cycles() - 1);
    if (n) m.buckets[name] |= static_cast<std::uint8_t>(1u << bucket_of(n));
  }
  return m;
}

CoverageMap restrict_to_frontier(const CoverageMap& m, const pdlc::PdlcResult& pdlc,
                                 const std::set<std::string>& activated) {
  std::set<std::string> frontier;
  for (const auto& p : pdlc.paths) {
    if (!activated.count(p.id)) frontier.insert(p.chain.begin(), p.chain.end());
  }
  CoverageMap out = m;
  std::erase_if(out.buckets, [&](const auto& kv) { return frontier.count(kv.first) == 0; });
  return out;
}

CoverageMap drop_activated(const CoverageMap& progress, const std::set<std::string>& activated) {
  CoverageMap out = progress;
  std::erase_if(out.buckets, [&](const auto& kv) { return activated.count(kv.first) != 0; });
  return out;
}

void merge_into(CoverageMap& acc, const CoverageMap& add) {
  if (acc.kind != add.kind) throw Error("cannot merge " + std::string(to_string(acc.kind)) + " and " + to_string(add.kind) + " coverage");
  acc.activated.insert(add.activated.begin(), add.activated.end());
  for (const auto& [name, bits] : add.buckets) acc.buckets[name] |= bits;
  acc.windows_seen = std::max(acc.windows_seen, add.windows_seen);
}

CoverageMap merge(const CoverageMap& a, const CoverageMap& b) {
  CoverageMap out = a;
  merge_into(out, b);
  return out;
}

bool is_interesting(const CoverageMap& fresh, const CoverageMap& accumulated) {
  if (fresh.kind != accumulated.kind) throw Error("coverage kinds differ");
  for (const auto& id : fresh.activated) {
    if (!accumulated.activated.count(id)) return true;
  }
  for (const auto& [name, bits] : fresh.buckets) {
    auto it = accumulated.buckets.find(name);
    const std::uint8_t have = it == accumulated.buckets.end() ? 0 : it->second;
    if (bits & ~have) return true;
  }
  return false;
}

std::string export_coverage(const CoverageMap& m) {
  json buckets = json::object();
  for (const auto& [name, bits] : m.buckets) {
    json labels = json::array();
    for (unsigned b = 0; b < kBucketCount; ++b) {
      if (bits & (1u << b)) labels.push_back(bucket_label(b));
    }
    buckets[name] = labels;
  }
  json doc = {{"format_version", kFormatVersion},
              {"kind", to_string(m.kind)},
              {"activated", m.activated},
              {"buckets", buckets},
              {"windows_seen", m.windows_seen}};
  return doc.dump(1) + "\n";
}

CoverageMap import_coverage(std::string_view json_text) {
  CoverageMap m;
  try {
    const json doc = json::parse(json_text);
    if (doc.value("format_version", 0) != kFormatVersion) throw ConfigError("unsupported coverage format_version");
    m.kind = kind_from_string(doc.at("kind").get<std::string>());
    for (const auto& id : doc.at("activated")) m.activated.insert(id.get<std::string>());
    for (const auto& [name, labels] : doc.at("buckets").items()) {
      std::uint8_t bits = 0;
      for (const auto& l : labels) {
        const auto s = l.get<std::string>();
        unsigned b = 0;
        while (b < kBucketCount && s != bucket_label(b)) ++b;
        if (b == kBucketCount) throw ConfigError("unknown coverage bucket '" + s + "'");
        bits |= static_cast<std::uint8_t>(1u << b);
      }
      m.buckets[name] = bits;
    }
    m.windows_seen = doc.at("windows_seen").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed coverage file: ") + e.what());
  }
  return m;
}

std::string coverage_csv(const std::vector<CoveragePoint>& series) {
  std::ostringstream out;
  out << "iteration,covered_pdlc_count\n";
  for (const auto& p : series) out << p.iteration << ',' << p.covered_pdlc << '\n';
  return out.str();
}

std::vector<CoveragePoint> parse_coverage_csv(std::string_view text) {
  std::vector<CoveragePoint> out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      if (line != "iteration,covered_pdlc_count") throw ConfigError("unexpected coverage CSV header");
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed coverage CSV line '" + line + "'");
    try {
      out.push_back({std::stoull(line.substr(0, comma)), static_cast<std::size_t>(std::stoull(line.substr(comma + 1)))});
    } catch (const std::logic_error&) {
      throw ConfigError("malformed coverage CSV line '" + line + "'");
    }
  }
  return out;
}

} // namespace specleak::coverage
