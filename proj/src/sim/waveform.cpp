#include "specleak/sim/waveform.hpp"

#include <algorithm>

#include "specleak/error.hpp"

namespace specleak::sim {

Waveform::Waveform(std::vector<WaveSignal> signals) : signals_(std::move(signals)), changes_(signals_.size()) {
  for (std::size_t i = 0; i < signals_.size(); ++i) index_.emplace(signals_[i].name, i);
}

std::optional<std::size_t> Waveform::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Waveform::require(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ConfigError("waveform has no signal '" + std::string(name) + "'");
}

void Waveform::append(const std::vector<std::uint64_t>& values) {
  for (std::size_t i = 0; i < signals_.size(); ++i) {
    auto& ch = changes_[i];
    if (ch.empty() || ch.back().value != values[i]) ch.push_back({cycles_, values[i]});
  }
  ++cycles_;
}

void Waveform::add_change(std::size_t signal, std::uint64_t cycle, std::uint64_t value) {
  auto& ch = changes_[signal];
  if (!ch.empty() && ch.back().cycle == cycle) {
    ch.back().value = value;
    if (ch.size() >= 2 && ch[ch.size() - 2].value == value) ch.pop_back();
    return;
  }
  if (ch.empty() || ch.back().value != value) ch.push_back({cycle, value});
}

void Waveform::fill_initial() {
  for (auto& ch : changes_) {
    if (!ch.empty() && ch.front().cycle == 0) continue;
    if (!ch.empty() && ch.front().value == 0) {
      ch.front().cycle = 0;
    } else {
      ch.insert(ch.begin(), Change{0, 0});
    }
  }
}

std::uint64_t Waveform::value(std::size_t signal, std::uint64_t cycle) const {
  const auto& ch = changes_[signal];
  auto it = std::upper_bound(ch.begin(), ch.end(), cycle,
                             [](std::uint64_t c, const Change& x) { return c < x.cycle; });
  if (it == ch.begin()) return 0;
  return std::prev(it)->value;
}

std::vector<std::uint64_t> Waveform::snapshot(std::uint64_t cycle) const {
  std::vector<std::uint64_t> out(signals_.size());
  for (std::size_t i = 0; i < signals_.size(); ++i) out[i] = value(i, cycle);
  return out;
}

bool operator==(const Waveform& a, const Waveform& b) {
  if (a.cycles_ != b.cycles_ || a.signals_.size() != b.signals_.size()) return false;
  for (std::size_t i = 0; i < a.signals_.size(); ++i) {
    const auto& x = a.signals_[i];
    const auto& y = b.signals_[i];
    if (x.name != y.name || x.width != y.width || x.is_reg != y.is_reg) return false;
    const auto& cx = a.changes_[i];
    const auto& cy = b.changes_[i];
    if (cx.size() != cy.size()) return false;
    for (std::size_t k = 0; k < cx.size(); ++k) {
      if (cx[k].cycle != cy[k].cycle || cx[k].value != cy[k].value) return false;
    }
  }
  return true;
}

} // namespace specleak::sim
