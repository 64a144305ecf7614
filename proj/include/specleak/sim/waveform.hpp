#pragma once

// Per-cycle signal values stored as change lists.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace specleak::sim {

struct WaveSignal {
  std::string name; // memory elements appear as "cpu.regfile[3]"
  unsigned width = 1;
  bool is_reg = false;
};

struct Change {
  std::uint64_t cycle = 0;
  std::uint64_t value = 0;
};

/// Every signal has a change at cycle 0, so any cycle in [0, cycles())
/// can be reconstructed.
class Waveform {
public:
  Waveform() = default;
  explicit Waveform(std::vector<WaveSignal> signals);

  const std::vector<WaveSignal>& signals() const { return signals_; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t require(std::string_view name) const;

  std::uint64_t cycles() const { return cycles_; }

  /// Appends the next cycle; `values` follows signals() order.
  void append(const std::vector<std::uint64_t>& values);

  /// Low-level building for parsers. Changes must arrive in time order per
  /// signal; a change equal to the current value is dropped.
  void add_change(std::size_t signal, std::uint64_t cycle, std::uint64_t value);
  void set_cycles(std::uint64_t cycles) { cycles_ = cycles; }
  /// Gives signals that never changed at cycle 0 an explicit zero there.
  void fill_initial();

  std::uint64_t value(std::size_t signal, std::uint64_t cycle) const;
  std::uint64_t value(std::string_view name, std::uint64_t cycle) const { return value(require(name), cycle); }
  std::vector<std::uint64_t> snapshot(std::uint64_t cycle) const;
  const std::vector<Change>& changes(std::size_t signal) const { return changes_[signal]; }

  friend bool operator==(const Waveform& a, const Waveform& b);

private:
  std::vector<WaveSignal> signals_;
  std::vector<std::vector<Change>> changes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t cycles_ = 0;
};

} // namespace specleak::sim
