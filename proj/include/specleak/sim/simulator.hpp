#pragma once

// Two-phase cycle simulation of an elaborated design: combinational logic
// settles from the current register values, then every register and memory
// write port updates at once.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "specleak/netlist/design.hpp"
#include "specleak/sim/waveform.hpp"

namespace specleak::sim {

/// Flat postfix code for one expression.
struct Code {
  enum class Op : std::uint8_t {
    Const, Load, MemRead, BitSel, Slice,
    Not, And, Or, Xor, Add, Sub, Eq, Ne, Lt, Shl, Shr,
    Mux, ConcatStep,
  };
  struct Instr {
    Op op;
    std::uint32_t sig = 0;   // Load/MemRead/BitSel/Slice
    std::uint32_t shift = 0; // Slice lsb, ConcatStep low-part width
    std::uint64_t imm = 0;   // Const value or result mask
  };
  std::vector<Instr> instrs;
  std::uint64_t mask = 0; // applied to the final result
};

struct MemPort {
  netlist::SignalId memory = 0;
  Code enable;
  Code addr;
  Code data;
};

struct Schedule {
  std::shared_ptr<const netlist::Design> design;
  std::vector<std::uint32_t> comb_order; // indices into design->comb, dependency order
  std::vector<Code> comb_code;           // parallel to comb_order
  std::vector<Code> reg_code;            // parallel to design->regs
  std::vector<MemPort> mem_ports;        // declaration order; later ports win
  std::vector<std::size_t> mem_offset;   // per signal; memories only
  std::size_t mem_words = 0;
  std::size_t max_stack = 1;
};

Schedule compile(const netlist::Design& design);

class Simulator {
public:
  explicit Simulator(const Schedule& schedule);

  /// Restores declared initial values and settles combinational logic.
  void reset();
  void set_input(netlist::SignalId id, std::uint64_t value);
  void load_memory(netlist::SignalId memory, const std::vector<std::uint64_t>& words);

  void settle();
  /// Clock edge: all registers and memory ports update from settled values.
  void clock();

  std::uint64_t value(netlist::SignalId id) const { return values_[id]; }
  std::uint64_t memory(netlist::SignalId id, std::size_t index) const;
  std::uint64_t cycle() const { return cycle_; }

  /// Waveform columns: design signals in order, memories expanded to elements.
  std::vector<WaveSignal> wave_signals() const;
  void sample(std::vector<std::uint64_t>& out) const;

private:
  std::uint64_t eval(const Code& code);

  const Schedule& sched_;
  const netlist::Design& design_;
  std::vector<std::uint64_t> values_;
  std::vector<std::uint64_t> mem_;
  std::vector<std::uint64_t> stack_;
  std::vector<std::uint64_t> next_regs_;
  struct PendingWrite {
    std::size_t slot;
    std::uint64_t value;
  };
  std::vector<PendingWrite> pending_;
  std::uint64_t cycle_ = 0;
};

/// Drives a generic design for `cycles` cycles. `drive` runs at the start of
/// each cycle and may set inputs; the waveform samples after settling.
Waveform simulate(const Schedule& schedule, std::uint64_t cycles,
                  const std::function<void(std::uint64_t cycle, Simulator&)>& drive = {});

} // namespace specleak::sim
