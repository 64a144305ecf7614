#include "specleak/sim/simulator.hpp"

#include <algorithm>
#include <queue>

#include "specleak/error.hpp"
#include "specleak/util.hpp"

namespace specleak::sim {

using netlist::Design;
using netlist::Node;
using netlist::SignalKind;

namespace {

class Compiler {
public:
  explicit Compiler(const Design& d) : design_(d) {}

  Code compile(const Node& n, unsigned target_width) {
    Code c;
    depth_ = 0;
    emit(n, c);
    c.mask = width_mask(target_width);
    return c;
  }

  std::size_t max_stack = 1;

private:
  void push(Code& c, Code::Instr in, int delta) {
    c.instrs.push_back(in);
    depth_ += delta;
    max_stack = std::max<std::size_t>(max_stack, static_cast<std::size_t>(std::max(depth_, 1)));
  }

  void emit(const Node& n, Code& c) {
    using Op = Code::Op;
    const std::uint64_t mask = width_mask(n.width);
    switch (n.op) {
    case Node::Op::Const: push(c, {Op::Const, 0, 0, n.value}, +1); return;
    case Node::Op::Ref: push(c, {Op::Load, n.sig, 0, 0}, +1); return;
    case Node::Op::Slice: push(c, {Op::Slice, n.sig, n.lsb, mask}, +1); return;
    case Node::Op::MemRead:
      emit(n.args[0], c);
      push(c, {Op::MemRead, n.sig, 0, 0}, 0);
      return;
    case Node::Op::BitSel:
      emit(n.args[0], c);
      push(c, {Op::BitSel, n.sig, 0, 0}, 0);
      return;
    case Node::Op::Not:
      emit(n.args[0], c);
      push(c, {Op::Not, 0, 0, mask}, 0);
      return;
    case Node::Op::Mux:
      emit(n.args[0], c);
      emit(n.args[1], c);
      emit(n.args[2], c);
      push(c, {Op::Mux, 0, 0, 0}, -2);
      return;
    case Node::Op::Concat:
      emit(n.args[0], c);
      for (std::size_t i = 1; i < n.args.size(); ++i) {
        emit(n.args[i], c);
        push(c, {Op::ConcatStep, 0, n.args[i].width, 0}, -1);
      }
      return;
    default: {
      emit(n.args[0], c);
      emit(n.args[1], c);
      static const std::pair<Node::Op, Op> kMap[] = {
          {Node::Op::And, Op::And}, {Node::Op::Or, Op::Or}, {Node::Op::Xor, Op::Xor}, {Node::Op::Add, Op::Add},
          {Node::Op::Sub, Op::Sub}, {Node::Op::Eq, Op::Eq}, {Node::Op::Ne, Op::Ne},   {Node::Op::Lt, Op::Lt},
          {Node::Op::Shl, Op::Shl}, {Node::Op::Shr, Op::Shr},
      };
      for (const auto& [from, to] : kMap) {
        if (from == n.op) {
          push(c, {to, 0, 0, mask}, -1);
          return;
        }
      }
      throw Error("simulator: unhandled expression node");
    }
    }
  }

  const Design& design_;
  int depth_ = 0;
};

} // namespace

Schedule compile(const Design& design) {
  Schedule s;
  s.design = std::make_shared<const Design>(design);
  const Design& d = *s.design;

  // Kahn's algorithm over assignments; ties resolve by assignment index so
  // the order is deterministic.
  std::vector<int> driver(d.signals.size(), -1);
  for (std::size_t i = 0; i < d.comb.size(); ++i) driver[d.comb[i].target] = static_cast<int>(i);
  std::vector<std::vector<std::uint32_t>> users(d.comb.size());
  std::vector<std::size_t> pending(d.comb.size(), 0);
  for (std::size_t i = 0; i < d.comb.size(); ++i) {
    for (auto op : netlist::expr_operands(d.comb[i].expr)) {
      if (driver[op] >= 0) {
        users[static_cast<std::size_t>(driver[op])].push_back(static_cast<std::uint32_t>(i));
        ++pending[i];
      }
    }
  }
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
  for (std::uint32_t i = 0; i < d.comb.size(); ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    const std::uint32_t i = ready.top();
    ready.pop();
    s.comb_order.push_back(i);
    for (auto u : users[i]) {
      if (--pending[u] == 0) ready.push(u);
    }
  }
  if (s.comb_order.size() != d.comb.size()) throw Error("simulator: combinational logic is cyclic");

  Compiler comp(d);
  for (auto i : s.comb_order) s.comb_code.push_back(comp.compile(d.comb[i].expr, d.signal(d.comb[i].target).width));
  for (const auto& r : d.regs) s.reg_code.push_back(comp.compile(r.next, d.signal(r.target).width));
  for (const auto& w : d.mem_writes) {
    s.mem_ports.push_back({w.memory, comp.compile(w.enable, 64), comp.compile(w.addr, 64),
                           comp.compile(w.data, d.signal(w.memory).width)});
  }
  s.mem_offset.assign(d.signals.size(), 0);
  for (std::size_t i = 0; i < d.signals.size(); ++i) {
    if (d.signals[i].kind == SignalKind::Memory) {
      s.mem_offset[i] = s.mem_words;
      s.mem_words += d.signals[i].depth;
    }
  }
  s.max_stack = comp.max_stack;
  return s;
}

Simulator::Simulator(const Schedule& schedule)
    : sched_(schedule), design_(*schedule.design), values_(design_.signals.size(), 0), mem_(schedule.mem_words, 0),
      stack_(schedule.max_stack + 1, 0), next_regs_(design_.regs.size(), 0) {
  reset();
}

void Simulator::reset() {
  for (std::size_t i = 0; i < design_.signals.size(); ++i) {
    const auto& s = design_.signals[i];
    values_[i] = s.stateful() ? s.init : 0;
    if (s.kind == SignalKind::Memory) {
      std::fill_n(mem_.begin() + static_cast<std::ptrdiff_t>(sched_.mem_offset[i]), s.depth, s.init);
    }
  }
  cycle_ = 0;
  settle();
}

void Simulator::set_input(netlist::SignalId id, std::uint64_t value) {
  values_[id] = value & width_mask(design_.signal(id).width);
}

void Simulator::load_memory(netlist::SignalId memory, const std::vector<std::uint64_t>& words) {
  const auto& s = design_.signal(memory);
  if (s.kind != SignalKind::Memory) throw ConfigError("'" + s.name + "' is not a memory");
  if (words.size() > s.depth) {
    throw ConfigError("image of " + std::to_string(words.size()) + " words does not fit '" + s.name + "' (depth " +
                      std::to_string(s.depth) + ")");
  }
  for (std::size_t i = 0; i < words.size(); ++i) mem_[sched_.mem_offset[memory] + i] = words[i] & width_mask(s.width);
}

std::uint64_t Simulator::memory(netlist::SignalId id, std::size_t index) const {
  return mem_[sched_.mem_offset[id] + index];
}

std::uint64_t Simulator::eval(const Code& code) {
  using Op = Code::Op;
  std::uint64_t* sp = stack_.data(); // points one past the top
  for (const auto& in : code.instrs) {
    switch (in.op) {
    case Op::Const: *sp++ = in.imm; break;
    case Op::Load: *sp++ = values_[in.sig]; break;
    case Op::Slice: *sp++ = (values_[in.sig] >> in.shift) & in.imm; break;
    case Op::MemRead: {
      const auto& s = design_.signals[in.sig];
      const std::uint64_t idx = sp[-1];
      sp[-1] = idx < s.depth ? mem_[sched_.mem_offset[in.sig] + idx] : 0;
      break;
    }
    case Op::BitSel: {
      const std::uint64_t idx = sp[-1];
      sp[-1] = idx < 64 ? (values_[in.sig] >> idx) & 1 : 0;
      break;
    }
    case Op::Not: sp[-1] = ~sp[-1] & in.imm; break;
    case Op::Mux: {
      const std::uint64_t b = *--sp;
      const std::uint64_t a = *--sp;
      sp[-1] = sp[-1] ? a : b;
      break;
    }
    case Op::ConcatStep: {
      const std::uint64_t lo = *--sp;
      sp[-1] = in.shift >= 64 ? lo : (sp[-1] << in.shift) | lo;
      break;
    }
    default: {
      const std::uint64_t b = *--sp;
      std::uint64_t& a = sp[-1];
      switch (in.op) {
      case Op::And: a = a & b; break;
      case Op::Or: a = a | b; break;
      case Op::Xor: a = a ^ b; break;
      case Op::Add: a = (a + b) & in.imm; break;
      case Op::Sub: a = (a - b) & in.imm; break;
      case Op::Eq: a = a == b; break;
      case Op::Ne: a = a != b; break;
      case Op::Lt: a = a < b; break;
      case Op::Shl: a = b >= 64 ? 0 : (a << b) & in.imm; break;
      case Op::Shr: a = b >= 64 ? 0 : a >> b; break;
      default: break;
      }
    }
    }
  }
  return sp[-1] & code.mask;
}

void Simulator::settle() {
  for (std::size_t k = 0; k < sched_.comb_order.size(); ++k) {
    values_[design_.comb[sched_.comb_order[k]].target] = eval(sched_.comb_code[k]);
  }
}

void Simulator::clock() {
  for (std::size_t i = 0; i < design_.regs.size(); ++i) next_regs_[i] = eval(sched_.reg_code[i]);
  pending_.clear();
  for (const auto& p : sched_.mem_ports) {
    if (!eval(p.enable)) continue;
    const std::uint64_t addr = eval(p.addr);
    const auto& s = design_.signals[p.memory];
    if (addr >= s.depth) continue; // out-of-range writes are dropped
    pending_.push_back({sched_.mem_offset[p.memory] + addr, eval(p.data)});
  }
  for (std::size_t i = 0; i < design_.regs.size(); ++i) values_[design_.regs[i].target] = next_regs_[i];
  for (const auto& w : pending_) mem_[w.slot] = w.value;
  ++cycle_;
}

std::vector<WaveSignal> Simulator::wave_signals() const {
  std::vector<WaveSignal> out;
  for (const auto& s : design_.signals) {
    if (s.kind == SignalKind::Memory) {
      for (unsigned i = 0; i < s.depth; ++i) out.push_back({s.name + "[" + std::to_string(i) + "]", s.width, true});
    } else {
      out.push_back({s.name, s.width, s.kind == SignalKind::Reg});
    }
  }
  return out;
}

void Simulator::sample(std::vector<std::uint64_t>& out) const {
  out.clear();
  for (std::size_t i = 0; i < design_.signals.size(); ++i) {
    const auto& s = design_.signals[i];
    if (s.kind == SignalKind::Memory) {
      const auto* base = mem_.data() + sched_.mem_offset[i];
      out.insert(out.end(), base, base + s.depth);
    } else {
      out.push_back(values_[i]);
    }
  }
}

Waveform simulate(const Schedule& schedule, std::uint64_t cycles,
                  const std::function<void(std::uint64_t, Simulator&)>& drive) {
  Simulator sim(schedule);
  Waveform w(sim.wave_signals());
  std::vector<std::uint64_t> row;
  for (std::uint64_t t = 0; t < cycles; ++t) {
    if (drive) drive(t, sim);
    sim.settle();
    sim.sample(row);
    w.append(row);
    sim.clock();
  }
  return w;
}

} // namespace specleak::sim
