#pragma once

// Elaborated, hierarchy-flattened design IR shared by the IFG builder and
// the simulator.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "specleak/netlist/ast.hpp"

namespace specleak::netlist {

using SignalId = std::uint32_t;

enum class SignalKind { Input, Output, Wire, Reg, Memory };

const char* to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& s);

struct Signal {
  std::string name; // hierarchical, dot separated ("top.df1.q")
  unsigned width = 1;
  SignalKind kind = SignalKind::Wire;
  unsigned depth = 0;      // memories only
  std::uint64_t init = 0;  // registers and memory elements
  bool is_port = false;

  bool stateful() const { return kind == SignalKind::Reg || kind == SignalKind::Memory; }
};

/// Expression node over signal ids. Every node carries its result width.
struct Node {
  enum class Op {
    Const,
    Ref,      // sig
    MemRead,  // sig[args[0]]
    BitSel,   // sig[args[0]] on a vector
    Slice,    // sig[lsb + width - 1 : lsb]
    Not,
    And, Or, Xor, Add, Sub, Eq, Ne, Lt, Shl, Shr,
    Mux,      // args[0] ? args[1] : args[2]
    Concat,   // args[0] is most significant
  };

  Op op = Op::Const;
  unsigned width = 1;
  std::uint64_t value = 0;
  SignalId sig = 0;
  unsigned lsb = 0;
  std::vector<Node> args;
};

enum class AssignOrigin { Assign, PortBinding };

struct CombAssign {
  SignalId target = 0;
  Node expr;
  AssignOrigin origin = AssignOrigin::Assign;
};

struct RegAssign {
  SignalId target = 0;
  Node next;
  SignalId clock = 0;
};

/// One write port; ports of the same memory apply in declaration order (last wins).
struct MemWrite {
  SignalId memory = 0;
  Node enable;
  Node addr;
  Node data;
  SignalId clock = 0;
};

struct PortFlow {
  SignalId from = 0;
  SignalId to = 0;
};

struct Design {
  std::string top;
  std::vector<Signal> signals; // sorted by name; SignalId indexes this vector
  std::vector<CombAssign> comb;
  std::vector<RegAssign> regs;
  std::vector<MemWrite> mem_writes;
  std::vector<PortFlow> port_flows;

  std::optional<SignalId> find(const std::string& name) const;
  SignalId require(const std::string& name) const;
  const Signal& signal(SignalId id) const { return signals[id]; }

  void rebuild_index();

private:
  std::unordered_map<std::string, SignalId> index_;
};

/// Flattens the hierarchy rooted at the top module.
Design elaborate(const SourceDesign& src);

/// Every signal id read anywhere in `expr` (deduplicated, ascending).
std::vector<SignalId> expr_operands(const Node& expr);

std::string print_node(const Design& design, const Node& expr);

/// JSON export: {format_version, top, signals[], assigns[]}, stable ordering.
std::string design_to_json(const Design& design);

} // namespace specleak::netlist
