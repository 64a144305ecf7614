#pragma once

// Source-level syntax tree of the netlist language (see docs/grammar.md).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specleak/error.hpp"

namespace specleak::netlist {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

class NetlistError : public Error {
public:
  enum class Kind {
    Syntax,
    UndeclaredSignal,
    DuplicateDeclaration,
    UnknownModule,
    TopModule,
    WidthMismatch,
    MultipleDrivers,
    Undriven,
    CombinationalLoop,
    Unsupported,
  };

  NetlistError(Kind kind, SourceLoc loc, const std::string& message,
               std::vector<std::string> signals = {});

  Kind kind() const { return kind_; }
  SourceLoc loc() const { return loc_; }
  /// Signals involved (cycle members for CombinationalLoop, drivers for MultipleDrivers).
  const std::vector<std::string>& signals() const { return signals_; }

private:
  Kind kind_;
  SourceLoc loc_;
  std::vector<std::string> signals_;
};

const char* to_string(NetlistError::Kind kind);

enum class UnaryOp { Not };
enum class BinaryOp { And, Or, Xor, Add, Sub, Eq, Ne, Lt, Shl, Shr };

const char* to_string(BinaryOp op);

struct Expr {
  enum class Kind {
    Const,   // value, width (0 = unsized)
    Ref,     // name
    Index,   // name[args[0]]  (bit-select on a vector, read on a memory)
    Slice,   // name[msb:lsb]
    Unary,   // unary_op args[0]
    Binary,  // args[0] binary_op args[1]
    Ternary, // args[0] ? args[1] : args[2]
    Concat,  // {args...}
    Repeat,  // {count{args...}}
  };

  Kind kind = Kind::Const;
  std::string name;
  std::uint64_t value = 0;
  unsigned width = 0;
  unsigned msb = 0;
  unsigned lsb = 0;
  unsigned count = 0;
  UnaryOp unary_op = UnaryOp::Not;
  BinaryOp binary_op = BinaryOp::And;
  std::vector<Expr> args;
  SourceLoc loc;

  static Expr constant(std::uint64_t value, unsigned width = 0);
  static Expr ref(std::string name);
};

struct Stmt {
  enum class Kind { Assign, If, Block };

  Kind kind = Kind::Block;
  // Assign: target[index] <= rhs
  std::string target;
  std::optional<Expr> index;
  Expr rhs;
  // If: cond, then_body, else_body. Block: then_body.
  Expr cond;
  std::vector<Stmt> then_body;
  std::vector<Stmt> else_body;
  bool has_else = false;
  SourceLoc loc;
};

enum class PortDir { Input, Output };

struct Port {
  std::string name;
  PortDir dir = PortDir::Input;
  unsigned width = 1;
  bool is_reg = false;
  std::uint64_t init = 0;
  SourceLoc loc;
};

struct NetDecl {
  enum class Kind { Wire, Reg, Memory };
  std::string name;
  Kind kind = Kind::Wire;
  unsigned width = 1;
  unsigned depth = 0;
  std::uint64_t init = 0;
  SourceLoc loc;
};

struct ContAssign {
  std::string target;
  Expr rhs;
  SourceLoc loc;
};

struct AlwaysBlock {
  std::string clock;
  std::vector<Stmt> body;
  SourceLoc loc;
};

struct Binding {
  std::string port;
  std::string signal;
  SourceLoc loc;
};

struct Instance {
  std::string module_name;
  std::string instance_name;
  std::vector<Binding> bindings;
  SourceLoc loc;
};

struct Module {
  std::string name;
  std::vector<Port> ports;
  std::vector<NetDecl> nets;
  std::vector<ContAssign> assigns;
  std::vector<AlwaysBlock> always_blocks;
  std::vector<Instance> instances;
  SourceLoc loc;

  const Port* find_port(const std::string& n) const;
  const NetDecl* find_net(const std::string& n) const;
};

struct SourceDesign {
  std::vector<Module> modules;

  const Module* find_module(const std::string& name) const;
  /// The unique module not instantiated by any other module.
  const Module& top() const;
};

/// Structural equality; source locations are ignored.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const SourceDesign& a, const SourceDesign& b);

} // namespace specleak::netlist
