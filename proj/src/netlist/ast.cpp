#include "specleak/netlist/ast.hpp"

#include <algorithm>
#include <set>

namespace specleak::netlist {

namespace {

std::string format_message(NetlistError::Kind kind, SourceLoc loc, const std::string& message) {
  std::string out = to_string(kind);
  if (loc.line > 0) {
    out += " at line " + std::to_string(loc.line) + ", column " + std::to_string(loc.column);
  }
  out += ": " + message;
  return out;
}

bool equal_lists(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const Stmt& x, const Stmt& y) { return structurally_equal(x, y); });
}

} // namespace

NetlistError::NetlistError(Kind kind, SourceLoc loc, const std::string& message,
                           std::vector<std::string> signals)
    : Error(format_message(kind, loc, message)), kind_(kind), loc_(loc),
      signals_(std::move(signals)) {}

const char* to_string(NetlistError::Kind kind) {
  switch (kind) {
  case NetlistError::Kind::Syntax: return "syntax error";
  case NetlistError::Kind::UndeclaredSignal: return "undeclared signal";
  case NetlistError::Kind::DuplicateDeclaration: return "duplicate declaration";
  case NetlistError::Kind::UnknownModule: return "unknown module";
  case NetlistError::Kind::TopModule: return "top module error";
  case NetlistError::Kind::WidthMismatch: return "width mismatch";
  case NetlistError::Kind::MultipleDrivers: return "multiple drivers";
  case NetlistError::Kind::Undriven: return "undriven signal";
  case NetlistError::Kind::CombinationalLoop: return "combinational loop";
  case NetlistError::Kind::Unsupported: return "unsupported construct";
  }
  return "netlist error";
}

const char* to_string(BinaryOp op) {
  switch (op) {
  case BinaryOp::And: return "&";
  case BinaryOp::Or: return "|";
  case BinaryOp::Xor: return "^";
  case BinaryOp::Add: return "+";
  case BinaryOp::Sub: return "-";
  case BinaryOp::Eq: return "==";
  case BinaryOp::Ne: return "!=";
  case BinaryOp::Lt: return "<";
  case BinaryOp::Shl: return "<<";
  case BinaryOp::Shr: return ">>";
  }
  return "?";
}

Expr Expr::constant(std::uint64_t value, unsigned width) {
  Expr e;
  e.kind = Kind::Const;
  e.value = value;
  e.width = width;
  return e;
}

Expr Expr::ref(std::string name) {
  Expr e;
  e.kind = Kind::Ref;
  e.name = std::move(name);
  return e;
}

const Port* Module::find_port(const std::string& n) const {
  auto it = std::find_if(ports.begin(), ports.end(), [&](const Port& p) { return p.name == n; });
  return it == ports.end() ? nullptr : &*it;
}

const NetDecl* Module::find_net(const std::string& n) const {
  auto it = std::find_if(nets.begin(), nets.end(), [&](const NetDecl& d) { return d.name == n; });
  return it == nets.end() ? nullptr : &*it;
}

const Module* SourceDesign::find_module(const std::string& name) const {
  auto it = std::find_if(modules.begin(), modules.end(),
                         [&](const Module& m) { return m.name == name; });
  return it == modules.end() ? nullptr : &*it;
}

const Module& SourceDesign::top() const {
  std::set<std::string> instantiated;
  for (const auto& m : modules) {
    for (const auto& inst : m.instances) {
      instantiated.insert(inst.module_name);
    }
  }
  const Module* top = nullptr;
  for (const auto& m : modules) {
    if (!instantiated.count(m.name)) {
      if (top != nullptr) {
        throw NetlistError(NetlistError::Kind::TopModule, m.loc,
                           "more than one top module: '" + top->name + "' and '" + m.name + "'");
      }
      top = &m;
    }
  }
  if (top == nullptr) {
    throw NetlistError(NetlistError::Kind::TopModule, {}, "no top module (every module is instantiated)");
  }
  return *top;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) {
    return false;
  }
  switch (a.kind) {
  case Expr::Kind::Const:
    if (a.value != b.value || a.width != b.width) return false;
    break;
  case Expr::Kind::Ref:
  case Expr::Kind::Index:
    if (a.name != b.name) return false;
    break;
  case Expr::Kind::Slice:
    if (a.name != b.name || a.msb != b.msb || a.lsb != b.lsb) return false;
    break;
  case Expr::Kind::Unary:
    if (a.unary_op != b.unary_op) return false;
    break;
  case Expr::Kind::Binary:
    if (a.binary_op != b.binary_op) return false;
    break;
  case Expr::Kind::Repeat:
    if (a.count != b.count) return false;
    break;
  case Expr::Kind::Ternary:
  case Expr::Kind::Concat:
    break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(a.args[i], b.args[i])) return false;
  }
  return true;
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
  case Stmt::Kind::Assign:
    if (a.target != b.target || a.index.has_value() != b.index.has_value()) return false;
    if (a.index && !structurally_equal(*a.index, *b.index)) return false;
    return structurally_equal(a.rhs, b.rhs);
  case Stmt::Kind::If:
    return a.has_else == b.has_else && structurally_equal(a.cond, b.cond) &&
           equal_lists(a.then_body, b.then_body) && equal_lists(a.else_body, b.else_body);
  case Stmt::Kind::Block:
    return equal_lists(a.then_body, b.then_body);
  }
  return false;
}

bool structurally_equal(const SourceDesign& a, const SourceDesign& b) {
  if (a.modules.size() != b.modules.size()) return false;
  for (std::size_t m = 0; m < a.modules.size(); ++m) {
    const Module& x = a.modules[m];
    const Module& y = b.modules[m];
    if (x.name != y.name || x.ports.size() != y.ports.size() || x.nets.size() != y.nets.size() ||
        x.assigns.size() != y.assigns.size() || x.always_blocks.size() != y.always_blocks.size() ||
        x.instances.size() != y.instances.size()) {
      return false;
    }
    for (std::size_t i = 0; i < x.ports.size(); ++i) {
      const Port& p = x.ports[i];
      const Port& q = y.ports[i];
      if (p.name != q.name || p.dir != q.dir || p.width != q.width || p.is_reg != q.is_reg ||
          p.init != q.init) {
        return false;
      }
    }
    for (std::size_t i = 0; i < x.nets.size(); ++i) {
      const NetDecl& p = x.nets[i];
      const NetDecl& q = y.nets[i];
      if (p.name != q.name || p.kind != q.kind || p.width != q.width || p.depth != q.depth ||
          p.init != q.init) {
        return false;
      }
    }
    for (std::size_t i = 0; i < x.assigns.size(); ++i) {
      if (x.assigns[i].target != y.assigns[i].target ||
          !structurally_equal(x.assigns[i].rhs, y.assigns[i].rhs)) {
        return false;
      }
    }
    for (std::size_t i = 0; i < x.always_blocks.size(); ++i) {
      if (x.always_blocks[i].clock != y.always_blocks[i].clock ||
          !equal_lists(x.always_blocks[i].body, y.always_blocks[i].body)) {
        return false;
      }
    }
    for (std::size_t i = 0; i < x.instances.size(); ++i) {
      const Instance& p = x.instances[i];
      const Instance& q = y.instances[i];
      if (p.module_name != q.module_name || p.instance_name != q.instance_name ||
          p.bindings.size() != q.bindings.size()) {
        return false;
      }
      for (std::size_t j = 0; j < p.bindings.size(); ++j) {
        if (p.bindings[j].port != q.bindings[j].port || p.bindings[j].signal != q.bindings[j].signal) {
          return false;
        }
      }
    }
  }
  return true;
}

} // namespace specleak::netlist
