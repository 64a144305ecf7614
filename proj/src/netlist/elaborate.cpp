#include "specleak/netlist/design.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include <json.hpp>

#include "specleak/util.hpp"

namespace specleak::netlist {

namespace {

using Kind = NetlistError::Kind;

struct PendingSignal {
  Signal sig;
  SourceLoc loc;
};

// A module instantiation site during flattening.
struct Scope {
  const Module* module = nullptr;
  std::string prefix;
};

Node make_const(std::uint64_t value, unsigned width) {
  Node n;
  n.op = Node::Op::Const;
  n.width = width;
  n.value = value & width_mask(width);
  return n;
}

Node make_ref(SignalId id, unsigned width) {
  Node n;
  n.op = Node::Op::Ref;
  n.sig = id;
  n.width = width;
  return n;
}

Node make_binary(Node::Op op, Node a, Node b, unsigned width) {
  Node n;
  n.op = op;
  n.width = width;
  n.args.push_back(std::move(a));
  n.args.push_back(std::move(b));
  return n;
}

Node to_bool(Node c) {
  if (c.width == 1) return c;
  const unsigned w = c.width;
  return make_binary(Node::Op::Ne, std::move(c), make_const(0, w), 1);
}

Node negate_bool(Node c) {
  Node n;
  n.op = Node::Op::Not;
  n.width = 1;
  n.args.push_back(to_bool(std::move(c)));
  return n;
}

bool same_node(const Node& a, const Node& b) {
  if (a.op != b.op || a.width != b.width || a.value != b.value || a.sig != b.sig || a.lsb != b.lsb ||
      a.args.size() != b.args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_node(a.args[i], b.args[i])) return false;
  }
  return true;
}

class Elaborator {
public:
  explicit Elaborator(const SourceDesign& src) : src_(src) {}

  Design run() {
    const Module& top = src_.top();
    design_.top = top.name;
    collect(top, top.name);
    std::sort(pending_.begin(), pending_.end(),
              [](const PendingSignal& a, const PendingSignal& b) { return a.sig.name < b.sig.name; });
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      if (i > 0 && pending_[i].sig.name == pending_[i - 1].sig.name) {
        throw NetlistError(Kind::DuplicateDeclaration, pending_[i].loc,
                           "hierarchical name '" + pending_[i].sig.name + "' is not unique");
      }
      design_.signals.push_back(pending_[i].sig);
    }
    design_.rebuild_index();
    lower(top, top.name);
    check_drivers();
    check_clocks();
    check_loops();
    return std::move(design_);
  }

private:
  void collect(const Module& m, const std::string& prefix) {
    for (const auto& p : m.ports) {
      Signal s;
      s.name = prefix + "." + p.name;
      s.width = p.width;
      s.kind = p.is_reg ? SignalKind::Reg : (p.dir == PortDir::Input ? SignalKind::Input : SignalKind::Output);
      s.is_port = true;
      s.init = p.init & width_mask(p.width);
      pending_.push_back({s, p.loc});
    }
    for (const auto& n : m.nets) {
      Signal s;
      s.name = prefix + "." + n.name;
      s.width = n.width;
      s.kind = n.kind == NetDecl::Kind::Wire ? SignalKind::Wire
               : n.kind == NetDecl::Kind::Reg ? SignalKind::Reg
                                               : SignalKind::Memory;
      s.depth = n.depth;
      s.init = n.init & width_mask(n.width);
      pending_.push_back({s, n.loc});
    }
    for (const auto& inst : m.instances) {
      collect(*src_.find_module(inst.module_name), prefix + "." + inst.instance_name);
    }
  }

  SignalId resolve(const std::string& prefix, const std::string& name) const {
    return design_.require(prefix + "." + name);
  }

  Node lower_expr(const Expr& e, const std::string& prefix) {
    switch (e.kind) {
    case Expr::Kind::Const:
      return make_const(e.value, e.width == 0 ? 32 : e.width);
    case Expr::Kind::Ref: {
      const SignalId id = resolve(prefix, e.name);
      const Signal& s = design_.signal(id);
      if (s.kind == SignalKind::Memory) {
        throw NetlistError(Kind::Unsupported, e.loc, "memory '" + e.name + "' must be indexed");
      }
      return make_ref(id, s.width);
    }
    case Expr::Kind::Index: {
      const SignalId id = resolve(prefix, e.name);
      const Signal& s = design_.signal(id);
      Node n;
      n.op = s.kind == SignalKind::Memory ? Node::Op::MemRead : Node::Op::BitSel;
      n.sig = id;
      n.width = s.kind == SignalKind::Memory ? s.width : 1;
      n.args.push_back(lower_expr(e.args[0], prefix));
      return n;
    }
    case Expr::Kind::Slice: {
      const SignalId id = resolve(prefix, e.name);
      const Signal& s = design_.signal(id);
      if (s.kind == SignalKind::Memory) {
        throw NetlistError(Kind::Unsupported, e.loc, "part-select on memory '" + e.name + "'");
      }
      if (e.msb >= s.width) {
        throw NetlistError(Kind::WidthMismatch, e.loc,
                           "part-select [" + std::to_string(e.msb) + ":" + std::to_string(e.lsb) +
                               "] out of range for '" + e.name + "'");
      }
      Node n;
      n.op = Node::Op::Slice;
      n.sig = id;
      n.lsb = e.lsb;
      n.width = e.msb - e.lsb + 1;
      return n;
    }
    case Expr::Kind::Unary: {
      Node a = lower_expr(e.args[0], prefix);
      Node n;
      n.op = Node::Op::Not;
      n.width = a.width;
      n.args.push_back(std::move(a));
      return n;
    }
    case Expr::Kind::Binary: {
      Node a = lower_expr(e.args[0], prefix);
      Node b = lower_expr(e.args[1], prefix);
      static const std::map<BinaryOp, Node::Op> kOps = {
          {BinaryOp::And, Node::Op::And}, {BinaryOp::Or, Node::Op::Or}, {BinaryOp::Xor, Node::Op::Xor},
          {BinaryOp::Add, Node::Op::Add}, {BinaryOp::Sub, Node::Op::Sub}, {BinaryOp::Eq, Node::Op::Eq},
          {BinaryOp::Ne, Node::Op::Ne},   {BinaryOp::Lt, Node::Op::Lt},   {BinaryOp::Shl, Node::Op::Shl},
          {BinaryOp::Shr, Node::Op::Shr},
      };
      const Node::Op op = kOps.at(e.binary_op);
      unsigned width = std::max(a.width, b.width);
      if (op == Node::Op::Eq || op == Node::Op::Ne || op == Node::Op::Lt) width = 1;
      if (op == Node::Op::Shl || op == Node::Op::Shr) width = a.width;
      return make_binary(op, std::move(a), std::move(b), width);
    }
    case Expr::Kind::Ternary: {
      Node c = lower_expr(e.args[0], prefix);
      Node a = lower_expr(e.args[1], prefix);
      Node b = lower_expr(e.args[2], prefix);
      Node n;
      n.op = Node::Op::Mux;
      n.width = std::max(a.width, b.width);
      n.args.push_back(std::move(c));
      n.args.push_back(std::move(a));
      n.args.push_back(std::move(b));
      return n;
    }
    case Expr::Kind::Concat:
    case Expr::Kind::Repeat: {
      Node n;
      n.op = Node::Op::Concat;
      n.width = 0;
      const unsigned reps = e.kind == Expr::Kind::Repeat ? e.count : 1;
      for (unsigned r = 0; r < reps; ++r) {
        for (const auto& a : e.args) {
          n.args.push_back(lower_expr(a, prefix));
          n.width += n.args.back().width;
        }
      }
      if (n.width > 64) {
        throw NetlistError(Kind::Unsupported, e.loc, "concatenation wider than 64 bits");
      }
      return n;
    }
    }
    throw NetlistError(Kind::Unsupported, e.loc, "unknown expression");
  }

  void add_comb(SignalId target, Node expr, AssignOrigin origin, SourceLoc loc) {
    drivers_[target].push_back({origin == AssignOrigin::PortBinding ? "port binding" : "assign", loc});
    design_.comb.push_back({target, std::move(expr), origin});
  }

  struct BlockState {
    std::map<SignalId, Node> next;
    std::vector<MemWrite> writes;
  };

  Node current_value(const BlockState& st, SignalId id) const {
    auto it = st.next.find(id);
    if (it != st.next.end()) return it->second;
    return make_ref(id, design_.signal(id).width);
  }

  void lower_stmts(const std::vector<Stmt>& body, const std::string& prefix, const std::optional<Node>& path,
                   BlockState& st, std::set<SignalId>& targets) {
    for (const auto& s : body) {
      switch (s.kind) {
      case Stmt::Kind::Block:
        lower_stmts(s.then_body, prefix, path, st, targets);
        break;
      case Stmt::Kind::Assign: {
        const SignalId id = resolve(prefix, s.target);
        const Signal& sig = design_.signal(id);
        if (sig.kind == SignalKind::Memory) {
          if (!s.index) {
            throw NetlistError(Kind::Unsupported, s.loc, "write to memory '" + s.target + "' needs an index");
          }
          MemWrite w;
          w.memory = id;
          w.enable = path ? *path : make_const(1, 1);
          w.addr = lower_expr(*s.index, prefix);
          w.data = lower_expr(s.rhs, prefix);
          st.writes.push_back(std::move(w));
        } else if (sig.kind == SignalKind::Reg) {
          if (s.index) {
            throw NetlistError(Kind::Unsupported, s.loc, "bit-level non-blocking assignment to '" + s.target + "'");
          }
          st.next[id] = lower_expr(s.rhs, prefix);
        } else {
          throw NetlistError(Kind::Unsupported, s.loc,
                             "'" + s.target + "' is not a reg; clocked assignments need reg targets");
        }
        targets.insert(id);
        break;
      }
      case Stmt::Kind::If: {
        const Node cond = to_bool(lower_expr(s.cond, prefix));
        const Node not_cond = negate_bool(cond);
        auto extend = [&](const Node& c) -> Node {
          return path ? make_binary(Node::Op::And, *path, c, 1) : c;
        };
        BlockState then_st{st.next, {}};
        lower_stmts(s.then_body, prefix, extend(cond), then_st, targets);
        BlockState else_st{st.next, {}};
        lower_stmts(s.else_body, prefix, extend(not_cond), else_st, targets);
        std::set<SignalId> touched;
        for (const auto& [id, _] : then_st.next) touched.insert(id);
        for (const auto& [id, _] : else_st.next) touched.insert(id);
        for (SignalId id : touched) {
          Node a = current_value(then_st, id);
          Node b = current_value(else_st, id);
          if (same_node(a, b)) {
            st.next[id] = std::move(a);
            continue;
          }
          Node m;
          m.op = Node::Op::Mux;
          m.width = std::max(a.width, b.width);
          m.args.push_back(cond);
          m.args.push_back(std::move(a));
          m.args.push_back(std::move(b));
          st.next[id] = std::move(m);
        }
        for (auto& w : then_st.writes) st.writes.push_back(std::move(w));
        for (auto& w : else_st.writes) st.writes.push_back(std::move(w));
        break;
      }
      }
    }
  }

  void lower(const Module& m, const std::string& prefix) {
    for (const auto& a : m.assigns) {
      const SignalId id = resolve(prefix, a.target);
      const Signal& sig = design_.signal(id);
      if (sig.kind == SignalKind::Memory || sig.kind == SignalKind::Reg) {
        throw NetlistError(Kind::Unsupported, a.loc,
                           "continuous assignment to reg '" + a.target + "'; use an always block");
      }
      add_comb(id, lower_expr(a.rhs, prefix), AssignOrigin::Assign, a.loc);
    }
    for (const auto& b : m.always_blocks) {
      const SignalId clock = resolve(prefix, b.clock);
      BlockState st;
      std::set<SignalId> targets;
      lower_stmts(b.body, prefix, std::nullopt, st, targets);
      for (SignalId id : targets) {
        if (design_.signal(id).kind == SignalKind::Memory) {
          drivers_[id].push_back({"always block", b.loc});
        }
      }
      for (auto& [id, next] : st.next) {
        drivers_[id].push_back({"always block", b.loc});
        design_.regs.push_back({id, std::move(next), clock});
      }
      for (auto& w : st.writes) {
        w.clock = clock;
        design_.mem_writes.push_back(std::move(w));
      }
      clocks_.push_back({clock, b.loc});
    }
    for (const auto& inst : m.instances) {
      const Module& child = *src_.find_module(inst.module_name);
      const std::string child_prefix = prefix + "." + inst.instance_name;
      for (const auto& bnd : inst.bindings) {
        const Port& port = *child.find_port(bnd.port);
        const SignalId outer = resolve(prefix, bnd.signal);
        const SignalId inner = resolve(child_prefix, bnd.port);
        if (design_.signal(outer).width != design_.signal(inner).width) {
          throw NetlistError(Kind::WidthMismatch, bnd.loc, "binding ." + bnd.port + "(" + bnd.signal + ")");
        }
        const SignalId from = port.dir == PortDir::Input ? outer : inner;
        const SignalId to = port.dir == PortDir::Input ? inner : outer;
        if (design_.signal(to).kind == SignalKind::Memory) {
          throw NetlistError(Kind::Unsupported, bnd.loc, "memories cannot be driven by ports");
        }
        design_.port_flows.push_back({from, to});
        add_comb(to, make_ref(from, design_.signal(from).width), AssignOrigin::PortBinding, bnd.loc);
      }
      lower(child, child_prefix);
    }
  }

  void check_drivers() {
    const SignalId top_prefix_len = static_cast<SignalId>(design_.top.size() + 1);
    for (SignalId id = 0; id < design_.signals.size(); ++id) {
      const Signal& s = design_.signal(id);
      const auto it = drivers_.find(id);
      const std::size_t count = it == drivers_.end() ? 0 : it->second.size();
      const bool top_level = s.name.find('.', top_prefix_len) == std::string::npos;
      if (count > 1) {
        std::vector<std::string> names;
        for (const auto& d : it->second) names.push_back(d.what);
        throw NetlistError(Kind::MultipleDrivers, it->second[1].loc, "'" + s.name + "' has " +
                                                                         std::to_string(count) + " drivers",
                           names);
      }
      if (s.kind == SignalKind::Input && top_level && count != 0) {
        throw NetlistError(Kind::MultipleDrivers, it->second[0].loc, "top-level input '" + s.name + "' is driven internally");
      }
      if ((s.kind == SignalKind::Wire || s.kind == SignalKind::Output ||
           (s.kind == SignalKind::Input && !top_level)) &&
          count == 0) {
        throw NetlistError(Kind::Undriven, {}, "'" + s.name + "' has no driver");
      }
    }
  }

  SignalId clock_root(SignalId id) const {
    std::set<SignalId> seen;
    for (;;) {
      if (!seen.insert(id).second) return id;
      const auto it = std::find_if(design_.comb.begin(), design_.comb.end(),
                                   [&](const CombAssign& a) { return a.target == id; });
      if (it == design_.comb.end() || it->expr.op != Node::Op::Ref) return id;
      id = it->expr.sig;
    }
  }

  void check_clocks() {
    std::optional<SignalId> root;
    for (const auto& [clock, loc] : clocks_) {
      const SignalId r = clock_root(clock);
      if (root && *root != r) {
        throw NetlistError(Kind::Unsupported, loc,
                           "multiple clock domains: '" + design_.signal(*root).name + "' and '" +
                               design_.signal(r).name + "'");
      }
      root = r;
    }
  }

  void check_loops() {
    std::vector<int> driver_of(design_.signals.size(), -1);
    for (std::size_t i = 0; i < design_.comb.size(); ++i) {
      driver_of[design_.comb[i].target] = static_cast<int>(i);
    }
    std::vector<int> state(design_.signals.size(), 0);
    std::vector<SignalId> stack;
    std::function<void(SignalId)> visit = [&](SignalId id) {
      state[id] = 1;
      stack.push_back(id);
      if (driver_of[id] >= 0) {
        for (SignalId dep : expr_operands(design_.comb[static_cast<std::size_t>(driver_of[id])].expr)) {
          if (driver_of[dep] < 0) continue;
          if (state[dep] == 1) {
            std::vector<std::string> cycle;
            auto pos = std::find(stack.begin(), stack.end(), dep);
            for (auto it = pos; it != stack.end(); ++it) cycle.push_back(design_.signal(*it).name);
            std::string joined;
            for (const auto& c : cycle) joined += (joined.empty() ? "" : " -> ") + c;
            throw NetlistError(Kind::CombinationalLoop, {}, "cycle through " + joined, cycle);
          }
          if (state[dep] == 0) visit(dep);
        }
      }
      stack.pop_back();
      state[id] = 2;
    };
    for (SignalId id = 0; id < design_.signals.size(); ++id) {
      if (state[id] == 0) visit(id);
    }
  }

  struct DriverSite {
    std::string what;
    SourceLoc loc;
  };

  const SourceDesign& src_;
  Design design_;
  std::vector<PendingSignal> pending_;
  std::map<SignalId, std::vector<DriverSite>> drivers_;
  std::vector<std::pair<SignalId, SourceLoc>> clocks_;
};

void collect_operands(const Node& n, std::vector<SignalId>& out) {
  if (n.op == Node::Op::Ref || n.op == Node::Op::MemRead || n.op == Node::Op::BitSel || n.op == Node::Op::Slice) {
    out.push_back(n.sig);
  }
  for (const auto& a : n.args) collect_operands(a, out);
}

std::string op_symbol(Node::Op op) {
  switch (op) {
  case Node::Op::And: return "&";
  case Node::Op::Or: return "|";
  case Node::Op::Xor: return "^";
  case Node::Op::Add: return "+";
  case Node::Op::Sub: return "-";
  case Node::Op::Eq: return "==";
  case Node::Op::Ne: return "!=";
  case Node::Op::Lt: return "<";
  case Node::Op::Shl: return "<<";
  case Node::Op::Shr: return ">>";
  default: return "?";
  }
}

} // namespace

const char* to_string(SignalKind kind) {
  switch (kind) {
  case SignalKind::Input: return "input";
  case SignalKind::Output: return "output";
  case SignalKind::Wire: return "wire";
  case SignalKind::Reg: return "reg";
  case SignalKind::Memory: return "memory";
  }
  return "wire";
}

SignalKind signal_kind_from_string(const std::string& s) {
  if (s == "input") return SignalKind::Input;
  if (s == "output") return SignalKind::Output;
  if (s == "wire") return SignalKind::Wire;
  if (s == "reg") return SignalKind::Reg;
  if (s == "memory") return SignalKind::Memory;
  throw ConfigError("unknown signal kind '" + s + "'");
}

std::optional<SignalId> Design::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SignalId Design::require(const std::string& name) const {
  if (auto id = find(name)) return *id;
  throw NetlistError(NetlistError::Kind::UndeclaredSignal, {}, "no signal named '" + name + "'");
}

void Design::rebuild_index() {
  index_.clear();
  for (SignalId i = 0; i < signals.size(); ++i) index_.emplace(signals[i].name, i);
}

Design elaborate(const SourceDesign& src) { return Elaborator(src).run(); }

std::vector<SignalId> expr_operands(const Node& expr) {
  std::vector<SignalId> out;
  collect_operands(expr, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string print_node(const Design& design, const Node& n) {
  switch (n.op) {
  case Node::Op::Const:
    return std::to_string(n.width) + "'h" + to_hex(n.value, (n.width + 3) / 4);
  case Node::Op::Ref:
    return design.signal(n.sig).name;
  case Node::Op::MemRead:
  case Node::Op::BitSel:
    return design.signal(n.sig).name + "[" + print_node(design, n.args[0]) + "]";
  case Node::Op::Slice:
    return design.signal(n.sig).name + "[" + std::to_string(n.lsb + n.width - 1) + ":" + std::to_string(n.lsb) + "]";
  case Node::Op::Not:
    return "~" + print_node(design, n.args[0]);
  case Node::Op::Mux:
    return "(" + print_node(design, n.args[0]) + " ? " + print_node(design, n.args[1]) + " : " +
           print_node(design, n.args[2]) + ")";
  case Node::Op::Concat: {
    std::string s = "{";
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) s += ", ";
      s += print_node(design, n.args[i]);
    }
    return s + "}";
  }
  default:
    return "(" + print_node(design, n.args[0]) + " " + op_symbol(n.op) + " " + print_node(design, n.args[1]) + ")";
  }
}

std::string design_to_json(const Design& design) {
  using nlohmann::json;
  json signals = json::array();
  for (const auto& s : design.signals) {
    json j = {{"name", s.name}, {"width", s.width}, {"kind", to_string(s.kind)}};
    if (s.kind == SignalKind::Memory) j["depth"] = s.depth;
    if (s.stateful()) j["init"] = s.init;
    signals.push_back(std::move(j));
  }
  struct Row {
    std::string target;
    int order;
    json body;
  };
  std::vector<Row> rows;
  for (const auto& a : design.comb) {
    rows.push_back({design.signal(a.target).name, 0,
                    {{"target", design.signal(a.target).name},
                     {"kind", a.origin == AssignOrigin::PortBinding ? "port" : "comb"},
                     {"expr", print_node(design, a.expr)}}});
  }
  for (const auto& r : design.regs) {
    rows.push_back({design.signal(r.target).name, 1,
                    {{"target", design.signal(r.target).name},
                     {"kind", "reg"},
                     {"expr", print_node(design, r.next)},
                     {"clock", design.signal(r.clock).name}}});
  }
  int port = 0;
  for (const auto& w : design.mem_writes) {
    rows.push_back({design.signal(w.memory).name, 2 + port++,
                    {{"target", design.signal(w.memory).name},
                     {"kind", "memwrite"},
                     {"enable", print_node(design, w.enable)},
                     {"addr", print_node(design, w.addr)},
                     {"data", print_node(design, w.data)},
                     {"clock", design.signal(w.clock).name}}});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.target != b.target ? a.target < b.target : a.order < b.order;
  });
  json assigns = json::array();
  for (auto& r : rows) assigns.push_back(std::move(r.body));
  json doc = {{"format_version", kFormatVersion}, {"top", design.top}, {"signals", signals}, {"assigns", assigns}};
  return doc.dump(2) + "\n";
}

} // namespace specleak::netlist
