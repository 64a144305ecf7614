#include "specleak/netlist/parser.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace specleak::netlist {

namespace {

using Kind = NetlistError::Kind;

enum class Tok { Ident, Number, Symbol, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  std::uint64_t value = 0;
  unsigned width = 0; // sized literal width, 0 when unsized
  SourceLoc loc;
};

const std::set<std::string> kKeywords = {
    "module", "endmodule", "input", "output", "wire", "reg", "assign",
    "always", "posedge", "begin", "end", "if", "else",
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.type = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.type = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                src_[pos_] == '$')) {
          t.text += advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
        lex_number(t);
      } else {
        t.type = Tok::Symbol;
        static const char* kTwo[] = {"<=", "==", "!=", "<<", ">>"};
        bool matched = false;
        for (const char* two : kTwo) {
          if (src_.substr(pos_, 2) == two) {
            t.text = two;
            advance();
            advance();
            matched = true;
            break;
          }
        }
        if (!matched) {
          if (std::string_view("()[]{},;.:@=?~&|^+-<").find(c) == std::string_view::npos) {
            throw NetlistError(Kind::Syntax, t.loc, std::string("unexpected character '") + c + "'");
          }
          t.text = std::string(1, advance());
        }
      }
      out.push_back(std::move(t));
    }
  }

private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (src_.substr(pos_, 2) == "/*") {
        const SourceLoc start{line_, col_};
        advance();
        advance();
        while (pos_ < src_.size() && src_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= src_.size()) {
          throw NetlistError(Kind::Syntax, start, "unterminated block comment");
        }
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  std::string take_digits(bool allow_hex) {
    std::string digits;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '_' || std::isdigit(static_cast<unsigned char>(c)) ||
          (allow_hex && std::isxdigit(static_cast<unsigned char>(c)))) {
        advance();
        if (c != '_') digits += c;
      } else {
        break;
      }
    }
    return digits;
  }

  void lex_number(Token& t) {
    t.type = Tok::Number;
    std::string size_digits = take_digits(false);
    if (pos_ < src_.size() && src_[pos_] == '\'') {
      advance();
      if (pos_ >= src_.size()) {
        throw NetlistError(Kind::Syntax, t.loc, "truncated based literal");
      }
      const char base = static_cast<char>(std::tolower(static_cast<unsigned char>(advance())));
      int radix = 0;
      switch (base) {
      case 'b': radix = 2; break;
      case 'd': radix = 10; break;
      case 'h': radix = 16; break;
      default: throw NetlistError(Kind::Syntax, t.loc, std::string("unknown literal base '") + base + "'");
      }
      const std::string digits = take_digits(radix == 16);
      if (digits.empty()) {
        throw NetlistError(Kind::Syntax, t.loc, "based literal without digits");
      }
      t.value = parse_radix(digits, radix, t.loc);
      if (!size_digits.empty()) {
        t.width = static_cast<unsigned>(std::stoul(size_digits));
        if (t.width == 0 || t.width > 64) {
          throw NetlistError(Kind::Unsupported, t.loc, "literal width must be in [1, 64]");
        }
        if ((t.value & ~width_mask(t.width)) != 0) {
          throw NetlistError(Kind::WidthMismatch, t.loc, "literal value does not fit its width");
        }
      }
      t.text = size_digits + "'" + base + digits;
    } else {
      if (size_digits.empty()) {
        throw NetlistError(Kind::Syntax, t.loc, "malformed number");
      }
      t.value = parse_radix(size_digits, 10, t.loc);
      t.text = size_digits;
    }
  }

  static std::uint64_t width_mask(unsigned w) {
    return w >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << w) - 1);
  }

  static std::uint64_t parse_radix(const std::string& digits, int radix, SourceLoc loc) {
    std::uint64_t v = 0;
    for (char c : digits) {
      const int d = std::isdigit(static_cast<unsigned char>(c))
                        ? c - '0'
                        : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
      if (d >= radix) {
        throw NetlistError(Kind::Syntax, loc, std::string("digit '") + c + "' invalid for base");
      }
      const std::uint64_t next = v * static_cast<std::uint64_t>(radix) + static_cast<std::uint64_t>(d);
      if (next / static_cast<std::uint64_t>(radix) != v) {
        throw NetlistError(Kind::Unsupported, loc, "literal exceeds 64 bits");
      }
      v = next;
    }
    return v;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SourceDesign run() {
    SourceDesign d;
    while (peek().type != Tok::End) {
      d.modules.push_back(parse_module());
    }
    return d;
  }

private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_sym(const char* s, std::size_t ahead = 0) const {
    return peek(ahead).type == Tok::Symbol && peek(ahead).text == s;
  }
  bool is_kw(const char* s) const { return peek().type == Tok::Ident && peek().text == s; }
  bool accept_sym(const char* s) {
    if (is_sym(s)) {
      next();
      return true;
    }
    return false;
  }
  bool accept_kw(const char* s) {
    if (is_kw(s)) {
      next();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    const std::string got = t.type == Tok::End ? "end of input" : "'" + t.text + "'";
    throw NetlistError(Kind::Syntax, t.loc, "expected " + expected + ", got " + got);
  }

  void expect_sym(const char* s) {
    if (!accept_sym(s)) fail(std::string("'") + s + "'");
  }
  void expect_kw(const char* s) {
    if (!accept_kw(s)) fail(std::string("'") + s + "'");
  }

  std::string expect_ident() {
    if (peek().type != Tok::Ident || kKeywords.count(peek().text)) fail("identifier");
    return next().text;
  }

  unsigned expect_uint() {
    if (peek().type != Tok::Number) fail("number");
    return static_cast<unsigned>(next().value);
  }

  // '[' msb ':' 0 ']' -> width
  unsigned parse_width() {
    if (!is_sym("[")) return 1;
    const SourceLoc loc = peek().loc;
    next();
    const unsigned msb = expect_uint();
    expect_sym(":");
    const unsigned lsb = expect_uint();
    expect_sym("]");
    if (lsb != 0 || msb > 63) {
      throw NetlistError(Kind::Unsupported, loc, "vector ranges must be [msb:0] with msb < 64");
    }
    return msb + 1;
  }

  std::uint64_t parse_init() {
    if (!accept_sym("=")) return 0;
    if (peek().type != Tok::Number) fail("constant initial value");
    return next().value;
  }

  Module parse_module() {
    Module m;
    m.loc = peek().loc;
    expect_kw("module");
    m.name = expect_ident();
    expect_sym("(");
    if (!is_sym(")")) {
      PortDir dir = PortDir::Input;
      bool is_reg = false;
      unsigned width = 1;
      bool have_dir = false;
      do {
        Port p;
        p.loc = peek().loc;
        if (accept_kw("input")) {
          dir = PortDir::Input;
          is_reg = accept_kw("reg");
          width = parse_width();
          have_dir = true;
        } else if (accept_kw("output")) {
          dir = PortDir::Output;
          is_reg = accept_kw("reg");
          width = parse_width();
          have_dir = true;
        } else if (!have_dir) {
          fail("'input' or 'output'");
        }
        p.dir = dir;
        p.is_reg = is_reg;
        p.width = width;
        p.name = expect_ident();
        if (p.is_reg) p.init = parse_init();
        if (p.is_reg && p.dir == PortDir::Input) {
          throw NetlistError(Kind::Unsupported, p.loc, "input ports cannot be declared reg");
        }
        m.ports.push_back(std::move(p));
      } while (accept_sym(","));
    }
    expect_sym(")");
    expect_sym(";");
    while (!is_kw("endmodule")) {
      parse_item(m);
    }
    expect_kw("endmodule");
    return m;
  }

  void parse_item(Module& m) {
    const SourceLoc loc = peek().loc;
    if (accept_kw("wire")) {
      const unsigned width = parse_width();
      do {
        NetDecl d;
        d.loc = peek().loc;
        d.kind = NetDecl::Kind::Wire;
        d.width = width;
        d.name = expect_ident();
        m.nets.push_back(d);
        if (accept_sym("=")) {
          ContAssign a;
          a.loc = d.loc;
          a.target = d.name;
          a.rhs = parse_expr();
          m.assigns.push_back(std::move(a));
        }
      } while (accept_sym(","));
      expect_sym(";");
    } else if (accept_kw("reg")) {
      const unsigned width = parse_width();
      do {
        NetDecl d;
        d.loc = peek().loc;
        d.kind = NetDecl::Kind::Reg;
        d.width = width;
        d.name = expect_ident();
        if (is_sym("[")) {
          next();
          const unsigned first = expect_uint();
          expect_sym(":");
          const unsigned last = expect_uint();
          expect_sym("]");
          if (first != 0 || last == 0) {
            throw NetlistError(Kind::Unsupported, d.loc, "memories must be declared [0:depth-1]");
          }
          d.kind = NetDecl::Kind::Memory;
          d.depth = last + 1;
        }
        d.init = parse_init();
        m.nets.push_back(std::move(d));
      } while (accept_sym(","));
      expect_sym(";");
    } else if (accept_kw("assign")) {
      ContAssign a;
      a.loc = peek().loc;
      a.target = expect_ident();
      if (is_sym("[")) {
        throw NetlistError(Kind::Unsupported, peek().loc, "continuous assignment targets must be whole signals");
      }
      expect_sym("=");
      a.rhs = parse_expr();
      expect_sym(";");
      m.assigns.push_back(std::move(a));
    } else if (accept_kw("always")) {
      AlwaysBlock b;
      b.loc = loc;
      expect_sym("@");
      expect_sym("(");
      expect_kw("posedge");
      b.clock = expect_ident();
      expect_sym(")");
      Stmt body = parse_stmt();
      if (body.kind == Stmt::Kind::Block) {
        b.body = std::move(body.then_body);
      } else {
        b.body.push_back(std::move(body));
      }
      m.always_blocks.push_back(std::move(b));
    } else if (peek().type == Tok::Ident && !kKeywords.count(peek().text) && peek(1).type == Tok::Ident) {
      Instance inst;
      inst.loc = loc;
      inst.module_name = expect_ident();
      inst.instance_name = expect_ident();
      expect_sym("(");
      if (!is_sym(")")) {
        do {
          Binding bnd;
          bnd.loc = peek().loc;
          expect_sym(".");
          bnd.port = expect_ident();
          expect_sym("(");
          bnd.signal = expect_ident();
          expect_sym(")");
          inst.bindings.push_back(std::move(bnd));
        } while (accept_sym(","));
      }
      expect_sym(")");
      expect_sym(";");
      m.instances.push_back(std::move(inst));
    } else {
      fail("module item (wire, reg, assign, always, instance or endmodule)");
    }
  }

  Stmt parse_stmt() {
    Stmt s;
    s.loc = peek().loc;
    if (accept_kw("begin")) {
      s.kind = Stmt::Kind::Block;
      while (!is_kw("end")) {
        if (peek().type == Tok::End) fail("'end'");
        s.then_body.push_back(parse_stmt());
      }
      next();
      return s;
    }
    if (accept_kw("if")) {
      s.kind = Stmt::Kind::If;
      expect_sym("(");
      s.cond = parse_expr();
      expect_sym(")");
      s.then_body = flatten(parse_stmt());
      if (accept_kw("else")) {
        s.has_else = true;
        s.else_body = flatten(parse_stmt());
      }
      return s;
    }
    s.kind = Stmt::Kind::Assign;
    s.target = expect_ident();
    if (accept_sym("[")) {
      s.index = parse_expr();
      expect_sym("]");
    }
    expect_sym("<=");
    s.rhs = parse_expr();
    expect_sym(";");
    return s;
  }

  static std::vector<Stmt> flatten(Stmt s) {
    if (s.kind == Stmt::Kind::Block) return std::move(s.then_body);
    std::vector<Stmt> out;
    out.push_back(std::move(s));
    return out;
  }

  // Precedence climbing, loosest first.
  Expr parse_expr() { return parse_ternary(); }

  Expr parse_ternary() {
    Expr cond = parse_binary(0);
    if (is_sym("?")) {
      const SourceLoc loc = peek().loc;
      next();
      Expr a = parse_ternary();
      expect_sym(":");
      Expr b = parse_ternary();
      Expr e;
      e.kind = Expr::Kind::Ternary;
      e.loc = loc;
      e.args = {std::move(cond), std::move(a), std::move(b)};
      return e;
    }
    return cond;
  }

  struct Level {
    std::vector<std::pair<const char*, BinaryOp>> ops;
  };

  static const std::vector<Level>& levels() {
    static const std::vector<Level> kLevels = {
        {{{"|", BinaryOp::Or}}},
        {{{"^", BinaryOp::Xor}}},
        {{{"&", BinaryOp::And}}},
        {{{"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}}},
        {{{"<", BinaryOp::Lt}}},
        {{{"<<", BinaryOp::Shl}, {">>", BinaryOp::Shr}}},
        {{{"+", BinaryOp::Add}, {"-", BinaryOp::Sub}}},
    };
    return kLevels;
  }

  Expr parse_binary(std::size_t level) {
    if (level == levels().size()) return parse_unary();
    Expr lhs = parse_binary(level + 1);
    for (;;) {
      bool matched = false;
      for (const auto& [sym, op] : levels()[level].ops) {
        if (is_sym(sym)) {
          const SourceLoc loc = peek().loc;
          next();
          Expr rhs = parse_binary(level + 1);
          Expr e;
          e.kind = Expr::Kind::Binary;
          e.binary_op = op;
          e.loc = loc;
          e.args = {std::move(lhs), std::move(rhs)};
          lhs = std::move(e);
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
    }
  }

  Expr parse_unary() {
    if (is_sym("~")) {
      const SourceLoc loc = peek().loc;
      next();
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.unary_op = UnaryOp::Not;
      e.loc = loc;
      e.args.push_back(parse_unary());
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& t = peek();
    const SourceLoc loc = t.loc;
    if (t.type == Tok::Number) {
      next();
      Expr e = Expr::constant(t.value, t.width);
      e.loc = loc;
      return e;
    }
    if (accept_sym("(")) {
      Expr e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (accept_sym("{")) {
      // {count{...}} replication or {a, b, ...} concatenation
      if (peek().type == Tok::Number && is_sym("{", 1)) {
        Expr e;
        e.kind = Expr::Kind::Repeat;
        e.loc = loc;
        e.count = static_cast<unsigned>(next().value);
        if (e.count == 0) {
          throw NetlistError(Kind::Unsupported, loc, "replication count must be positive");
        }
        expect_sym("{");
        do {
          e.args.push_back(parse_expr());
        } while (accept_sym(","));
        expect_sym("}");
        expect_sym("}");
        return e;
      }
      Expr e;
      e.kind = Expr::Kind::Concat;
      e.loc = loc;
      do {
        e.args.push_back(parse_expr());
      } while (accept_sym(","));
      expect_sym("}");
      return e;
    }
    if (t.type == Tok::Ident && !kKeywords.count(t.text)) {
      Expr e = Expr::ref(next().text);
      e.loc = loc;
      if (accept_sym("[")) {
        if (peek().type == Tok::Number && is_sym(":", 1)) {
          e.kind = Expr::Kind::Slice;
          e.msb = expect_uint();
          expect_sym(":");
          e.lsb = expect_uint();
          if (e.msb < e.lsb) {
            throw NetlistError(Kind::Unsupported, loc, "part-select must be [msb:lsb] with msb >= lsb");
          }
        } else {
          e.kind = Expr::Kind::Index;
          e.args.push_back(parse_expr());
        }
        expect_sym("]");
      }
      return e;
    }
    fail("expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Validation

struct ModuleScope {
  std::map<std::string, unsigned> widths;
  std::set<std::string> memories;
};

void check_expr(const Expr& e, const ModuleScope& scope) {
  if (e.kind == Expr::Kind::Ref || e.kind == Expr::Kind::Index || e.kind == Expr::Kind::Slice) {
    if (!scope.widths.count(e.name)) {
      throw NetlistError(Kind::UndeclaredSignal, e.loc, "'" + e.name + "' is not declared");
    }
  }
  for (const auto& a : e.args) check_expr(a, scope);
}

void check_stmts(const std::vector<Stmt>& body, const ModuleScope& scope) {
  for (const auto& s : body) {
    switch (s.kind) {
    case Stmt::Kind::Assign:
      if (!scope.widths.count(s.target)) {
        throw NetlistError(Kind::UndeclaredSignal, s.loc, "'" + s.target + "' is not declared");
      }
      if (s.index) check_expr(*s.index, scope);
      check_expr(s.rhs, scope);
      break;
    case Stmt::Kind::If:
      check_expr(s.cond, scope);
      check_stmts(s.then_body, scope);
      check_stmts(s.else_body, scope);
      break;
    case Stmt::Kind::Block:
      check_stmts(s.then_body, scope);
      break;
    }
  }
}

// Merges body-level `reg x;` declarations of output ports into the port (Verilog-1995 style).
void merge_port_regs(Module& m) {
  std::vector<NetDecl> kept;
  for (auto& d : m.nets) {
    auto it = std::find_if(m.ports.begin(), m.ports.end(), [&](const Port& p) { return p.name == d.name; });
    if (it == m.ports.end()) {
      kept.push_back(std::move(d));
      continue;
    }
    if (d.kind != NetDecl::Kind::Reg || it->dir != PortDir::Output || it->is_reg) {
      throw NetlistError(Kind::DuplicateDeclaration, d.loc, "'" + d.name + "' already declared as a port");
    }
    if (d.width != it->width) {
      throw NetlistError(Kind::WidthMismatch, d.loc,
                         "reg declaration of port '" + d.name + "' has width " + std::to_string(d.width) +
                             ", port has " + std::to_string(it->width));
    }
    it->is_reg = true;
    it->init = d.init;
  }
  m.nets = std::move(kept);
}

void validate(SourceDesign& d) {
  std::map<std::string, const Module*> by_name;
  for (auto& m : d.modules) {
    merge_port_regs(m);
  }
  for (const auto& m : d.modules) {
    if (!by_name.emplace(m.name, &m).second) {
      throw NetlistError(Kind::DuplicateDeclaration, m.loc, "module '" + m.name + "' defined twice");
    }
  }
  for (const auto& m : d.modules) {
    ModuleScope scope;
    auto declare = [&](const std::string& name, unsigned width, SourceLoc loc) {
      if (!scope.widths.emplace(name, width).second) {
        throw NetlistError(Kind::DuplicateDeclaration, loc, "'" + name + "' declared twice in module '" + m.name + "'");
      }
    };
    for (const auto& p : m.ports) declare(p.name, p.width, p.loc);
    for (const auto& n : m.nets) {
      declare(n.name, n.width, n.loc);
      if (n.kind == NetDecl::Kind::Memory) scope.memories.insert(n.name);
    }
    std::set<std::string> inst_names;
    for (const auto& inst : m.instances) {
      if (scope.widths.count(inst.instance_name) || !inst_names.insert(inst.instance_name).second) {
        throw NetlistError(Kind::DuplicateDeclaration, inst.loc, "instance name '" + inst.instance_name + "' already used");
      }
    }
    for (const auto& a : m.assigns) {
      if (!scope.widths.count(a.target)) {
        throw NetlistError(Kind::UndeclaredSignal, a.loc, "'" + a.target + "' is not declared");
      }
      check_expr(a.rhs, scope);
    }
    for (const auto& b : m.always_blocks) {
      if (!scope.widths.count(b.clock)) {
        throw NetlistError(Kind::UndeclaredSignal, b.loc, "clock '" + b.clock + "' is not declared");
      }
      check_stmts(b.body, scope);
    }
    for (const auto& inst : m.instances) {
      auto child_it = by_name.find(inst.module_name);
      if (child_it == by_name.end()) {
        throw NetlistError(Kind::UnknownModule, inst.loc, "module '" + inst.module_name + "' is not defined");
      }
      const Module& child = *child_it->second;
      std::set<std::string> bound;
      for (const auto& bnd : inst.bindings) {
        const Port* port = child.find_port(bnd.port);
        if (port == nullptr) {
          throw NetlistError(Kind::UndeclaredSignal, bnd.loc,
                             "module '" + child.name + "' has no port '" + bnd.port + "'");
        }
        if (!bound.insert(bnd.port).second) {
          throw NetlistError(Kind::DuplicateDeclaration, bnd.loc, "port '" + bnd.port + "' bound twice");
        }
        auto w = scope.widths.find(bnd.signal);
        if (w == scope.widths.end()) {
          throw NetlistError(Kind::UndeclaredSignal, bnd.loc, "'" + bnd.signal + "' is not declared");
        }
        if (scope.memories.count(bnd.signal)) {
          throw NetlistError(Kind::Unsupported, bnd.loc, "memories cannot be bound to ports");
        }
        if (w->second != port->width) {
          throw NetlistError(Kind::WidthMismatch, bnd.loc,
                             "binding ." + bnd.port + "(" + bnd.signal + "): port width " +
                                 std::to_string(port->width) + ", signal width " + std::to_string(w->second));
        }
      }
      for (const auto& p : child.ports) {
        if (!bound.count(p.name)) {
          throw NetlistError(Kind::Undriven, inst.loc,
                             "port '" + p.name + "' of instance '" + inst.instance_name + "' is not bound");
        }
      }
    }
  }
  (void)d.top();
  // Reject recursive instantiation.
  std::map<std::string, int> state;
  std::function<void(const Module&)> visit = [&](const Module& m) {
    state[m.name] = 1;
    for (const auto& inst : m.instances) {
      const int s = state[inst.module_name];
      if (s == 1) {
        throw NetlistError(Kind::TopModule, inst.loc, "recursive instantiation of '" + inst.module_name + "'");
      }
      if (s == 0) visit(*by_name.at(inst.module_name));
    }
    state[m.name] = 2;
  };
  visit(d.top());
}

// ---------------------------------------------------------------------------
// Printing

std::string print_const(const Expr& e) {
  if (e.width == 0) return std::to_string(e.value);
  std::ostringstream ss;
  ss << e.width << "'h" << std::hex << e.value;
  return ss.str();
}

void print_stmts(std::ostringstream& out, const std::vector<Stmt>& body, int indent);

void print_stmt(std::ostringstream& out, const Stmt& s, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (s.kind) {
  case Stmt::Kind::Assign:
    out << pad << s.target;
    if (s.index) out << "[" << print_expr(*s.index) << "]";
    out << " <= " << print_expr(s.rhs) << ";\n";
    break;
  case Stmt::Kind::If:
    out << pad << "if (" << print_expr(s.cond) << ") begin\n";
    print_stmts(out, s.then_body, indent + 1);
    out << pad << "end";
    if (s.has_else) {
      out << " else begin\n";
      print_stmts(out, s.else_body, indent + 1);
      out << pad << "end";
    }
    out << "\n";
    break;
  case Stmt::Kind::Block:
    out << pad << "begin\n";
    print_stmts(out, s.then_body, indent + 1);
    out << pad << "end\n";
    break;
  }
}

void print_stmts(std::ostringstream& out, const std::vector<Stmt>& body, int indent) {
  for (const auto& s : body) print_stmt(out, s, indent);
}

std::string width_prefix(unsigned width) {
  return width == 1 ? "" : "[" + std::to_string(width - 1) + ":0] ";
}

} // namespace

SourceDesign parse_design(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  SourceDesign d = parser.run();
  if (d.modules.empty()) {
    throw NetlistError(Kind::TopModule, {}, "design contains no modules");
  }
  validate(d);
  return d;
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
  case Expr::Kind::Const:
    return print_const(e);
  case Expr::Kind::Ref:
    return e.name;
  case Expr::Kind::Index:
    return e.name + "[" + print_expr(e.args[0]) + "]";
  case Expr::Kind::Slice:
    return e.name + "[" + std::to_string(e.msb) + ":" + std::to_string(e.lsb) + "]";
  case Expr::Kind::Unary:
    return "~" + print_expr(e.args[0]);
  case Expr::Kind::Binary:
    return "(" + print_expr(e.args[0]) + " " + to_string(e.binary_op) + " " + print_expr(e.args[1]) + ")";
  case Expr::Kind::Ternary:
    return "(" + print_expr(e.args[0]) + " ? " + print_expr(e.args[1]) + " : " + print_expr(e.args[2]) + ")";
  case Expr::Kind::Concat:
  case Expr::Kind::Repeat: {
    std::string inner;
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      if (i) inner += ", ";
      inner += print_expr(e.args[i]);
    }
    if (e.kind == Expr::Kind::Repeat) return "{" + std::to_string(e.count) + "{" + inner + "}}";
    return "{" + inner + "}";
  }
  }
  return {};
}

std::string print_design(const SourceDesign& design) {
  std::ostringstream out;
  for (const auto& m : design.modules) {
    out << "module " << m.name << "(";
    for (std::size_t i = 0; i < m.ports.size(); ++i) {
      const Port& p = m.ports[i];
      if (i) out << ", ";
      out << (p.dir == PortDir::Input ? "input " : "output ") << (p.is_reg ? "reg " : "")
          << width_prefix(p.width) << p.name;
      if (p.is_reg && p.init != 0) out << " = " << print_const(Expr::constant(p.init, p.width));
    }
    out << ");\n";
    for (const auto& n : m.nets) {
      out << "  " << (n.kind == NetDecl::Kind::Wire ? "wire " : "reg ") << width_prefix(n.width) << n.name;
      if (n.kind == NetDecl::Kind::Memory) out << " [0:" << n.depth - 1 << "]";
      if (n.kind != NetDecl::Kind::Wire && n.init != 0) {
        out << " = " << print_const(Expr::constant(n.init, n.width));
      }
      out << ";\n";
    }
    for (const auto& a : m.assigns) {
      out << "  assign " << a.target << " = " << print_expr(a.rhs) << ";\n";
    }
    for (const auto& b : m.always_blocks) {
      out << "  always @(posedge " << b.clock << ") begin\n";
      print_stmts(out, b.body, 2);
      out << "  end\n";
    }
    for (const auto& inst : m.instances) {
      out << "  " << inst.module_name << " " << inst.instance_name << "(";
      for (std::size_t i = 0; i < inst.bindings.size(); ++i) {
        if (i) out << ", ";
        out << "." << inst.bindings[i].port << "(" << inst.bindings[i].signal << ")";
      }
      out << ");\n";
    }
    out << "endmodule\n";
  }
  return out.str();
}

} // namespace specleak::netlist
