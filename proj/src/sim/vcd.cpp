#include "specleak/sim/vcd.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>

#include "specleak/util.hpp"

namespace specleak::vcd {

namespace {

const char* kind_text(VcdError::Kind k) {
  switch (k) {
  case VcdError::Kind::MalformedHeader: return "malformed header";
  case VcdError::Kind::UnknownIdentifier: return "unknown identifier";
  case VcdError::Kind::NonMonotonicTime: return "non-monotonic time";
  case VcdError::Kind::ChangeBeforeDumpvars: return "value change before $dumpvars";
  case VcdError::Kind::BadValue: return "bad value";
  }
  return "vcd error";
}

std::string id_code(std::size_t n) {
  std::string s;
  do {
    s += static_cast<char>('!' + n % 94);
    n /= 94;
  } while (n > 0);
  return s;
}

std::string binary(std::uint64_t v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s += static_cast<char>('0' + (v & 1));
    v >>= 1;
  }
  return {s.rbegin(), s.rend()};
}

void emit_value(std::ostringstream& out, const sim::WaveSignal& s, std::uint64_t v, const std::string& code) {
  if (s.width == 1) {
    out << (v & 1) << code << '\n';
  } else {
    out << 'b' << binary(v) << ' ' << code << '\n';
  }
}

// Splits "cpu.alu.y" into scopes {"cpu","alu"} and leaf "y". Dots inside an
// element suffix ("[3]") never occur, so a plain split is enough.
std::pair<std::vector<std::string>, std::string> split_name(const std::string& name) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto dot = name.find('.', start);
    if (dot == std::string::npos) break;
    parts.push_back(name.substr(start, dot - start));
    start = dot + 1;
  }
  return {parts, name.substr(start)};
}

} // namespace

VcdError::VcdError(Kind kind, std::size_t line, const std::string& message)
    : Error(std::string(kind_text(kind)) + " at line " + std::to_string(line) + ": " + message), kind_(kind),
      line_(line) {}

std::string write_vcd(const sim::Waveform& w) {
  std::ostringstream out;
  out << "$comment format_version " << kFormatVersion << " $end\n";
  out << "$version specleak $end\n";
  out << "$timescale 1ns $end\n";
  const auto& sigs = w.signals();
  std::vector<std::string> codes(sigs.size());
  std::vector<std::string> open;
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    codes[i] = id_code(i);
    auto [scopes, leaf] = split_name(sigs[i].name);
    std::size_t common = 0;
    while (common < open.size() && common < scopes.size() && open[common] == scopes[common]) ++common;
    while (open.size() > common) {
      out << "$upscope $end\n";
      open.pop_back();
    }
    while (open.size() < scopes.size()) {
      out << "$scope module " << scopes[open.size()] << " $end\n";
      open.push_back(scopes[open.size()]);
    }
    out << "$var " << (sigs[i].is_reg ? "reg" : "wire") << ' ' << sigs[i].width << ' ' << codes[i] << ' ' << leaf
        << " $end\n";
  }
  while (!open.empty()) {
    out << "$upscope $end\n";
    open.pop_back();
  }
  out << "$enddefinitions $end\n";

  // Merge per-signal change lists into per-cycle order.
  std::map<std::uint64_t, std::vector<std::pair<std::size_t, std::uint64_t>>> by_cycle;
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    for (const auto& c : w.changes(i)) {
      if (c.cycle > 0) by_cycle[c.cycle].emplace_back(i, c.value);
    }
  }
  if (w.cycles() > 0) {
    out << "#0\n$dumpvars\n";
    for (std::size_t i = 0; i < sigs.size(); ++i) emit_value(out, sigs[i], w.value(i, 0), codes[i]);
    out << "$end\n";
  }
  auto it = by_cycle.begin();
  for (std::uint64_t t = 1; t < w.cycles(); ++t) {
    out << '#' << t << '\n';
    if (it != by_cycle.end() && it->first == t) {
      for (const auto& [sig, value] : it->second) emit_value(out, sigs[sig], value, codes[sig]);
      ++it;
    }
  }
  return out.str();
}

void save_vcd(const sim::Waveform& w, const std::filesystem::path& path) { write_text_file(path, write_vcd(w)); }

namespace {

class Reader {
public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool next(std::string& tok) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    tok.assign(text_.substr(start, pos_ - start));
    return true;
  }

  std::string expect(VcdError::Kind kind, const char* what) {
    std::string tok;
    if (!next(tok)) throw VcdError(kind, line_, std::string("unexpected end of file, expected ") + what);
    return tok;
  }

  // Skips to the matching $end of a section.
  std::vector<std::string> section() {
    std::vector<std::string> body;
    std::string tok;
    while (next(tok)) {
      if (tok == "$end") return body;
      body.push_back(tok);
    }
    throw VcdError(VcdError::Kind::MalformedHeader, line_, "section is missing $end");
  }

  std::size_t line() const { return line_; }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::uint64_t parse_bits(const std::string& bits, std::size_t line) {
  std::uint64_t v = 0;
  if (bits.empty() || bits.size() > 64) throw VcdError(VcdError::Kind::BadValue, line, "bad vector '" + bits + "'");
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw VcdError(VcdError::Kind::BadValue, line, "only two-valued binary values are supported, got '" + bits + "'");
    }
    v = (v << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

} // namespace

sim::Waveform parse_vcd(std::string_view text) {
  Reader r(text);
  std::vector<sim::WaveSignal> signals;
  std::unordered_map<std::string, std::vector<std::size_t>> by_code;
  std::vector<std::string> scopes;
  std::string tok;
  bool definitions_done = false;
  while (!definitions_done) {
    if (!r.next(tok)) throw VcdError(VcdError::Kind::MalformedHeader, r.line(), "missing $enddefinitions");
    if (tok == "$scope") {
      auto body = r.section();
      if (body.size() != 2) throw VcdError(VcdError::Kind::MalformedHeader, r.line(), "bad $scope");
      scopes.push_back(body[1]);
    } else if (tok == "$upscope") {
      r.section();
      if (scopes.empty()) throw VcdError(VcdError::Kind::MalformedHeader, r.line(), "unbalanced $upscope");
      scopes.pop_back();
    } else if (tok == "$var") {
      auto body = r.section();
      if (body.size() < 4 || body.size() > 5) throw VcdError(VcdError::Kind::MalformedHeader, r.line(), "bad $var");
      sim::WaveSignal s;
      s.is_reg = body[0] == "reg";
      try {
        s.width = static_cast<unsigned>(std::stoul(body[1]));
      } catch (const std::exception&) {
        throw VcdError(VcdError::Kind::MalformedHeader, r.line(), "bad $var width '" + body[1] + "'");
      }
      if (s.width == 0 || s.width > 64) throw VcdError(VcdError::Kind::MalformedHeader, r.line(), "unsupported width");
      for (const auto& sc : scopes) s.name += sc + ".";
      s.name += body[3];
      if (body.size() == 5) s.name += body[4];
      by_code[body[2]].push_back(signals.size());
      signals.push_back(std::move(s));
    } else if (tok == "$enddefinitions") {
      r.section();
      definitions_done = true;
    } else if (tok.size() > 1 && tok[0] == '$') {
      r.section(); // $date, $version, $timescale, $comment
    } else {
      throw VcdError(VcdError::Kind::MalformedHeader, r.line(), "unexpected '" + tok + "' in header");
    }
  }
  if (!scopes.empty()) throw VcdError(VcdError::Kind::MalformedHeader, r.line(), "unclosed $scope");

  sim::Waveform w(signals);
  bool have_time = false;
  bool dumped = false;
  std::uint64_t now = 0;
  auto apply = [&](const std::string& code, std::uint64_t value) {
    if (!dumped) throw VcdError(VcdError::Kind::ChangeBeforeDumpvars, r.line(), "change to '" + code + "'");
    auto it = by_code.find(code);
    if (it == by_code.end()) throw VcdError(VcdError::Kind::UnknownIdentifier, r.line(), "'" + code + "'");
    for (std::size_t s : it->second) w.add_change(s, now, value & width_mask(signals[s].width));
  };
  while (r.next(tok)) {
    if (tok[0] == '#') {
      std::uint64_t t = 0;
      try {
        t = std::stoull(tok.substr(1));
      } catch (const std::exception&) {
        throw VcdError(VcdError::Kind::BadValue, r.line(), "bad timestamp '" + tok + "'");
      }
      if (have_time && t < now) {
        throw VcdError(VcdError::Kind::NonMonotonicTime, r.line(),
                       "#" + std::to_string(t) + " after #" + std::to_string(now));
      }
      now = t;
      have_time = true;
    } else if (tok == "$dumpvars" || tok == "$dumpall" || tok == "$dumpon" || tok == "$dumpoff") {
      if (tok == "$dumpvars") dumped = true;
    } else if (tok == "$end") {
      continue;
    } else if (tok == "$comment") {
      r.section();
    } else if (tok[0] == 'b' || tok[0] == 'B') {
      const std::string code = r.expect(VcdError::Kind::BadValue, "identifier after vector value");
      apply(code, parse_bits(tok.substr(1), r.line()));
    } else if (tok[0] == '0' || tok[0] == '1') {
      apply(tok.substr(1), static_cast<std::uint64_t>(tok[0] - '0'));
    } else {
      throw VcdError(VcdError::Kind::BadValue, r.line(), "unsupported value change '" + tok + "'");
    }
  }
  w.set_cycles(have_time ? now + 1 : 0);
  if (have_time) w.fill_initial();
  return w;
}

sim::Waveform load_vcd(const std::filesystem::path& path) { return parse_vcd(read_text_file(path)); }

} // namespace specleak::vcd
