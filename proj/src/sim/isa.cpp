#include "specleak/sim/isa.hpp"

#include <sstream>

#include "specleak/error.hpp"
#include "specleak/util.hpp"

namespace specleak::isa {

namespace {

std::uint16_t enc(unsigned op, unsigned a, unsigned b, unsigned low6) {
  return static_cast<std::uint16_t>((op & 15) << 12 | (a & 7) << 9 | (b & 7) << 6 | (low6 & 63));
}

int sext(unsigned v, unsigned bits) {
  const unsigned sign = 1u << (bits - 1);
  return static_cast<int>((v ^ sign)) - static_cast<int>(sign);
}

} // namespace

std::uint16_t nop() { return 0; }
std::uint16_t addi(unsigned rd, unsigned rs1, int imm6) { return enc(kAddi, rd, rs1, static_cast<unsigned>(imm6)); }
std::uint16_t alu(Opcode op, unsigned rd, unsigned rs1, unsigned rs2) { return enc(op, rd, rs1, (rs2 & 7) << 3); }
std::uint16_t lw(unsigned rd, unsigned rs1, int imm6) { return enc(kLw, rd, rs1, static_cast<unsigned>(imm6)); }
std::uint16_t sw(unsigned rs2, unsigned rs1, int imm6) { return enc(kSw, rs2, rs1, static_cast<unsigned>(imm6)); }
std::uint16_t beq(unsigned rs1, unsigned rs2, int imm6) { return enc(kBeq, rs1, rs2, static_cast<unsigned>(imm6)); }
std::uint16_t blt(unsigned rs1, unsigned rs2, int imm6) { return enc(kBlt, rs1, rs2, static_cast<unsigned>(imm6)); }
std::uint16_t jal(unsigned rd, int imm9) {
  return static_cast<std::uint16_t>(kJal << 12 | (rd & 7) << 9 | (static_cast<unsigned>(imm9) & 0x1ff));
}
std::uint16_t halt() { return jal(0, 0); }
std::uint16_t csrrw(unsigned rd, unsigned rs1, Csr csr) { return enc(kCsrrw, rd, rs1, csr & 3); }

std::string disassemble(std::uint16_t w) {
  const unsigned op = w >> 12;
  const unsigned a = (w >> 9) & 7;
  const unsigned b = (w >> 6) & 7;
  const unsigned c = (w >> 3) & 7;
  const int imm6 = sext(w & 63, 6);
  auto r = [](unsigned n) { return "r" + std::to_string(n); };
  static const char* kAlu[] = {"", "", "add", "sub", "and", "or", "xor"};
  static const char* kCsr[] = {"zen_en", "mwait_en", "monitor_addr", "mwait_timer"};
  switch (op) {
  case kAddi: return "addi " + r(a) + ", " + r(b) + ", " + std::to_string(imm6);
  case kAdd:
  case kSub:
  case kAnd:
  case kOr:
  case kXor: return std::string(kAlu[op]) + " " + r(a) + ", " + r(b) + ", " + r(c);
  case kLw: return "lw " + r(a) + ", " + std::to_string(imm6) + "(" + r(b) + ")";
  case kSw: return "sw " + r(a) + ", " + std::to_string(imm6) + "(" + r(b) + ")";
  case kBeq: return "beq " + r(a) + ", " + r(b) + ", " + std::to_string(imm6);
  case kBlt: return "blt " + r(a) + ", " + r(b) + ", " + std::to_string(imm6);
  case kJal: {
    const int imm9 = sext(w & 0x1ff, 9);
    if (imm9 == 0) return "halt";
    return "jal " + r(a) + ", " + std::to_string(imm9);
  }
  case kCsrrw: return "csrrw " + r(a) + ", " + kCsr[w & 3] + ", " + r(b);
  default: return "nop";
  }
}

std::vector<std::uint8_t> to_bytes(const std::vector<std::uint16_t>& words) {
  std::vector<std::uint8_t> out;
  out.reserve(words.size() * 2);
  for (auto w : words) {
    out.push_back(static_cast<std::uint8_t>(w & 0xff));
    out.push_back(static_cast<std::uint8_t>(w >> 8));
  }
  return out;
}

std::vector<std::uint16_t> to_words(const std::vector<std::uint8_t>& bytes) {
  std::vector<std::uint16_t> out;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
    out.push_back(static_cast<std::uint16_t>(bytes[i] | bytes[i + 1] << 8));
  }
  return out;
}

std::vector<std::uint8_t> load_program(const std::filesystem::path& path) {
  if (path.extension() != ".hex") return read_binary_file(path);
  std::istringstream in(read_text_file(path));
  std::vector<std::uint16_t> words;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(tok, &used, 16);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || v > 0xffff) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": '" + tok + "' is not a 16-bit hex word");
      }
      words.push_back(static_cast<std::uint16_t>(v));
    }
  }
  return to_bytes(words);
}

std::string program_to_hex(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  for (auto w : to_words(bytes)) out += to_hex(w, 4) + "  # " + disassemble(w) + "\n";
  return out;
}

} // namespace specleak::isa
