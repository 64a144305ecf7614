#pragma once

// Encoders and a disassembler for the toy CPU's 16-bit instruction set.
//
//   [15:12] opcode
//   0  NOP
//   1  ADDI  rd[11:9] rs1[8:6] imm6[5:0]      rd = rs1 + sext(imm6)
//   2  ADD   rd rs1 rs2[5:3]                   (3 SUB, 4 AND, 5 OR, 6 XOR)
//   7  LW    rd rs1 imm6                       rd = dmem[(rs1 + sext(imm6)) & 63]
//   8  SW    rs2[11:9] rs1 imm6                dmem[(rs1 + sext(imm6)) & 63] = rs2
//   9  BEQ   rs1[11:9] rs2[8:6] imm6           pc += sext(imm6) if rs1 == rs2
//   10 BLT   rs1 rs2 imm6                      signed compare
//   11 JAL   rd imm9[8:0]                      rd = pc + 1; pc += sext(imm9); imm9 == 0 halts
//   12 CSRRW rd rs1 csr[1:0]                   rd = csr; csr = rs1
//   13-15 decode as NOP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace specleak::isa {

enum Opcode : unsigned {
  kNop = 0, kAddi = 1, kAdd = 2, kSub = 3, kAnd = 4, kOr = 5, kXor = 6,
  kLw = 7, kSw = 8, kBeq = 9, kBlt = 10, kJal = 11, kCsrrw = 12,
};

enum Csr : unsigned { kZenEn = 0, kMwaitEn = 1, kMonitorAddr = 2, kMwaitTimer = 3 };

inline constexpr std::size_t kImemWords = 64;

std::uint16_t nop();
std::uint16_t addi(unsigned rd, unsigned rs1, int imm6);
std::uint16_t alu(Opcode op, unsigned rd, unsigned rs1, unsigned rs2);
std::uint16_t lw(unsigned rd, unsigned rs1, int imm6);
std::uint16_t sw(unsigned rs2, unsigned rs1, int imm6);
std::uint16_t beq(unsigned rs1, unsigned rs2, int imm6);
std::uint16_t blt(unsigned rs1, unsigned rs2, int imm6);
std::uint16_t jal(unsigned rd, int imm9);
std::uint16_t halt(); // jal r0, 0
std::uint16_t csrrw(unsigned rd, unsigned rs1, Csr csr);

std::string disassemble(std::uint16_t word);

std::vector<std::uint8_t> to_bytes(const std::vector<std::uint16_t>& words);
std::vector<std::uint16_t> to_words(const std::vector<std::uint8_t>& bytes);

/// `.hex` files hold one 16-bit hex word per line ('#' comments allowed);
/// anything else is read as a raw little-endian image.
std::vector<std::uint8_t> load_program(const std::filesystem::path& path);
std::string program_to_hex(const std::vector<std::uint8_t>& bytes);

} // namespace specleak::isa
