#include "specleak/fuzz/fuzz.hpp"

#include "specleak/sim/isa.hpp"
#include "specleak/util.hpp"

namespace specleak::fuzz {

namespace {

using namespace isa;

// Registers 4, 6 and 7 steer the templates; data registers stay clear of them.
// r0 is an ordinary register here, so jumps link into r6 to keep it zero.
const unsigned kDataRegs[] = {1, 2, 3, 5};
const int kValues[] = {0, 1, 2, 3, 4, 5, 8, 12, 16, 17, 20, -1};

unsigned data_reg(Rng& rng) { return kDataRegs[rng() % 4]; }
unsigned any_reg(Rng& rng) { return static_cast<unsigned>(rng() % 8); }
int pool_value(Rng& rng) { return kValues[rng() % std::size(kValues)]; }

void prologue(Rng& rng, std::vector<std::uint16_t>& p) {
  for (unsigned r : kDataRegs) p.push_back(addi(r, 0, pool_value(rng)));
  const int csr_writes = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < csr_writes; ++i) p.push_back(csrrw(data_reg(rng), data_reg(rng), static_cast<Csr>(rng() % 4)));
}

void filler(Rng& rng, std::vector<std::uint16_t>& p, unsigned lo, unsigned hi) {
  const unsigned n = lo + static_cast<unsigned>(rng() % (hi - lo + 1));
  for (unsigned i = 0; i < n; ++i) {
    switch (rng() % 6) {
    case 0: p.push_back(addi(data_reg(rng), any_reg(rng), static_cast<int>(rng() % 12) - 4)); break;
    case 1: p.push_back(alu(static_cast<Opcode>(kAdd + rng() % 5), data_reg(rng), any_reg(rng), any_reg(rng))); break;
    case 2:
    case 3: p.push_back(lw(data_reg(rng), data_reg(rng), static_cast<int>(rng() % 8) - 2)); break;
    case 4: p.push_back(sw(data_reg(rng), data_reg(rng), static_cast<int>(rng() % 8) - 2)); break;
    default: p.push_back(addi(data_reg(rng), data_reg(rng), pool_value(rng))); break;
    }
  }
}

int rel(std::size_t target, std::size_t from) { return static_cast<int>(target) - static_cast<int>(from); }

std::vector<std::uint16_t> trained_loop(Rng& rng) {
  std::vector<std::uint16_t> p;
  prologue(rng, p);
  p.push_back(addi(7, 0, 2 + static_cast<int>(rng() % 4)));
  const auto top = p.size();
  filler(rng, p, 0, 3);
  p.push_back(addi(7, 7, -1));
  p.push_back(blt(0, 7, rel(top, p.size())));
  filler(rng, p, 2, 5);
  p.push_back(halt());
  return p;
}

std::vector<std::uint16_t> target_flip(Rng& rng) {
  std::vector<std::uint16_t> p;
  prologue(rng, p);
  p.push_back(addi(7, 0, 2 + static_cast<int>(rng() % 4)));
  const auto top = p.size();
  p.push_back(addi(7, 7, -1));
  const auto branch = p.size();
  p.push_back(0); // patched below
  filler(rng, p, 1, 3);
  p.push_back(jal(6, rel(top, p.size())));
  p[branch] = beq(7, 0, rel(p.size(), branch));
  filler(rng, p, 1, 3);
  p.push_back(halt());
  return p;
}

std::vector<std::uint16_t> call_depth(Rng& rng) {
  std::vector<std::uint16_t> p;
  prologue(rng, p);
  p.push_back(addi(4, 0, static_cast<int>(rng() % 2)));
  p.push_back(addi(7, 0, 2 + static_cast<int>(rng() % 3)));
  const auto call = p.size();
  p.push_back(0); // jal r6, sub
  const auto ret = p.size();
  p.push_back(addi(7, 7, -1));
  p.push_back(blt(0, 7, rel(call, p.size())));
  filler(rng, p, 1, 3);
  p.push_back(halt());
  const auto sub = p.size();
  p[call] = jal(6, rel(sub, call));
  filler(rng, p, 0, 2);
  p.push_back(blt(4, 7, rel(ret, p.size())));
  filler(rng, p, 1, 3);
  p.push_back(jal(6, rel(ret, p.size())));
  return p;
}

} // namespace

std::string input_id(const std::vector<std::uint8_t>& bytes) {
  return to_hex(fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size())), 16);
}

TestInput make_input(std::vector<std::uint8_t> bytes, std::string parent, std::string origin) {
  TestInput t;
  t.id = input_id(bytes);
  t.bytes = std::move(bytes);
  t.parent = std::move(parent);
  t.origin = std::move(origin);
  return t;
}

std::vector<TestInput> make_seeds(SeedKind kind, std::size_t n, Rng& rng, const InputLimits& limits,
                                  std::size_t random_len) {
  std::vector<TestInput> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (kind == SeedKind::Random) {
      const std::size_t len = std::clamp(random_len, limits.min_len, limits.max_len) & ~std::size_t{1};
      std::vector<std::uint8_t> bytes(len);
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng() & 0xff);
      out.push_back(make_input(std::move(bytes), "", "seed-random"));
      continue;
    }
    std::vector<std::uint16_t> words;
    const char* name = "";
    switch (i % 3) {
    case 0: words = trained_loop(rng), name = "seed-special-a"; break;
    case 1: words = target_flip(rng), name = "seed-special-b"; break;
    default: words = call_depth(rng), name = "seed-special-c"; break;
    }
    auto bytes = to_bytes(words);
    if (bytes.size() > limits.max_len) bytes.resize(limits.max_len & ~std::size_t{1});
    out.push_back(make_input(std::move(bytes), "", name));
  }
  return out;
}

} // namespace specleak::fuzz
