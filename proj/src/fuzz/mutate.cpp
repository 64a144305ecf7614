#include "specleak/fuzz/fuzz.hpp"

#include <algorithm>

namespace specleak::fuzz {

const char* to_string(MutationOp op) {
  switch (op) {
  case MutationOp::BitFlip: return "bit-flip";
  case MutationOp::ByteFlip: return "byte-flip";
  case MutationOp::WordSwap: return "word-swap";
  case MutationOp::WordDelete: return "word-delete";
  case MutationOp::WordClone: return "word-clone";
  }
  return "?";
}

TestInput mutate(const TestInput& input, Rng& rng, const InputLimits& limits, const MutationWeights& weights,
                 MutationOp* applied) {
  std::vector<std::uint8_t> b = input.bytes;
  const std::size_t words = b.size() / 2;
  std::discrete_distribution<unsigned> pick(std::begin(weights.w), std::end(weights.w));
  auto index = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  MutationOp op;
  for (;;) {
    op = static_cast<MutationOp>(pick(rng));
    if (op == MutationOp::WordSwap && words < 2) continue;
    if (op == MutationOp::WordDelete && b.size() <= limits.min_len) continue;
    if (op == MutationOp::WordClone && b.size() + 2 > limits.max_len) continue;
    break;
  }
  switch (op) {
  case MutationOp::BitFlip: b[index(b.size())] ^= static_cast<std::uint8_t>(1u << index(8)); break;
  case MutationOp::ByteFlip: b[index(b.size())] ^= 0xff; break;
  case MutationOp::WordSwap: {
    const auto i = index(words);
    auto j = index(words - 1);
    if (j >= i) ++j;
    std::swap(b[2 * i], b[2 * j]);
    std::swap(b[2 * i + 1], b[2 * j + 1]);
    break;
  }
  case MutationOp::WordDelete: {
    const auto i = index(words);
    b.erase(b.begin() + 2 * i, b.begin() + 2 * i + 2);
    break;
  }
  case MutationOp::WordClone: {
    const auto i = index(words);
    const std::uint8_t lo = b[2 * i], hi = b[2 * i + 1];
    b.insert(b.begin() + 2 * i + 2, {lo, hi});
    break;
  }
  }
  if (applied) *applied = op;
  return make_input(std::move(b), input.id, to_string(op));
}

} // namespace specleak::fuzz
