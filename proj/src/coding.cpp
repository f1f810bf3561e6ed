#include "infinitype/coding.hpp"

#include <vector>

namespace infinitype {

namespace {

// Total bit count of the code of `a`: a leading 1, then for each letter
// the Elias-gamma code of letter+1 (2*bitlen - 1 bits).
std::uint64_t code_bits(const Word& a) {
  std::uint64_t bits = 1;
  for (const auto& l : a.letters) {
    std::uint64_t bl = l.bit_width();
    if (bl > 1u << 20) return ~std::uint64_t{0};
    bits += 2 * bl - 1;
  }
  return bits;
}

}  // namespace

Track DefaultCoding::code(const Word& a) const {
  std::uint64_t bits = code_bits(a);
  if (bits <= 63) {
    std::uint64_t v = 1;
    for (const auto& l : a.letters) {
      std::uint64_t x = l.small_value() + 1;  // letters here are all small
      std::uint64_t bl = l.bit_width();
      v <<= (bl - 1);          // gamma's zero run
      v = (v << bl) | x;       // then x in binary
    }
    // Code value v-1, shifted into the tracks >= 2.
    return Track(v + 1);
  }
  auto big = std::make_shared<BigCode>();
  big->word = a;
  big->bits = bits;
  big->hash = hash_word(a);
  return Track(std::move(big));
}

std::optional<Word> DefaultCoding::pos(const Track& k) const {
  if (k.is_big()) return k.code_word();
  if (k.small_value() < 2) return std::nullopt;
  std::uint64_t v = k.small_value() - 1;  // the encoded bit string
  // Collect bits MSB-first, dropping the leading 1.
  std::vector<bool> bits;
  while (v) {
    bits.push_back(v & 1);
    v >>= 1;
  }
  std::reverse(bits.begin(), bits.end());
  std::size_t i = 1;  // past the leading 1
  Word out;
  while (i < bits.size()) {
    std::size_t zeros = 0;
    while (i < bits.size() && !bits[i]) {
      ++zeros;
      ++i;
    }
    if (i + zeros + 1 > bits.size()) return std::nullopt;  // truncated gamma
    std::uint64_t x = 0;
    for (std::size_t j = 0; j <= zeros; ++j) x = (x << 1) | (bits[i + j] ? 1 : 0);
    i += zeros + 1;
    if (x == 0) return std::nullopt;
    out.letters.emplace_back(x - 1);
  }
  return out;
}

CodingPtr default_coding() { return std::make_shared<DefaultCoding>(); }

}  // namespace infinitype
