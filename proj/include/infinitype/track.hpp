#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace infinitype {

struct Word;
struct BigCode;
using WordPtr = std::shared_ptr<const Word>;
using BigCodePtr = std::shared_ptr<const BigCode>;

// A track is a natural number labelling an edge of a term, type or
// derivation tree. 0 sits under an abstraction, 1 on an application's
// left side (or an arrow's target), and every track >= 2 is an
// argument/intersection slot.
//
// Track values produced by position codings nest (a coded position may
// itself contain coded letters), so they quickly leave the 64-bit range.
// Values that fit are kept numeric; larger ones are kept symbolically as
// the coded word plus its bit width. Symbolic values are always > 2^64,
// so the two representations never collide and equality stays exact.
class Track {
 public:
  Track() : value_(0) {}
  explicit Track(std::uint64_t v) : value_(v) {}
  explicit Track(BigCodePtr code) : value_(0), code_(std::move(code)) {}

  static Track number(std::uint64_t v) { return Track(v); }

  bool is_big() const { return code_ != nullptr; }
  std::uint64_t small_value() const { return value_; }
  const Word& code_word() const;

  // Bit width of value+1; used to order and to Elias-encode letters.
  std::uint64_t bit_width() const;

  // min(k, 2), the collapse of a track.
  std::uint64_t collapse() const {
    if (code_) return 2;
    return value_ < 2 ? value_ : 2;
  }

  bool operator==(const Track& o) const;
  bool operator!=(const Track& o) const { return !(*this == o); }
  bool operator<(const Track& o) const;

  std::string str() const;

  friend std::size_t hash_track(const Track& t);

 private:
  std::uint64_t value_ = 0;
  BigCodePtr code_ = nullptr;  // set iff the numeric value exceeds 64 bits
};

// A position: a finite word of tracks.
struct Word {
  std::vector<Track> letters;

  Word() = default;
  explicit Word(std::vector<Track> ls) : letters(std::move(ls)) {}

  static Word epsilon() { return Word(); }
  // Builds a word from small letters, e.g. {0, 1, 2}.
  static Word of(std::initializer_list<std::uint64_t> ls);

  std::size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }

  Word append(const Track& t) const;
  Word append_small(std::uint64_t v) const { return append(Track(v)); }
  Word concat(const Word& w) const;
  Word prefix(std::size_t n) const;
  // Drops the leading letter.
  Word tail() const;
  Word drop_last() const;
  const Track& front() const { return letters.front(); }
  const Track& back() const { return letters.back(); }

  bool is_prefix_of(const Word& w) const;
  // Letter-wise min(k, 2).
  Word collapse() const;
  // True iff every letter is <= 2 already.
  bool is_collapsed() const;

  bool operator==(const Word& o) const { return letters == o.letters; }
  bool operator!=(const Word& o) const { return !(o == *this); }
  bool operator<(const Word& o) const;

  std::string str() const;  // "0.1.2", "e" for the empty word
};

using Position = Word;

// An oversized code value, kept symbolically as the coded word with its
// bit width and hash cached (codes nest, so recomputing either would be
// exponential in the nesting depth).
struct BigCode {
  Word word;
  std::uint64_t bits = 0;
  std::size_t hash = 0;
};

// Parses "0.1.2" / "0·1·2" / "e" / "eps". Letters must be plain numbers.
std::optional<Word> parse_word(const std::string& text);

std::size_t hash_track(const Track& t);
std::size_t hash_word(const Word& w);

}  // namespace infinitype

template <>
struct std::hash<infinitype::Track> {
  std::size_t operator()(const infinitype::Track& t) const { return infinitype::hash_track(t); }
};

template <>
struct std::hash<infinitype::Word> {
  std::size_t operator()(const infinitype::Word& w) const { return infinitype::hash_word(w); }
};
