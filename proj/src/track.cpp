#include "infinitype/track.hpp"

#include <algorithm>
#include <sstream>

namespace infinitype {

namespace {

std::uint64_t bit_width_u64(std::uint64_t v) {
  std::uint64_t b = 0;
  while (v) {
    ++b;
    v >>= 1;
  }
  return b;
}

}  // namespace

const Word& Track::code_word() const { return code_->word; }

std::uint64_t Track::bit_width() const {
  if (code_) return code_->bits;
  return bit_width_u64(value_ + 1 == 0 ? value_ : value_ + 1);
}

bool Track::operator==(const Track& o) const {
  if (is_big() != o.is_big()) return false;
  if (!is_big()) return value_ == o.value_;
  if (code_ == o.code_) return true;
  if (code_->bits != o.code_->bits || code_->hash != o.code_->hash) return false;
  return code_->word == o.code_->word;
}

bool Track::operator<(const Track& o) const {
  if (is_big() != o.is_big()) return !is_big();  // numeric values < big ones
  if (!is_big()) return value_ < o.value_;
  if (code_ == o.code_) return false;
  if (code_->bits != o.code_->bits) return code_->bits < o.code_->bits;
  if (code_->hash != o.code_->hash) return code_->hash < o.code_->hash;
  return code_->word < o.code_->word;
}

std::string Track::str() const {
  if (!code_) return std::to_string(value_);
  return "<" + code_->word.str() + ">";
}

Word Word::of(std::initializer_list<std::uint64_t> ls) {
  Word w;
  w.letters.reserve(ls.size());
  for (auto v : ls) w.letters.emplace_back(v);
  return w;
}

Word Word::append(const Track& t) const {
  Word w(*this);
  w.letters.push_back(t);
  return w;
}

Word Word::concat(const Word& o) const {
  Word w(*this);
  w.letters.insert(w.letters.end(), o.letters.begin(), o.letters.end());
  return w;
}

Word Word::prefix(std::size_t n) const {
  Word w;
  w.letters.assign(letters.begin(), letters.begin() + std::min(n, letters.size()));
  return w;
}

Word Word::tail() const {
  Word w;
  if (!letters.empty()) w.letters.assign(letters.begin() + 1, letters.end());
  return w;
}

Word Word::drop_last() const {
  Word w(*this);
  if (!w.letters.empty()) w.letters.pop_back();
  return w;
}

bool Word::is_prefix_of(const Word& w) const {
  if (size() > w.size()) return false;
  return std::equal(letters.begin(), letters.end(), w.letters.begin());
}

Word Word::collapse() const {
  Word w;
  w.letters.reserve(size());
  for (const auto& t : letters) w.letters.emplace_back(t.collapse());
  return w;
}

bool Word::is_collapsed() const {
  for (const auto& t : letters)
    if (t.is_big() || t.small_value() > 2) return false;
  return true;
}

bool Word::operator<(const Word& o) const {
  return std::lexicographical_compare(letters.begin(), letters.end(),
                                      o.letters.begin(), o.letters.end());
}

std::string Word::str() const {
  if (letters.empty()) return "e";
  std::ostringstream out;
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (i) out << '.';
    out << letters[i].str();
  }
  return out.str();
}

std::size_t hash_track(const Track& t) {
  if (!t.is_big()) return std::hash<std::uint64_t>{}(t.small_value());
  return t.code_->hash * 0x9e3779b97f4a7c15ull + 0x517cc1b727220a95ull;
}

std::size_t hash_word(const Word& w) {
  std::size_t h = 0xcbf29ce484222325ull;
  for (const auto& t : w.letters) {
    h ^= hash_track(t);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::optional<Word> parse_word(const std::string& text) {
  std::string s;
  // Accept '.' and the middle dot as separators.
  for (std::size_t i = 0; i < text.size();) {
    if (text.compare(i, 2, "\xc2\xb7") == 0) {
      s += '.';
      i += 2;
    } else {
      s += text[i];
      ++i;
    }
  }
  if (s == "e" || s == "eps" || s.empty()) return Word();
  Word w;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    std::uint64_t v = 0;
    while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) {
      v = v * 10 + static_cast<std::uint64_t>(s[i] - '0');
      ++i;
    }
    w.letters.emplace_back(v);
    if (i < s.size()) {
      if (s[i] != '.') return std::nullopt;
      ++i;
      if (i == s.size()) return std::nullopt;
    }
  }
  return w;
}

}  // namespace infinitype
