#pragma once

#include <string>

#include "infinitype/track.hpp"

namespace infinitype {

// A pointer into a type nested in a derivation: an outer position (in the
// derivation) paired with an inner position (in the type concluded
// there), or the distinguished empty biposition standing for a slot that
// relevance forces to stay empty.
struct Biposition {
  bool bottom = false;
  Word outer, inner;

  static Biposition bot() {
    Biposition p;
    p.bottom = true;
    return p;
  }
  static Biposition at(Word o, Word i) {
    Biposition p;
    p.outer = std::move(o);
    p.inner = std::move(i);
    return p;
  }

  std::size_t size() const { return bottom ? 0 : outer.size() + inner.size(); }

  bool operator==(const Biposition& o) const {
    if (bottom != o.bottom) return false;
    if (bottom) return true;
    return outer == o.outer && inner == o.inner;
  }
  bool operator!=(const Biposition& o) const { return !(*this == o); }
  bool operator<(const Biposition& o) const {
    if (bottom != o.bottom) return bottom;  // bottom sorts first
    if (bottom) return false;
    if (outer != o.outer) return outer < o.outer;
    return inner < o.inner;
  }

  std::string str() const {
    if (bottom) return "_bot_";
    return "(" + outer.str() + ", " + inner.str() + ")";
  }
};

}  // namespace infinitype

template <>
struct std::hash<infinitype::Biposition> {
  std::size_t operator()(const infinitype::Biposition& p) const {
    if (p.bottom) return 0x5bd1e995u;
    return infinitype::hash_word(p.outer) * 0x9e3779b97f4a7c15ull ^
           infinitype::hash_word(p.inner);
  }
};
