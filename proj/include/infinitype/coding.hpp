#pragma once

#include <memory>
#include <optional>

#include "infinitype/term.hpp"
#include "infinitype/track.hpp"

namespace infinitype {

// An injection from positions to tracks >= 2 with a computable partial
// inverse. Axiom tracks of synthesized derivations are pre-assigned by
// such a coding, which turns emptiness constraints into track-local ones.
class Coding {
 public:
  virtual ~Coding() = default;
  virtual Track code(const Word& a) const = 0;
  virtual std::optional<Word> pos(const Track& k) const = 0;
};

using CodingPtr = std::shared_ptr<const Coding>;

// The default injection. A word is Elias-gamma-encoded letter by letter
// (letters that are themselves oversized codes contribute their stored
// words recursively); the resulting bit string, read as a number n, gives
// the track n + 1. The empty word gets track 2, and codes too wide for
// 64 bits stay symbolic.
class DefaultCoding : public Coding {
 public:
  Track code(const Word& a) const override;
  std::optional<Word> pos(const Track& k) const override;
};

CodingPtr default_coding();

}  // namespace infinitype
