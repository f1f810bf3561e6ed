#pragma once

#include <map>
#include <string>
#include <vector>

#include "infinitype/sderiv.hpp"
#include "infinitype/term.hpp"
#include "infinitype/types.hpp"

namespace infinitype {

// Multiset-side derivations: finite rooted graphs whose nodes carry their
// claimed judgments. Sharing and back-edges make regular infinite
// derivations representable; argument premises carry multiplicities, with
// omega marking an infinite family checked through one representative.
using RContext = std::map<std::string, std::vector<MultEntry>>;

struct ArgGroup {
  int node = -1;
  Mult mult;
};

struct RNode {
  enum class Kind { Ax, Abs, App } kind = Kind::Ax;
  std::string var;        // Ax: variable; Abs: binder
  RContext ctx;           // claimed context
  TypeId type = kNoType;  // claimed type
  TermPtr subject;        // the subterm this node types
  int left = -1;          // Abs premise / App left premise
  std::vector<ArgGroup> args;
};

struct RDerivation {
  std::vector<RNode> nodes;
  int root = -1;

  const RNode& at(int i) const { return nodes.at(static_cast<std::size_t>(i)); }
};

enum class RSystem {
  R,       // relevant: axioms carry exactly their own hypothesis
  Rw,      // weakening built into the axiom rule
  Simple,  // one shared context, singleton arrow sources
};

// Pointwise omega-absorbing operations on contexts.
RContext rcontext_add(const TypeArena& arena, const RContext& a, const RContext& b);
RContext rcontext_scale(const RContext& a, Mult m);
bool rcontext_equal(const TypeArena& arena, const RContext& a, const RContext& b);
bool mset_equal(const TypeArena& arena, const std::vector<MultEntry>& a,
                const std::vector<MultEntry>& b);

// Local-consistency check of every node against its claimed judgment;
// cyclic references simply require their target's judgment to fit where
// it is used, which is the regular-derivation reading.
CheckReport check_rderiv(const TermPtr& t, const RDerivation& d, TypeArena& arena,
                         RSystem system);

// Structural equality of derivation graphs up to type bisimilarity.
bool rderiv_equal(const TypeArena& arena, const RDerivation& a, int na,
                  const RDerivation& b, int nb);

}  // namespace infinitype
