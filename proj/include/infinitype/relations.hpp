#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "infinitype/biposition.hpp"
#include "infinitype/coding.hpp"
#include "infinitype/sderiv.hpp"
#include "infinitype/term.hpp"
#include "infinitype/types.hpp"

namespace infinitype {

enum class Polarity { Pos, Neg };

inline const char* polarity_str(Polarity p) { return p == Polarity::Pos ? "+" : "-"; }

// The candidate space of a term under a fixed coding: every outer
// position collapsing into the term's support paired with any inner
// position, plus the empty biposition. Houses the stability relations
// that a bisupport must be closed under.
class RelationSpace {
 public:
  RelationSpace(TermPtr t, CodingPtr coding);

  const TermPtr& term() const { return term_; }
  const CodingPtr& coding() const { return coding_; }

  bool outer_valid(const Word& a) const { return in_support(term_, a); }

  // Binding abstraction of the variable occurrence at a, if any.
  std::optional<Word> binder(const Word& a) const;

  // Membership in the axiom-track set dedicated to the binder at
  // lambda_pos: k belongs iff pos(k) is an occurrence of the bound
  // variable above the abstraction, not rebound on the way.
  bool track_in_lambda(const Word& lambda_pos, const Track& k) const;
  // Bounded enumeration of that set: tracks of occurrence candidates
  // whose extra argument-track letters are drawn from `alphabet`.
  std::vector<Track> lambda_tracks(const Word& lambda_pos,
                                   const std::vector<Track>& alphabet,
                                   std::size_t limit) const;

  // One ascendance step (towards the premises) and its inverse.
  std::optional<Biposition> asc(const Biposition& p) const;
  std::optional<Biposition> asc_inv(const Biposition& p) const;
  // Polar inversion at an abstraction; the result may be the empty
  // biposition when the track is dead.
  std::optional<Biposition> pi(const Biposition& p) const;
  std::optional<Biposition> pi_inv(const Biposition& p) const;

  Biposition top_ascendant(const Biposition& p) const;
  Polarity polarity(const Biposition& p) const;

  // Canonical thread key: the positive top when the thread has a
  // positive component, else the negative top; the empty biposition for
  // the thread of emptiness.
  Biposition thread_key(const Biposition& p) const;
  // Every member of the thread with the given key (finite; both the
  // positive and the negative descent).
  std::vector<Biposition> thread_members(const Biposition& key) const;

  enum class StepKind { Cons, ConsInv, T1, T2, Abs, Down };
  struct Step {
    StepKind kind;
    Biposition to;
  };
  // Forward subjugation successors of p (the consumption pair in both
  // orientations, type formation, the abstraction-arrow demand, and the
  // tree-shape demand).
  std::vector<Step> forward_steps(const Biposition& p) const;

  // Equivalence neighbours (ascendance and polar inversion, both ways).
  std::vector<Biposition> equiv_steps(const Biposition& p, bool* hits_bottom) const;

 private:
  TermPtr term_;
  CodingPtr coding_;
};

const char* step_kind_str(RelationSpace::StepKind k);

// ---------------------------------------------------------------------------
// Minimal closure

struct ClosureBound {
  std::size_t max_size = 18;     // |outer| + |inner| per biposition
  std::size_t max_nodes = 200000;
};

struct ClosureResult {
  std::set<Biposition> bipositions;
  std::set<Biposition> thread_keys;
  bool hit_bot = false;
  std::set<Biposition> frontier;  // successors cut by the bound
  ClosureBound bound;
};

// Closure of {(e, e)} under thread equivalence and forward subjugation,
// truncated at the bound. Reaching the empty biposition sets hit_bot (the
// closure does not expand past it). Truncation shows up as a nonempty
// frontier, never as an error.
ClosureResult closure_bmin(const RelationSpace& space, ClosureBound bound);

// Decorates a complete closure into a tracked derivation whose bisupport
// is exactly the closure: terminal bipositions become the atom "o",
// internal ones arrows, axiom tracks follow the coding.
// Throws on truncated or emptiness-tainted closures.
SDerivation synthesize_from_closure(const RelationSpace& space, const ClosureResult& res,
                                    TypeArena& arena);

// ---------------------------------------------------------------------------
// Chains

struct ChainLink {
  Biposition from_key, to_key;
  RelationSpace::StepKind kind;
  // Witness bipositions; for consumption steps these are stored in the
  // consumption direction (left-consumed source, right-consumed target)
  // together with the orientation used in the chain.
  Biposition witness_src, witness_tgt;
  Polarity pol_src = Polarity::Pos, pol_tgt = Polarity::Pos;
};

struct Chain {
  Biposition start_key;
  std::vector<ChainLink> links;

  const Biposition& end_key() const {
    return links.empty() ? start_key : links.back().to_key;
  }
};

struct ChainBound {
  std::size_t max_len = 12;
  std::size_t max_size = 20;
  std::size_t max_nodes = 400000;
};

struct ChainSearchOptions {
  // Test-only wiring control: also walk the type-formation demand in the
  // reversed direction, which must manufacture spurious chains.
  bool t2_reversed = false;
};

// Breadth-first search for a chain from the root thread to the thread of
// emptiness within the bounds; absence is a value.
std::optional<Chain> find_nihilating_chain(const RelationSpace& space, ChainBound bound,
                                           ChainSearchOptions options = {});

// Same search, but towards the thread of (e, 1): a witness that the root
// type must be an arrow.
std::optional<Chain> find_lambda_chain(const RelationSpace& space, ChainBound bound);

bool chain_well_formed(const RelationSpace& space, const Chain& ch);
bool chain_is_nihilating(const RelationSpace& space, const Chain& ch);

// ---------------------------------------------------------------------------
// Zero-term analysis

struct ZeroTermReport {
  enum class Certificate { NegativeRoot, PositiveRoot, Inconclusive } certificate =
      Certificate::Inconclusive;
  // NegativeRoot: the head-reduction segment collapsing the root tower
  // sequence, ending in an abstraction (order >= 1 witnessed).
  std::vector<Word> head_segment;
  TermPtr final_term;
  // PositiveRoot: a chain from the root thread to thr(e, 1).
  std::optional<Chain> lambda_chain;
};

ZeroTermReport zero_term_analysis(const RelationSpace& space, ChainBound bound);

}  // namespace infinitype
