#pragma once

#include <string>
#include <variant>
#include <vector>

#include "infinitype/relations.hpp"

namespace infinitype {

// Negative left-consumption in either orientation disqualifies a chain
// from being normal.
bool chain_is_normal(const Chain& ch);

struct Impossibility {
  std::string lemma;  // the interaction rule that blocks
  std::size_t at_index = 0;
  std::string detail;
};

using CanonicalResult = std::variant<Chain, Impossibility>;

// Rewrites a normal chain towards the all-positive-consumption form:
// type-formation links commute leftwards past positive consumptions,
// adjacent opposite consumptions of one thread cancel, and trailing
// type-formation links into the empty thread strip off. A chain that
// would end up as positive consumptions out of the root thread is
// refuted, as are chains demanding an arrow or tree step in front of a
// positive consumption.
CanonicalResult rewrite_to_canonical(const RelationSpace& space, const Chain& ch);

// One beta step applied to a chain: witnesses map through the
// quasi-residuals, collapsed links (equal endpoint threads) drop, and
// the chain is cut at its first arrival in the empty thread.
struct ChainResiduation {
  TermPtr term;
  CodingPtr coding;
  Chain chain;
};

ChainResiduation residuate_chain(const RelationSpace& space, const Chain& ch, const Word& b);

// Builds the coding-level residual map of the redex at b (relocations
// resolved through the coding, not through any particular derivation).
std::shared_ptr<const ResidualMap> coding_residual_map(const RelationSpace& space,
                                                       const Word& b);

// The collapsing strategy: repeatedly pick a negative left-consumption
// (shortest outer witness first), locate its redex tower, fire the
// innermost spine redex, and residuate. Heights drop by two per step
// until a plain redex collapses the link; the result is a normal chain.
struct StrategyStep {
  Word fired;                   // term position of the redex
  std::size_t height_before;    // consumption height of the targeted link
  TermPtr term_after;
  Chain chain_after;
};

struct StrategyTrace {
  std::vector<StrategyStep> steps;
  TermPtr final_term;
  CodingPtr final_coding;
  Chain final_chain;
  std::size_t beta_steps = 0;
};

StrategyTrace collapsing_strategy(const RelationSpace& space, const Chain& ch);

// Consumption height of a left-consumption witness (a.1, k.c): the
// number of ascendants between the application and the abstraction that
// called the consumed slot.
std::size_t consumption_height(const RelationSpace& space, const Biposition& witness_src);

// True iff the thread-level edge key1 -kind-> key2 is realized by some
// member witness within the size bound.
bool thread_edge_exists(const RelationSpace& space, const Biposition& key1,
                        RelationSpace::StepKind kind, const Biposition& key2,
                        std::size_t max_size);

}  // namespace infinitype
