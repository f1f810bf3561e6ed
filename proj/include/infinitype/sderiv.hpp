#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "infinitype/biposition.hpp"
#include "infinitype/coding.hpp"
#include "infinitype/term.hpp"
#include "infinitype/types.hpp"

namespace infinitype {

// Finite tracked derivations. Abstraction premises sit on track 0,
// application left premises on track 1 and argument premises on their
// argument tracks (>= 2). Judgments are always recomputed from the tree,
// never trusted from input files.
struct SNode {
  enum class Kind { Ax, Abs, App } kind = Kind::Ax;
  std::string var;    // Ax: variable typed; Abs: binder
  Track ax_track;     // Ax: the axiom track
  TypeId ax_type = kNoType;
  int child = -1;                          // Abs premise
  int left = -1;                           // App left premise
  std::vector<std::pair<Track, int>> args; // App argument premises
};

struct SDerivation {
  std::vector<SNode> nodes;
  int root = -1;

  const SNode& at(int i) const { return nodes.at(static_cast<std::size_t>(i)); }
};

struct SContextEntry {
  std::string var;
  SeqType seq;
};

using SContext = std::map<std::string, SeqType>;

struct SJudgment {
  SContext ctx;
  TypeId type = kNoType;
};

struct Violation {
  Word position;
  std::string message;
};

struct CheckReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
};

// Node indices by derivation position, plus computed judgments.
struct SDerivAnalysis {
  std::map<Word, int> position_of;       // derivation position -> node
  std::vector<Word> node_position;       // node -> derivation position
  std::vector<SJudgment> judgment;       // node -> judgment (best effort)
  CheckReport report;
};

// Validates the derivation against the term; in coding mode additionally
// demands that the axiom at position a uses axiom track code(a).
SDerivAnalysis analyze_sderiv(const TermPtr& t, const SDerivation& p, TypeArena& arena,
                              const CodingPtr& coding = nullptr);
CheckReport check_sderiv(const TermPtr& t, const SDerivation& p, TypeArena& arena,
                         const CodingPtr& coding = nullptr);

std::set<Word> sderiv_support(const SDerivation& p);

std::optional<SJudgment> judgment_at(const TermPtr& t, const SDerivation& p,
                                     TypeArena& arena, const Word& a);

struct BipLabel {
  bool arrow = false;
  std::string atom;

  bool operator==(const BipLabel& o) const {
    return arrow == o.arrow && (arrow || atom == o.atom);
  }
  std::string str() const { return arrow ? "->" : atom; }
};

struct BisupportResult {
  std::map<Biposition, BipLabel> labels;
  bool truncated = false;  // some concluded type was rational and was cut
};

// All right bipositions (a, c) with their type symbols. Rational types
// are cut at max_inner_depth and flagged.
BisupportResult bisupport(const TermPtr& t, const SDerivation& p, TypeArena& arena,
                          std::size_t max_inner_depth = 64);

// Ax-rule positions for x in the subderivation above a, excluding
// occurrences rebound by an abstraction on the way (including at a).
std::set<Word> axiom_positions(const TermPtr& t, const SDerivation& p, const Word& a,
                               const std::string& x);

// ---------------------------------------------------------------------------
// Residuation through one beta step.

// Relocation oracle: for an outer position a collapsing onto the fired
// redex and an argument track k, yields the position (inside the redex
// body, relative to its root) of the bound-variable occurrence whose
// axiom track is k; nothing when the track is dead (nihilated).
using RelocationFn = std::function<std::optional<Word>(const Word& a, const Track& k)>;

// Tracks how positions and bipositions move through the firing of the
// redex at term position b. res_* are the proper (partial, injective)
// residual maps; qres_bip is total, sending destroyed slots to the empty
// biposition.
class ResidualMap {
 public:
  ResidualMap(TermPtr source_term, Word redex, RelocationFn relocate);

  const Word& redex() const { return redex_; }

  std::optional<Word> res_pos(const Word& a) const;
  std::optional<Biposition> res_bip(const Biposition& p) const;
  Biposition qres_bip(const Biposition& p) const;

  // The landing spot for argument track k at redex copy a (exposed for
  // coding transport).
  std::optional<Word> relocation(const Word& a, const Track& k) const {
    return relocate_(a, k);
  }

 private:
  // Splits a into (redex copy prefix, rest) when a collapses onto the
  // redex; rest is empty for the redex root itself.
  std::optional<std::pair<Word, Word>> split(const Word& a) const;
  bool is_bound_occurrence(const Word& copy, const Word& beta) const;

  TermPtr term_;
  Word redex_;
  RelocationFn relocate_;
  std::string binder_;
};

// Coding transported through a beta step: each residual position keeps
// the code its source had.
class ResiduatedCoding : public Coding {
 public:
  ResiduatedCoding(CodingPtr parent, std::shared_ptr<const ResidualMap> map)
      : parent_(std::move(parent)), map_(std::move(map)) {}

  Track code(const Word& a) const override;
  std::optional<Word> pos(const Track& k) const override;

 private:
  CodingPtr parent_;
  std::shared_ptr<const ResidualMap> map_;
};

// Recorded shape of a fired or to-be-expanded redex.
struct RedexSpec {
  Word redex;                   // term position of the redex
  std::string var;              // bound variable
  TermPtr argument;             // the argument subterm
  std::vector<Word> occurrences;  // bound-variable positions in the body
};

struct SubjectReduceResult {
  TermPtr term;
  SDerivation deriv;
  std::shared_ptr<const ResidualMap> residuals;
  RedexSpec spec;
};

// One deterministic beta step on a valid derivation; preserves the
// conclusion judgment exactly.
SubjectReduceResult subject_reduce(const TermPtr& t, const SDerivation& p,
                                   TypeArena& arena, const Word& b);

struct ExpandSpec {
  Word redex;                     // where the new redex sits
  std::string var;                // fresh binder name
  TermPtr argument;               // the argument term s
  std::vector<Word> occurrences;  // positions (relative to redex) holding s
  CodingPtr coding;               // axiom tracks for the new variable; may be null
};

struct SubjectExpandResult {
  TermPtr term;
  SDerivation deriv;
};

// Inverse of subject_reduce along the given redex description; the
// conclusion judgment is preserved.
SubjectExpandResult subject_expand(const TermPtr& t_reduced, const SDerivation& p,
                                   TypeArena& arena, const ExpandSpec& spec);

// Forgetting tracks turns a valid tracked derivation into a multiset one;
// declared here, implemented with the multiset checker.
struct RDerivation;
RDerivation collapse_deriv(const TermPtr& t, const SDerivation& p, TypeArena& arena);

}  // namespace infinitype
