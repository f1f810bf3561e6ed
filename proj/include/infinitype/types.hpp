#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "infinitype/track.hpp"

namespace infinitype {

// Multiplicities in multiset types: naturals plus omega (absorbing).
struct Mult {
  static constexpr std::uint64_t kOmega = ~std::uint64_t{0};
  std::uint64_t v = 1;

  Mult() = default;
  explicit Mult(std::uint64_t n) : v(n) {}
  static Mult omega() { return Mult(kOmega); }
  bool is_omega() const { return v == kOmega; }
  bool operator==(const Mult& o) const { return v == o.v; }
  bool operator!=(const Mult& o) const { return v != o.v; }
};

Mult mult_add(Mult a, Mult b);
Mult mult_scale(Mult a, Mult factor);
std::string mult_str(Mult m);

// Descriptor for the root tracks of an omega-family inside a sequence
// type: either an explicit finite set or an arithmetic progression
// start + step * N of numeric tracks.
struct TrackSet {
  enum class Kind { Finite, Progression } kind = Kind::Finite;
  std::vector<Track> finite;          // sorted, distinct
  std::uint64_t start = 0, step = 1;  // progression

  static TrackSet of(std::vector<Track> ts);
  static TrackSet progression(std::uint64_t start, std::uint64_t step);

  bool contains(const Track& t) const;
  bool infinite() const { return kind == Kind::Progression; }
  bool intersects(const TrackSet& o) const;
  // First `limit` members in increasing order.
  std::vector<Track> enumerate(std::size_t limit) const;
  bool operator==(const TrackSet& o) const;
  std::string str() const;
};

using TypeId = std::uint32_t;
constexpr TypeId kNoType = ~TypeId{0};

struct SeqEntry {
  Track track;
  TypeId type;
};

struct Family {
  TrackSet tracks;
  TypeId type;
};

// A sequence type: finitely many labelled entries plus omega-families.
// Root tracks must be pairwise distinct across entries and families.
struct SeqType {
  std::vector<SeqEntry> entries;  // sorted by track
  std::vector<Family> families;

  bool empty() const { return entries.empty() && families.empty(); }
  std::optional<TypeId> lookup(const Track& t) const;
  std::vector<Track> root_tracks(std::size_t family_limit = 4) const;
};

struct TrackConflict {
  std::vector<Track> clashing;
};

// Disjoint union; reports the clashing tracks when root sets intersect.
std::variant<SeqType, TrackConflict> seq_union(const SeqType& a, const SeqType& b);

struct MultEntry {
  TypeId type;
  Mult mult;
};

// Types of both systems live in one arena so the sequence-to-multiset
// collapse can build results in place. Rational (regular infinite) types
// are ordinary cycles in the arena graph; every node is an atom or an
// arrow, so cycles are contractive by construction.
struct TypeNode {
  enum class Kind { Atom, SArrow, RArrow } kind = Kind::Atom;
  std::string atom;
  SeqType seq;                   // SArrow source
  std::vector<MultEntry> mset;   // RArrow source
  TypeId target = kNoType;
  bool defined = true;
};

class TypeArena {
 public:
  TypeId atom(const std::string& name);
  TypeId sarrow(SeqType source, TypeId target);
  TypeId rarrow(std::vector<MultEntry> source, TypeId target);

  // Recursive equations: declare a hole, then define it.
  TypeId declare();
  void define(TypeId hole, TypeNode node);

  const TypeNode& at(TypeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  bool fully_defined() const;

 private:
  std::vector<TypeNode> nodes_;
};

// All support positions of length <= depth. Tracks of an infinite family
// are enumerated up to family_limit members per family (the support of
// such a type is infinite in width; callers asking about infinite
// families get a truncation).
std::set<Word> stype_support(const TypeArena& arena, TypeId id, std::size_t depth,
                             std::size_t family_limit = 4);

// True iff the finite position set C is the support of some type:
// nonempty, no track-0 letters, prefix-closed, and every internal
// position has a child on track 1.
bool is_support_candidate(const std::set<Word>& c);

// Canonical decoration of a support candidate: leaves become the atom
// "o", internal nodes arrows. Returns nothing on non-candidates.
std::optional<TypeId> decorate_candidate(TypeArena& arena, const std::set<Word>& c);

struct TypeOrder {
  bool omega = false;
  std::uint64_t n = 0;

  bool operator==(const TypeOrder& o) const { return omega == o.omega && (omega || n == o.n); }
  std::string str() const { return omega ? "w" : std::to_string(n); }
};

// Number of arrows along the target spine; omega when the spine cycles.
TypeOrder type_order(const TypeArena& arena, TypeId id);

// Forgets tracks: sequence entries become multiset occurrences,
// omega-families omega multiplicities.
TypeId collapse_S_to_R(TypeArena& arena, TypeId id);

// Bisimulation equality on (possibly rational) types. Multisets are
// compared up to recursive equality with omega-absorbing multiplicities.
bool type_equal(const TypeArena& arena, TypeId a, TypeId b);

// Rendering and parsing of the textual grammar:
//   atoms      o, o', tau ...
//   S arrows   (2.o, 7.o') -> o''   with families {2,5}.T and {4+3n}.T
//   R arrows   [A, B] -> C          with [A]^w, [A]^3
//   equations  rho = [rho]^w -> rho
std::string type_str(const TypeArena& arena, TypeId id);

struct TypeDocument {
  std::map<std::string, std::string> equations;
  std::string root;
};

struct TypeParseError {
  std::size_t offset;
  std::string message;
};

// Parses a stand-alone type expression, optionally with named equations.
TypeId parse_type(TypeArena& arena, const std::string& text);  // throws TypeParseError
TypeId parse_type_document(TypeArena& arena, const TypeDocument& doc);
TypeDocument type_document(const TypeArena& arena, TypeId id);

}  // namespace infinitype
