#include <random>

#include "doctest.h"
#include "infinitype/types.hpp"

using namespace infinitype;

namespace {

std::set<Word> full_support(const TypeArena& arena, TypeId id) {
  return stype_support(arena, id, 64);
}

}  // namespace

TEST_CASE("type grammar round-trips") {
  TypeArena arena;
  for (const char* src :
       {"o", "o'", "(2.o, 7.o') -> o''", "( ) -> o", "[o, o'] -> o",
        "[o]^w -> o'", "(2.(2.o) -> o) -> o", "rho = [rho]^w -> rho; rho",
        "({4+3n}.o) -> o'", "({2,5}.o, 7.o') -> o"}) {
    TypeId a = parse_type(arena, src);
    std::string printed = type_str(arena, a);
    TypeId b = parse_type(arena, printed);
    CHECK(type_equal(arena, a, b));
  }
}

TEST_CASE("supports of S-types") {
  TypeArena arena;
  // S_ex = (2.o, 7.o') -> o''  has support {e, 1, 2, 7}
  TypeId sex = parse_type(arena, "(2.o, 7.o') -> o''");
  std::set<Word> expect{Word(), Word::of({1}), Word::of({2}), Word::of({7})};
  CHECK(full_support(arena, sex) == expect);

  CHECK(full_support(arena, arena.atom("o")) == std::set<Word>{Word()});

  // self-looping sequence type, truncated at depth 2
  TypeId rho_s = parse_type(arena, "rhos = ({4+3n}.rhos) -> rhos; rhos");
  auto s = stype_support(arena, rho_s, 2, 3);
  CHECK(s.count(Word()));
  CHECK(s.count(Word::of({1})));
  CHECK(s.count(Word::of({1, 1})));
  CHECK(s.count(Word::of({4})));
  CHECK(s.count(Word::of({7})));
  CHECK(s.count(Word::of({10})));
  CHECK(s.count(Word::of({4, 1})));
  for (const auto& w : s) CHECK(w.size() <= 2);
}

TEST_CASE("support candidates") {
  std::set<Word> c1{Word(), Word::of({1}), Word::of({4}), Word::of({4, 1}),
                    Word::of({4, 3}), Word::of({4, 8})};
  CHECK(is_support_candidate(c1));

  std::set<Word> c2{Word(), Word::of({1}), Word::of({4}), Word::of({4, 3})};
  CHECK(!is_support_candidate(c2));  // 4.1 is missing

  CHECK(is_support_candidate({Word()}));
  CHECK(!is_support_candidate({}));
  // a type position can never sit on track 0
  CHECK(!is_support_candidate({Word(), Word::of({0})}));
}

TEST_CASE("decorating candidates") {
  TypeArena arena;
  std::set<Word> c1{Word(), Word::of({1}), Word::of({4}), Word::of({4, 1}),
                    Word::of({4, 3}), Word::of({4, 8})};
  auto ty = decorate_candidate(arena, c1);
  REQUIRE(ty);
  // (4.((8.o, 3.o) -> o)) -> o, all leaves canonicalized to o
  TypeId expect = parse_type(arena, "(4.(8.o, 3.o) -> o) -> o");
  CHECK(type_equal(arena, *ty, expect));
  CHECK(full_support(arena, *ty) == c1);

  auto leaf = decorate_candidate(arena, {Word()});
  REQUIRE(leaf);
  CHECK(type_equal(arena, *leaf, arena.atom("o")));

  auto emptyarrow = decorate_candidate(arena, {Word(), Word::of({1})});
  REQUIRE(emptyarrow);
  CHECK(type_equal(arena, *emptyarrow, parse_type(arena, "( ) -> o")));

  CHECK(!decorate_candidate(arena, {Word(), Word::of({4})}));
}

TEST_CASE("candidate conditions match brute-force decorability") {
  // every subset of the position universe {letters in 1..3, length <= 2}
  std::vector<Word> universe;
  for (std::uint64_t a = 1; a <= 3; ++a) {
    universe.push_back(Word::of({a}));
    for (std::uint64_t b = 1; b <= 3; ++b) universe.push_back(Word::of({a, b}));
  }
  TypeArena arena;
  for (std::uint32_t mask = 0; mask < (1u << universe.size()); ++mask) {
    std::set<Word> c{Word()};
    for (std::size_t i = 0; i < universe.size(); ++i)
      if (mask & (1u << i)) c.insert(universe[i]);
    bool candidate = is_support_candidate(c);
    auto ty = decorate_candidate(arena, c);
    bool decorable = ty && full_support(arena, *ty) == c;
    CHECK(candidate == decorable);
  }
}

TEST_CASE("sequence union and track conflicts") {
  TypeArena arena;
  TypeId o = arena.atom("o");
  TypeId o1 = arena.atom("o'");
  SeqType f1;
  f1.entries = {SeqEntry{Track(2), o}, SeqEntry{Track(3), o1}};
  SeqType f2;
  f2.entries = {SeqEntry{Track(3), o1}, SeqEntry{Track(8), o}};

  auto u = seq_union(f1, f2);
  REQUIRE(std::holds_alternative<TrackConflict>(u));
  CHECK(std::get<TrackConflict>(u).clashing == std::vector<Track>{Track(3)});

  // unit
  auto v = seq_union(f1, SeqType{});
  REQUIRE(std::holds_alternative<SeqType>(v));
  CHECK(std::get<SeqType>(v).entries.size() == 2);

  // disjoint roots merge
  SeqType g1, g2;
  g1.entries = {SeqEntry{Track(2), o}};
  g2.entries = {SeqEntry{Track(5), o1}};
  auto w = seq_union(g1, g2);
  REQUIRE(std::holds_alternative<SeqType>(w));
  auto tracks = std::get<SeqType>(w).root_tracks();
  CHECK(tracks == std::vector<Track>{Track(2), Track(5)});

  // families clash with overlapping progressions
  SeqType h1, h2;
  h1.families = {Family{TrackSet::progression(4, 3), o}};
  h2.families = {Family{TrackSet::progression(7, 6), o1}};
  CHECK(std::holds_alternative<TrackConflict>(seq_union(h1, h2)));
  SeqType h3;
  h3.families = {Family{TrackSet::progression(5, 3), o1}};
  CHECK(std::holds_alternative<SeqType>(seq_union(h1, h3)));

  // associativity and commutativity on disjoint unions
  auto ab = std::get<SeqType>(seq_union(g1, g2));
  auto ba = std::get<SeqType>(seq_union(g2, g1));
  CHECK(ab.root_tracks() == ba.root_tracks());
  SeqType g3;
  g3.entries = {SeqEntry{Track(9), o}};
  auto left = std::get<SeqType>(seq_union(std::get<SeqType>(seq_union(g1, g2)), g3));
  auto right = std::get<SeqType>(seq_union(g1, std::get<SeqType>(seq_union(g2, g3))));
  CHECK(left.root_tracks() == right.root_tracks());
}

TEST_CASE("type orders") {
  TypeArena arena;
  CHECK(type_order(arena, parse_type(arena, "[o1] -> o1")).n == 1);
  CHECK(type_order(arena, parse_type(arena, "o1")).n == 0);
  CHECK(type_order(arena, parse_type(arena, "[o1] -> [o2] -> o1")).n == 2);
  CHECK(type_order(arena, parse_type(arena, "[[o1] -> o2] -> o1")).n == 1);

  // R = R -> R has order omega
  TypeId r = parse_type(arena, "R = [R] -> R; R");
  CHECK(type_order(arena, r).omega);

  // the type of cu_lambda: [ ] -> [ ] -> ...
  TypeId m = parse_type(arena, "M = [] -> M; M");
  CHECK(type_order(arena, m).omega);

  // order is preserved by the sequence-to-multiset collapse
  TypeId sex = parse_type(arena, "(2.o, 7.o') -> (3.o) -> o''");
  CHECK(type_order(arena, collapse_S_to_R(arena, sex)) == type_order(arena, sex));
  TypeId rho_s = parse_type(arena, "rs = ({4+3n}.rs) -> rs; rs");
  CHECK(type_order(arena, collapse_S_to_R(arena, rho_s)).omega);
}

TEST_CASE("collapse of sequence types") {
  TypeArena arena;
  // (2.o, 5.o', 8.o) -> o collapses to [o, o, o'] -> o
  TypeId s = parse_type(arena, "(2.o, 5.o', 8.o) -> o");
  TypeId r = collapse_S_to_R(arena, s);
  TypeId expect = parse_type(arena, "[o, o, o'] -> o");
  CHECK(type_equal(arena, r, expect));

  TypeId o = arena.atom("o");
  CHECK(type_equal(arena, collapse_S_to_R(arena, o), o));

  // an infinite family becomes an omega multiplicity
  TypeId fam = parse_type(arena, "({4+3n}.o) -> o'");
  TypeId rf = collapse_S_to_R(arena, fam);
  CHECK(type_equal(arena, rf, parse_type(arena, "[o]^w -> o'")));
}

TEST_CASE("rational type equality") {
  TypeArena arena;
  // rho equals its one-step unfolding
  TypeId rho = parse_type(arena, "rho = [rho]^w -> rho; rho");
  const TypeNode& n = arena.at(rho);
  TypeId unfold = arena.rarrow(n.mset, n.target);
  CHECK(type_equal(arena, rho, unfold));

  CHECK(!type_equal(arena, arena.atom("o"), arena.atom("o'")));

  // two presentations of phi_o = [phi_o]^w -> o
  TypeId phi1 = parse_type(arena, "p = [p]^w -> o; p");
  TypeId p2a = arena.declare();
  TypeId p2b = arena.declare();
  TypeId oo = arena.atom("o");
  {
    TypeNode nn;
    nn.kind = TypeNode::Kind::RArrow;
    nn.mset = {MultEntry{p2b, Mult::omega()}};
    nn.target = oo;
    arena.define(p2a, std::move(nn));
  }
  {
    TypeNode nn;
    nn.kind = TypeNode::Kind::RArrow;
    nn.mset = {MultEntry{p2a, Mult::omega()}};
    nn.target = oo;
    arena.define(p2b, std::move(nn));
  }
  CHECK(type_equal(arena, phi1, p2a));

  // cross-check with a bounded unfolding oracle: supports to depth 6 agree
  auto sup1 = stype_support(arena, phi1, 6);
  auto sup2 = stype_support(arena, p2a, 6);
  CHECK(sup1 == sup2);

  // multiset equality groups bisimilar keys: [o, o] == [o]^2
  TypeId two_a = parse_type(arena, "[o, o] -> o");
  TypeId two_b = parse_type(arena, "[o]^2 -> o");
  CHECK(type_equal(arena, two_a, two_b));
  CHECK(!type_equal(arena, two_a, parse_type(arena, "[o] -> o")));
  CHECK(!type_equal(arena, two_a, parse_type(arena, "[o]^w -> o")));
}

TEST_CASE("omega absorption in multiplicities") {
  CHECK(mult_add(Mult(3), Mult::omega()).is_omega());
  CHECK(mult_add(Mult::omega(), Mult(3)).is_omega());
  CHECK(mult_add(Mult::omega(), Mult::omega()).is_omega());
  CHECK(mult_add(Mult(2), Mult(3)).v == 5);
  CHECK(mult_scale(Mult::omega(), Mult(2)).is_omega());
  CHECK(mult_scale(Mult(2), Mult::omega()).is_omega());
  CHECK(mult_scale(Mult(0), Mult::omega()).v == 0);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Mult a(rng() % 50), b(rng() % 50), c(rng() % 50);
    CHECK(mult_add(a, b).v == mult_add(b, a).v);
    CHECK(mult_add(mult_add(a, b), c).v == mult_add(a, mult_add(b, c)).v);
  }
}
