#include <algorithm>
#include <deque>
#include <random>

#include "doctest.h"
#include "infinitype/relations.hpp"

using namespace infinitype;

namespace {

RelationSpace space_of(const char* src) {
  return RelationSpace(parse_term(src), default_coding());
}

Biposition bp(std::initializer_list<std::uint64_t> a,
              std::initializer_list<std::uint64_t> c) {
  return Biposition::at(Word::of(a), Word::of(c));
}

TermPtr random_term(std::mt19937_64& rng, int size, std::vector<std::string> scope) {
  std::uniform_int_distribution<int> pick(0, 99);
  if (size <= 1) {
    if (scope.empty() || pick(rng) < 25) return Term::var("f" + std::to_string(pick(rng) % 2));
    return Term::var(scope[static_cast<std::size_t>(pick(rng)) % scope.size()]);
  }
  if (pick(rng) < 45) {
    std::string x = "x" + std::to_string(scope.size());
    scope.push_back(x);
    return Term::abs(x, random_term(rng, size - 1, scope));
  }
  int ls = 1 + pick(rng) % (size - 1);
  return Term::app(random_term(rng, ls, scope), random_term(rng, size - ls, scope));
}

}  // namespace

TEST_CASE("the default coding is injective and invertible") {
  DefaultCoding coding;
  CHECK(coding.code(Word()) == Track(2));
  CHECK(coding.pos(coding.code(Word::of({0, 1}))) == Word::of({0, 1}));

  // injectivity over the first 10^4 enumerated words (letters 0..2)
  std::set<Track> seen;
  std::vector<Word> frontier{Word()};
  std::size_t count = 0;
  while (count < 10000) {
    std::vector<Word> next;
    for (const auto& w : frontier) {
      Track k = coding.code(w);
      CHECK(k.collapse() == 2);
      CHECK(seen.insert(k).second);
      CHECK(coding.pos(k) == w);
      if (++count >= 10000) break;
      for (std::uint64_t l = 0; l <= 2; ++l) next.push_back(w.append_small(l));
    }
    frontier = next;
  }

  // codes containing coded letters stay injective and invertible
  Track inner = coding.code(Word::of({1, 0, 1}));
  Word nested = Word().append(inner).append_small(0);
  Track outer = coding.code(nested);
  CHECK(coding.pos(outer) == nested);
  // and one more level, which leaves the 64-bit range
  Word nested2 = Word().append(outer).append(inner);
  Track outer2 = coding.code(nested2);
  CHECK(coding.pos(outer2) == nested2);
  CHECK(!(outer2 == outer));
  // non-code numbers have no position
  CHECK(!coding.pos(Track(0)));
  CHECK(!coding.pos(Track(1)));
}

TEST_CASE("axiom-track sets of abstractions") {
  // no free occurrence of the binder: the set is empty
  {
    RelationSpace s = space_of("\\x. y");
    CHECK(s.lambda_tracks(Word(), {}, 8).empty());
    CHECK(!s.track_in_lambda(Word(), Track(8)));
  }
  // identity: exactly the code of the body position
  {
    RelationSpace s = space_of("\\x. x");
    Track expect = s.coding()->code(Word::of({0}));
    auto ts = s.lambda_tracks(Word(), {}, 8);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0] == expect);
    CHECK(s.track_in_lambda(Word(), expect));
    CHECK(!s.track_in_lambda(Word(), Track(9)));
  }
  // membership decided through the shape of pos(k): under \z. \x. x x
  // the tracks of the two x-occurrences (with any argument-track
  // extensions) belong; unrelated codes do not
  {
    RelationSpace s = space_of("\\z. \\x. x x");
    Word lam = Word::of({0});  // the inner abstraction
    CHECK(s.track_in_lambda(lam, s.coding()->code(Word::of({0, 0, 1}))));
    CHECK(s.track_in_lambda(lam, s.coding()->code(Word::of({0, 0, 2}))));
    Word weird = Word::of({0, 0}).append_small(7);  // argument track variant
    CHECK(s.track_in_lambda(lam, s.coding()->code(weird)));
    CHECK(!s.track_in_lambda(lam, s.coding()->code(Word::of({0}))));
  }
  // shadowing: under \x. \x. x only the inner binder owns the occurrence
  {
    RelationSpace s = space_of("\\x. \\x. x");
    Track k = s.coding()->code(Word::of({0, 0}));
    CHECK(s.track_in_lambda(Word::of({0}), k));
    CHECK(!s.track_in_lambda(Word(), k));
  }
}

TEST_CASE("ascendance chains of the two-binder example") {
  // \y. \x. x x : (e,1.1) asc (0,1) asc (0.0,e) asc (0.0.1, 1)
  RelationSpace s = space_of("\\y. \\x. x x");
  CHECK(s.asc(bp({}, {1, 1})) == bp({0}, {1}));
  CHECK(s.asc(bp({0}, {1})) == bp({0, 0}, {}));
  CHECK(s.asc(bp({0, 0}, {})) == bp({0, 0, 1}, {1}));
  CHECK(!s.asc(bp({0, 0, 1}, {1})));  // an axiom node tops the chain
  CHECK(s.top_ascendant(bp({}, {1, 1})) == bp({0, 0, 1}, {1}));

  // inverse steps
  CHECK(s.asc_inv(bp({0, 0, 1}, {1})) == bp({0, 0}, {}));
  CHECK(s.asc_inv(bp({0}, {1})) == bp({}, {1, 1}));
  CHECK(!s.asc_inv(bp({}, {1, 1})));

  // polar inversion: the inner abstraction's source entry on the track
  // coded for the occurrence at 0.0.1 crosses to that axiom
  Track k = s.coding()->code(Word::of({0, 0, 1}));
  Biposition neg = Biposition::at(Word::of({0}), Word().append(k).append_small(1));
  CHECK(s.pi(neg) == bp({0, 0, 1}, {1}));
  CHECK(s.pi_inv(bp({0, 0, 1}, {1})) == neg);

  // a dead track crosses to emptiness
  Biposition dead = Biposition::at(Word::of({0}), Word::of({900001}));
  auto q = s.pi(dead);
  REQUIRE(q);
  CHECK(q->bottom);
}

TEST_CASE("polarity") {
  RelationSpace s = space_of("\\y. \\x. x x");
  // occurrences ascending to an axiom are positive
  CHECK(s.polarity(bp({}, {1, 1})) == Polarity::Pos);
  CHECK(s.polarity(bp({0, 0, 1}, {1})) == Polarity::Pos);
  // the matching source slot of the abstraction is negative
  Track k = s.coding()->code(Word::of({0, 0, 1}));
  CHECK(s.polarity(Biposition::at(Word::of({0}), Word().append(k).append_small(1))) ==
        Polarity::Neg);
  // the empty biposition is negative
  CHECK(s.polarity(Biposition::bot()) == Polarity::Neg);
  // an abstraction-root biposition is its own negative top
  CHECK(s.polarity(bp({}, {})) == Polarity::Neg);
}

TEST_CASE("threads") {
  RelationSpace s = space_of("\\y. \\x. x x");
  // the ascendance chain and its polar-inverse side share one thread
  Track k = s.coding()->code(Word::of({0, 0, 1}));
  Biposition key = s.thread_key(bp({}, {1, 1}));
  CHECK(key == bp({0, 0, 1}, {1}));
  CHECK(s.thread_key(Biposition::at(Word::of({0}), Word().append(k).append_small(1))) ==
        key);
  CHECK(s.thread_key(bp({0}, {1})) == key);

  // members: the positive descent (4 bipositions down to the root
  // conclusion) plus the negative one (2, through the outer binder)
  auto members = s.thread_members(key);
  CHECK(members.size() == 6);
  for (const auto& m :
       {bp({}, {1, 1}), bp({0}, {1}), bp({0, 0}, {}), bp({0, 0, 1}, {1}),
        Biposition::at(Word::of({0}), Word().append(k).append_small(1)),
        Biposition::at(Word(), Word::of({1}).append(k).append_small(1))})
    CHECK(std::count(members.begin(), members.end(), m) == 1);

  // a dead-track biposition belongs to the thread of emptiness
  CHECK(s.thread_key(Biposition::at(Word::of({0}), Word::of({900001, 1}))).bottom);

  // a lone axiom biposition is its own singleton thread
  RelationSpace sy = space_of("y");
  CHECK(sy.thread_key(bp({}, {})) == bp({}, {}));
  CHECK(sy.thread_members(bp({}, {})).size() == 1);
}

TEST_CASE("thread keys agree with a brute-force equivalence closure") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 30; ++round) {
    TermPtr t = random_term(rng, 8, {});
    RelationSpace s(t, default_coding());
    // enumerate small bipositions over the term support plus a few
    // argument-track variants
    std::vector<Word> outers;
    for (const auto& w : support(t)) {
      outers.push_back(w);
      if (!w.empty() && w.back().collapse() == 2) {
        Word variant = w.drop_last().append_small(5);
        outers.push_back(variant);
      }
    }
    std::vector<Word> inners{Word(),           Word::of({1}),    Word::of({2}),
                             Word::of({1, 1}), Word::of({5, 1}), Word::of({3})};
    for (const auto& a : outers) {
      for (const auto& c : inners) {
        Biposition p = Biposition::at(a, c);
        if (p.size() > 8) continue;
        // brute-force closure under ascendance and polar inversion
        std::set<Biposition> cls{p};
        std::deque<Biposition> work{p};
        bool saw_bottom = false;
        while (!work.empty()) {
          Biposition cur = work.front();
          work.pop_front();
          bool hb = false;
          for (const auto& q : s.equiv_steps(cur, &hb)) {
            if (q.bottom) {
              saw_bottom = true;
              continue;
            }
            if (cls.insert(q).second) work.push_back(q);
          }
        }
        Biposition key = s.thread_key(p);
        if (saw_bottom) {
          CHECK(key.bottom);
          continue;
        }
        REQUIRE(!key.bottom);
        // the canonical key is a member of the closure, and every member
        // canonicalizes to it
        CHECK(cls.count(key));
        for (const auto& q : cls) CHECK(s.thread_key(q) == key);
        // the enumerated members are exactly the closure
        auto members = s.thread_members(key);
        std::set<Biposition> mset(members.begin(), members.end());
        CHECK(mset == cls);
      }
    }
  }
}

TEST_CASE("ascent only stacks 0/1 outer letters and 1-prefix inners") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 40; ++round) {
    TermPtr t = random_term(rng, 8, {});
    RelationSpace s(t, default_coding());
    for (const auto& a : support(t)) {
      Biposition p = Biposition::at(a, Word::of({1}));
      Biposition top = s.top_ascendant(p);
      REQUIRE(a.is_prefix_of(top.outer));
      for (std::size_t i = a.size(); i < top.outer.size(); ++i)
        CHECK(top.outer.letters[i].collapse() <= 1);
      // inners differ by a 1-prefix in one direction
      const Word& ci = p.inner;
      const Word& ct = top.inner;
      bool prefix_rel = false;
      if (ct.size() >= ci.size()) {
        prefix_rel = true;
        for (std::size_t i = 0; i + ci.size() < ct.size(); ++i)
          if (!(ct.letters[i] == Track(1))) prefix_rel = false;
      } else {
        prefix_rel = true;
        for (std::size_t i = 0; i + ct.size() < ci.size(); ++i)
          if (!(ci.letters[i] == Track(1))) prefix_rel = false;
      }
      CHECK(prefix_rel);
    }
  }
}

TEST_CASE("minimal closures of the micro-oracles") {
  // a free variable alone: just the root biposition
  {
    RelationSpace s = space_of("x");
    auto res = closure_bmin(s, {8, 1000});
    CHECK(!res.hit_bot);
    CHECK(res.frontier.empty());
    CHECK(res.bipositions == std::set<Biposition>{bp({}, {})});
  }
  // the identity
  {
    RelationSpace s = space_of("\\x. x");
    auto res = closure_bmin(s, {10, 10000});
    CHECK(!res.hit_bot);
    CHECK(res.frontier.empty());
    Track k = s.coding()->code(Word::of({0}));
    std::set<Biposition> expect{bp({}, {}), bp({}, {1}), bp({0}, {}),
                                Biposition::at(Word(), Word().append(k))};
    CHECK(res.bipositions == expect);
  }
  // an unused binder: the argument slot stays empty but no emptiness is
  // reached
  {
    RelationSpace s = space_of("\\x. y");
    auto res = closure_bmin(s, {10, 10000});
    CHECK(!res.hit_bot);
    CHECK(res.frontier.empty());
    std::set<Biposition> expect{bp({}, {}), bp({}, {1}), bp({0}, {})};
    CHECK(res.bipositions == expect);
  }
  // the auto-application diverges: bounded closure is cut, emptiness is
  // never reached
  {
    RelationSpace s(parse_term("(\\x. x x) (\\x. x x)"), default_coding());
    auto res = closure_bmin(s, {18, 60000});
    CHECK(!res.hit_bot);
    CHECK(!res.frontier.empty());
  }
}

TEST_CASE("synthesis from complete closures") {
  TypeArena arena;
  // identity: |- \x. x : (<0>.o) -> o
  {
    RelationSpace s = space_of("\\x. x");
    auto res = closure_bmin(s, {10, 10000});
    SDerivation d = synthesize_from_closure(s, res, arena);
    CHECK(check_sderiv(s.term(), d, arena, s.coding()).valid());
    auto j = judgment_at(s.term(), d, arena, Word());
    REQUIRE(j);
    const TypeNode& ty = arena.at(j->type);
    REQUIRE(ty.kind == TypeNode::Kind::SArrow);
    REQUIRE(ty.seq.entries.size() == 1);
    CHECK(ty.seq.entries[0].track == s.coding()->code(Word::of({0})));
    CHECK(type_equal(arena, ty.seq.entries[0].type, arena.atom("o")));
    CHECK(type_equal(arena, ty.target, arena.atom("o")));
    // the bisupport is exactly the closure
    auto bis = bisupport(s.term(), d, arena);
    std::set<Biposition> got;
    for (const auto& [p, label] : bis.labels) got.insert(p);
    CHECK(got == res.bipositions);
  }
  // a single variable: an axiom on the coded track of the root
  {
    RelationSpace s = space_of("x");
    auto res = closure_bmin(s, {8, 1000});
    SDerivation d = synthesize_from_closure(s, res, arena);
    CHECK(check_sderiv(s.term(), d, arena, s.coding()).valid());
    CHECK(d.at(d.root).kind == SNode::Kind::Ax);
    CHECK(d.at(d.root).ax_track == s.coding()->code(Word()));
  }
  // a head normal form of order 2 with a head variable of order 3
  {
    RelationSpace s = space_of("\\x1 x2. y u1 u2 u3");
    auto res = closure_bmin(s, {24, 100000});
    REQUIRE(!res.hit_bot);
    REQUIRE(res.frontier.empty());
    SDerivation d = synthesize_from_closure(s, res, arena);
    CHECK(check_sderiv(s.term(), d, arena, s.coding()).valid());
    auto j = judgment_at(s.term(), d, arena, Word());
    REQUIRE(j);
    CHECK(type_order(arena, j->type).n == 2);
    REQUIRE(j->ctx.count("y"));
    CHECK(type_order(arena, j->ctx.at("y").entries[0].type).n == 3);
  }
}

TEST_CASE("relation edges are sound for real derivations") {
  // For a synthesized coded derivation, every implemented edge stays
  // inside the bisupport.
  std::mt19937_64 rng(41);
  int rounds = 0;
  for (int i = 0; i < 60 && rounds < 12; ++i) {
    TermPtr t = random_term(rng, 6, {});
    RelationSpace s(t, default_coding());
    auto res = closure_bmin(s, {16, 40000});
    if (res.hit_bot || !res.frontier.empty()) continue;
    ++rounds;
    TypeArena arena;
    SDerivation d = synthesize_from_closure(s, res, arena);
    REQUIRE(check_sderiv(t, d, arena, s.coding()).valid());
    auto bis = bisupport(t, d, arena);
    std::set<Biposition> inside;
    for (const auto& [p, label] : bis.labels) inside.insert(p);
    for (const auto& p : inside) {
      bool hb = false;
      for (const auto& q : s.equiv_steps(p, &hb)) {
        CHECK(!q.bottom);
        if (!q.bottom) CHECK(inside.count(q));
      }
      for (const auto& st : s.forward_steps(p)) CHECK(inside.count(st.to));
    }
  }
  CHECK(rounds > 0);
}

TEST_CASE("uniqueness of consumption per polarity side") {
  std::mt19937_64 rng(59);
  for (int round = 0; round < 25; ++round) {
    TermPtr t = random_term(rng, 8, {});
    RelationSpace s(t, default_coding());
    auto res = closure_bmin(s, {12, 20000});
    // collect consumption edges at thread level
    std::map<std::pair<Biposition, int>, std::set<Biposition>> left, right;
    for (const auto& p : res.bipositions) {
      for (const auto& st : s.forward_steps(p)) {
        if (st.kind != RelationSpace::StepKind::Cons) continue;
        if (st.to.size() > res.bound.max_size) continue;
        Biposition kf = s.thread_key(p);
        Biposition kt = st.to.bottom ? Biposition::bot() : s.thread_key(st.to);
        if (kf.bottom) continue;
        int pol = s.polarity(p) == Polarity::Pos ? 0 : 1;
        left[{kf, pol}].insert(kt);
        int polt = st.to.bottom ? 1 : (s.polarity(st.to) == Polarity::Pos ? 0 : 1);
        right[{kt, polt}].insert(kf);
      }
    }
    for (const auto& [k, tgts] : left) CHECK(tgts.size() <= 1);
    for (const auto& [k, srcs] : right) CHECK(srcs.size() <= 1);
  }
}

TEST_CASE("the empty thread absorbs type formation and repels the rest") {
  std::mt19937_64 rng(71);
  for (int round = 0; round < 25; ++round) {
    TermPtr t = random_term(rng, 7, {});
    RelationSpace s(t, default_coding());
    for (const auto& a : support(t)) {
      std::vector<Word> inners{Word::of({900001}), Word::of({900001, 1}),
                               Word::of({1, 900001})};
      for (const auto& ci : inners) {
        Biposition p = Biposition::at(a, ci);
        Biposition key = s.thread_key(p);
        for (const auto& st : s.forward_steps(p)) {
          Biposition tkey = st.to.bottom ? Biposition::bot() : s.thread_key(st.to);
          if (tkey.bottom) {
            // type formation into emptiness only happens from within
            // emptiness; the arrow and tree demands never reach it
            // (consumption may, which is how chains end)
            if (st.kind == RelationSpace::StepKind::T1 ||
                st.kind == RelationSpace::StepKind::T2)
              CHECK(key.bottom);
            CHECK(st.kind != RelationSpace::StepKind::Abs);
            CHECK(st.kind != RelationSpace::StepKind::Down);
          }
        }
      }
    }
  }
}

TEST_CASE("chain absence on small terms and the wiring control") {
  // trivial: a bare variable has a one-biposition space
  {
    RelationSpace s = space_of("x");
    CHECK(!find_nihilating_chain(s, {6, 10, 50000}));
  }
  // the identity and the unused binder are typable: no chain
  {
    RelationSpace s = space_of("\\x. x");
    CHECK(!find_nihilating_chain(s, {8, 12, 50000}));
  }
  {
    RelationSpace s = space_of("\\x. y");
    CHECK(!find_nihilating_chain(s, {8, 12, 50000}));
    // the wiring control: reversing the type-formation demand must
    // manufacture a spurious chain within three links
    ChainSearchOptions opt;
    opt.t2_reversed = true;
    auto ch = find_nihilating_chain(s, {3, 12, 50000}, opt);
    REQUIRE(ch);
    CHECK(ch->links.size() <= 3);
    CHECK(ch->end_key().bottom);
  }
}

TEST_CASE("zero-term analysis") {
  ChainBound bound{8, 14, 60000};
  // already an abstraction: negative root, empty segment
  {
    RelationSpace s = space_of("\\x. y x");
    auto rep = zero_term_analysis(s, bound);
    CHECK(rep.certificate == ZeroTermReport::Certificate::NegativeRoot);
    CHECK(rep.head_segment.empty());
  }
  // one tower of height 1 at the root
  {
    RelationSpace s = space_of("(\\x. \\y. x) z");
    auto rep = zero_term_analysis(s, bound);
    CHECK(rep.certificate == ZeroTermReport::Certificate::NegativeRoot);
    CHECK(rep.head_segment.size() == 1);
    REQUIRE(rep.final_term);
    CHECK(rep.final_term->is_abs());
  }
  // the mute auto-application stays inconclusive
  {
    RelationSpace s = space_of("(\\x. x x) (\\x. x x)");
    auto rep = zero_term_analysis(s, ChainBound{6, 12, 30000});
    CHECK(rep.certificate == ZeroTermReport::Certificate::Inconclusive);
  }
  // a deeper tower sequence still ends in an abstraction
  {
    RelationSpace s = space_of("(\\x1. \\x2. (\\x3. \\x. \\w. u) s) w2 w1 v");
    auto rep = zero_term_analysis(s, ChainBound{8, 18, 60000});
    CHECK(rep.certificate == ZeroTermReport::Certificate::NegativeRoot);
    CHECK(rep.head_segment.size() == 4);
    REQUIRE(rep.final_term);
    CHECK(rep.final_term->is_abs());
  }
  // positive root: the applied identity still types with an arrow,
  // witnessed by a chain to thr(e, 1)
  {
    RelationSpace s = space_of("(\\x. x) (\\y. y)");
    auto rep = zero_term_analysis(s, bound);
    CHECK(rep.certificate == ZeroTermReport::Certificate::PositiveRoot);
    REQUIRE(rep.lambda_chain);
    CHECK(chain_well_formed(s, *rep.lambda_chain));
  }
}
