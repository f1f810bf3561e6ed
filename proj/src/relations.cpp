#include "infinitype/relations.hpp"

#include <deque>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace infinitype {

namespace {

bool is_small(const Track& t, std::uint64_t v) {
  return !t.is_big() && t.small_value() == v;
}

}  // namespace

RelationSpace::RelationSpace(TermPtr t, CodingPtr coding)
    : term_(std::move(t)), coding_(std::move(coding)) {}

namespace {

// Subterms along a position, root first; empty when out of support.
std::vector<TermPtr> subterm_chain(const TermPtr& t, const Word& a) {
  std::vector<TermPtr> chain;
  chain.reserve(a.size() + 1);
  TermPtr cur = t;
  chain.push_back(cur);
  for (const auto& letter : a.letters) {
    std::uint64_t k = letter.collapse();
    switch (cur->kind) {
      case Term::Kind::Var:
        return {};
      case Term::Kind::Abs:
        if (k != 0) return {};
        cur = cur->child;
        break;
      case Term::Kind::App:
        if (k == 1) cur = cur->fun;
        else if (k == 2) cur = cur->arg;
        else return {};
        break;
    }
    chain.push_back(cur);
  }
  return chain;
}

// Inner words ascend by gaining and spending a 1-prefix; keep the prefix
// as a counter over the unchanging remainder.
struct InnerView {
  std::size_t ones = 0;
  Word rest;  // does not start with a literal 1

  static InnerView of(const Word& inner) {
    InnerView v;
    std::size_t i = 0;
    while (i < inner.size() && !inner.letters[i].is_big() &&
           inner.letters[i].small_value() == 1)
      ++i;
    v.ones = i;
    v.rest.letters.assign(inner.letters.begin() + static_cast<std::ptrdiff_t>(i),
                          inner.letters.end());
    return v;
  }

  Word to_word() const {
    Word w;
    w.letters.reserve(ones + rest.size());
    for (std::size_t i = 0; i < ones; ++i) w.letters.emplace_back(std::uint64_t{1});
    w.letters.insert(w.letters.end(), rest.letters.begin(), rest.letters.end());
    return w;
  }
};

}  // namespace

std::optional<Word> RelationSpace::binder(const Word& a) const {
  auto chain = subterm_chain(term_, a);
  if (chain.empty() || !chain.back()->is_var()) return std::nullopt;
  const std::string& name = chain.back()->name;
  for (std::size_t i = chain.size() - 1; i-- > 0;)
    if (chain[i]->is_abs() && chain[i]->name == name) return a.prefix(i);
  return std::nullopt;
}

bool RelationSpace::track_in_lambda(const Word& lambda_pos, const Track& k) const {
  auto c = constructor_at(term_, lambda_pos);
  if (!c || *c != Constructor::Abs) return false;
  auto a0 = coding_->pos(k);
  if (!a0) return false;
  if (a0->size() <= lambda_pos.size()) return false;
  if (!lambda_pos.is_prefix_of(*a0)) return false;
  // First step below the abstraction is its body edge.
  if (!is_small(a0->letters[lambda_pos.size()], 0)) return false;
  auto b = binder(*a0);
  return b && *b == lambda_pos;
}

std::vector<Track> RelationSpace::lambda_tracks(const Word& lambda_pos,
                                                const std::vector<Track>& alphabet,
                                                std::size_t limit) const {
  std::vector<Track> out;
  auto c = constructor_at(term_, lambda_pos);
  if (!c || *c != Constructor::Abs) return out;
  // Enumerate occurrence candidates whose argument-track letters come
  // from the alphabet, breadth-first over the body.
  std::deque<Word> work;
  work.push_back(lambda_pos.append_small(0));
  while (!work.empty() && out.size() < limit) {
    Word cur = work.front();
    work.pop_front();
    auto cc = constructor_at(term_, cur);
    if (!cc) continue;
    switch (*cc) {
      case Constructor::Var: {
        auto b = binder(cur);
        if (b && *b == lambda_pos) out.push_back(coding_->code(cur));
        break;
      }
      case Constructor::Abs:
        work.push_back(cur.append_small(0));
        break;
      case Constructor::App:
        work.push_back(cur.append_small(1));
        for (const auto& k : alphabet)
          if (k.collapse() == 2) work.push_back(cur.append(k));
        break;
    }
  }
  return out;
}

std::optional<Biposition> RelationSpace::asc(const Biposition& p) const {
  if (p.bottom) return std::nullopt;
  auto c = constructor_at(term_, p.outer);
  if (!c) return std::nullopt;
  if (*c == Constructor::App) {
    Word inner;
    inner.letters.reserve(p.inner.size() + 1);
    inner.letters.emplace_back(std::uint64_t{1});
    inner.letters.insert(inner.letters.end(), p.inner.letters.begin(),
                         p.inner.letters.end());
    return Biposition::at(p.outer.append_small(1), std::move(inner));
  }
  if (*c == Constructor::Abs) {
    if (p.inner.empty() || !is_small(p.inner.front(), 1)) return std::nullopt;
    return Biposition::at(p.outer.append_small(0), p.inner.tail());
  }
  return std::nullopt;
}

std::optional<Biposition> RelationSpace::asc_inv(const Biposition& p) const {
  if (p.bottom || p.outer.empty()) return std::nullopt;
  const Track& last = p.outer.back();
  Word parent = p.outer.drop_last();
  auto c = constructor_at(term_, parent);
  if (!c) return std::nullopt;
  if (is_small(last, 1) && *c == Constructor::App) {
    if (p.inner.empty() || !is_small(p.inner.front(), 1)) return std::nullopt;
    return Biposition::at(std::move(parent), p.inner.tail());
  }
  if (is_small(last, 0) && *c == Constructor::Abs) {
    Word inner;
    inner.letters.reserve(p.inner.size() + 1);
    inner.letters.emplace_back(std::uint64_t{1});
    inner.letters.insert(inner.letters.end(), p.inner.letters.begin(),
                         p.inner.letters.end());
    return Biposition::at(std::move(parent), std::move(inner));
  }
  return std::nullopt;
}

std::optional<Biposition> RelationSpace::pi(const Biposition& p) const {
  if (p.bottom) return std::nullopt;
  auto c = constructor_at(term_, p.outer);
  if (!c || *c != Constructor::Abs) return std::nullopt;
  if (p.inner.empty() || p.inner.front().collapse() != 2) return std::nullopt;
  const Track& k = p.inner.front();
  if (track_in_lambda(p.outer, k))
    return Biposition::at(*coding_->pos(k), p.inner.tail());
  return Biposition::bot();
}

std::optional<Biposition> RelationSpace::pi_inv(const Biposition& p) const {
  if (p.bottom) return std::nullopt;
  auto c = constructor_at(term_, p.outer);
  if (!c || *c != Constructor::Var) return std::nullopt;
  auto b = binder(p.outer);
  if (!b) return std::nullopt;
  Word inner;
  inner.letters.reserve(p.inner.size() + 1);
  inner.letters.push_back(coding_->code(p.outer));
  inner.letters.insert(inner.letters.end(), p.inner.letters.begin(),
                       p.inner.letters.end());
  return Biposition::at(*b, std::move(inner));
}

namespace {

struct TopInfo {
  Word outer;
  InnerView inner;
  TermPtr sub;  // subterm at outer; null when out of support
};

// Walks the ascendants with O(1) work per step.
TopInfo top_info(const TermPtr& term, const Biposition& p) {
  TopInfo info;
  auto chain = subterm_chain(term, p.outer);
  if (chain.empty()) return TopInfo{p.outer, InnerView::of(p.inner), nullptr};
  info.outer = p.outer;
  info.inner = InnerView::of(p.inner);
  info.sub = chain.back();
  while (true) {
    if (info.sub->is_app()) {
      info.outer.letters.emplace_back(std::uint64_t{1});
      ++info.inner.ones;
      info.sub = info.sub->fun;
    } else if (info.sub->is_abs() && info.inner.ones > 0) {
      info.outer.letters.emplace_back(std::uint64_t{0});
      --info.inner.ones;
      info.sub = info.sub->child;
    } else {
      return info;
    }
  }
}

}  // namespace

Biposition RelationSpace::top_ascendant(const Biposition& p) const {
  if (p.bottom) return p;
  TopInfo info = top_info(term_, p);
  if (!info.sub) return p;
  return Biposition::at(info.outer, info.inner.to_word());
}

Polarity RelationSpace::polarity(const Biposition& p) const {
  if (p.bottom) return Polarity::Neg;
  TopInfo info = top_info(term_, p);
  if (info.sub && info.sub->is_var()) return Polarity::Pos;
  return Polarity::Neg;
}

Biposition RelationSpace::thread_key(const Biposition& p) const {
  if (p.bottom) return Biposition::bot();
  TopInfo info = top_info(term_, p);
  if (!info.sub) return Biposition::at(info.outer, info.inner.to_word());
  if (info.sub->is_abs() && info.inner.ones == 0 && !info.inner.rest.empty() &&
      info.inner.rest.front().collapse() == 2) {
    // Cross the polar inversion to the positive side (or to emptiness).
    const Track& k = info.inner.rest.front();
    if (track_in_lambda(info.outer, k))
      return Biposition::at(*coding_->pos(k), info.inner.rest.tail());
    return Biposition::bot();
  }
  return Biposition::at(info.outer, info.inner.to_word());
}

std::vector<Biposition> RelationSpace::thread_members(const Biposition& key) const {
  std::vector<Biposition> out;
  if (key.bottom) {
    out.push_back(key);
    return out;
  }
  auto descend = [&](const Biposition& from) {
    auto chain = subterm_chain(term_, from.outer);
    if (chain.empty()) {
      out.push_back(from);
      return;
    }
    Word outer = from.outer;
    InnerView inner = InnerView::of(from.inner);
    out.push_back(from);
    while (!outer.empty()) {
      const Track& last = outer.back();
      const TermPtr& parent = chain[outer.size() - 1];
      if (!last.is_big() && last.small_value() == 1 && parent->is_app()) {
        if (inner.ones == 0) break;
        --inner.ones;
      } else if (!last.is_big() && last.small_value() == 0 && parent->is_abs()) {
        ++inner.ones;
      } else {
        break;
      }
      outer.letters.pop_back();
      Biposition q;
      q.outer = outer;
      q.inner = inner.to_word();
      out.push_back(std::move(q));
    }
  };
  descend(key);
  // A key at a variable occurrence may also own a negative component
  // below the binding abstraction.
  auto chain = subterm_chain(term_, key.outer);
  if (!chain.empty() && chain.back()->is_var()) {
    auto neg = pi_inv(key);
    if (neg) descend(*neg);
  }
  return out;
}

std::vector<RelationSpace::Step> RelationSpace::forward_steps(const Biposition& p) const {
  std::vector<Step> out;
  if (p.bottom) return out;  // down-steps out of emptiness are never enumerated
  // Consumption: (a.1, k.c) -> (a.k, c) at an application.
  if (!p.outer.empty() && is_small(p.outer.back(), 1) && !p.inner.empty() &&
      p.inner.front().collapse() == 2) {
    Word parent = p.outer.drop_last();
    auto c = constructor_at(term_, parent);
    if (c && *c == Constructor::App)
      out.push_back(Step{StepKind::Cons,
                         Biposition::at(parent.append(p.inner.front()), p.inner.tail())});
  }
  // Reversed consumption: (a.k, c) -> (a.1, k.c).
  if (!p.outer.empty() && p.outer.back().collapse() == 2) {
    Word parent = p.outer.drop_last();
    auto c = constructor_at(term_, parent);
    if (c && *c == Constructor::App) {
      Word inner;
      inner.letters.reserve(p.inner.size() + 1);
      inner.letters.push_back(p.outer.back());
      inner.letters.insert(inner.letters.end(), p.inner.letters.begin(),
                           p.inner.letters.end());
      out.push_back(
          Step{StepKind::ConsInv, Biposition::at(parent.append_small(1), std::move(inner))});
    }
  }
  // Type formation: every position demands its parent, and an argument
  // child demands the sibling on track 1.
  if (!p.inner.empty()) {
    out.push_back(Step{StepKind::T1, Biposition::at(p.outer, p.inner.drop_last())});
    if (p.inner.back().collapse() == 2)
      out.push_back(Step{
          StepKind::T2,
          Biposition::at(p.outer, p.inner.drop_last().append_small(1))});
  }
  // An abstraction's type must be an arrow.
  if (p.inner.empty()) {
    auto c = constructor_at(term_, p.outer);
    if (c && *c == Constructor::Abs)
      out.push_back(Step{StepKind::Abs, Biposition::at(p.outer, Word::of({1}))});
  }
  // The support of a derivation is a tree: every position below a filled
  // one is filled.
  for (std::size_t len = 0; len <= p.outer.size(); ++len)
    out.push_back(Step{StepKind::Down, Biposition::at(p.outer.prefix(len), Word())});
  return out;
}

std::vector<Biposition> RelationSpace::equiv_steps(const Biposition& p,
                                                   bool* hits_bottom) const {
  std::vector<Biposition> out;
  if (p.bottom) return out;
  if (auto q = asc(p)) out.push_back(*q);
  if (auto q = asc_inv(p)) out.push_back(*q);
  if (auto q = pi(p)) {
    if (q->bottom && hits_bottom) *hits_bottom = true;
    out.push_back(*q);
  }
  if (auto q = pi_inv(p)) out.push_back(*q);
  return out;
}

const char* step_kind_str(RelationSpace::StepKind k) {
  switch (k) {
    case RelationSpace::StepKind::Cons: return "cons";
    case RelationSpace::StepKind::ConsInv: return "cons-rev";
    case RelationSpace::StepKind::T1: return "t1";
    case RelationSpace::StepKind::T2: return "t2";
    case RelationSpace::StepKind::Abs: return "abs";
    case RelationSpace::StepKind::Down: return "down";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Closure

ClosureResult closure_bmin(const RelationSpace& space, ClosureBound bound) {
  ClosureResult res;
  res.bound = bound;
  Biposition start = Biposition::at(Word(), Word());
  std::deque<Biposition> work;
  work.push_back(start);
  std::unordered_set<Biposition> seen{start};
  std::size_t processed = 0;
  while (!work.empty()) {
    if (processed++ > bound.max_nodes) {
      for (const auto& p : work) res.frontier.insert(p);
      break;
    }
    Biposition p = work.front();
    work.pop_front();
    if (p.bottom) {
      res.hit_bot = true;
      continue;  // never expand past emptiness
    }
    res.bipositions.insert(p);
    res.thread_keys.insert(space.thread_key(p));

    std::vector<Biposition> nexts;
    bool dummy = false;
    for (const auto& q : space.equiv_steps(p, &dummy)) nexts.push_back(q);
    for (const auto& s : space.forward_steps(p)) nexts.push_back(s.to);
    for (const auto& q : nexts) {
      if (!q.bottom && q.size() > bound.max_size) {
        res.frontier.insert(q);
        continue;
      }
      if (seen.insert(q).second) work.push_back(q);
    }
  }
  if (res.hit_bot) res.thread_keys.insert(Biposition::bot());
  return res;
}

SDerivation synthesize_from_closure(const RelationSpace& space, const ClosureResult& res,
                                    TypeArena& arena) {
  if (res.hit_bot)
    throw std::invalid_argument("closure reached the empty biposition");
  if (!res.frontier.empty())
    throw std::invalid_argument("closure was truncated by its bound");
  if (res.bipositions.empty()) throw std::invalid_argument("empty closure");

  // Group inner positions per outer position.
  std::map<Word, std::set<Word>> inners;
  for (const auto& p : res.bipositions) inners[p.outer].insert(p.inner);

  SDerivation deriv;
  std::function<int(const Word&, const TermPtr&)> build =
      [&](const Word& a, const TermPtr& sub) -> int {
    auto it = inners.find(a);
    if (it == inners.end())
      throw std::invalid_argument("closure misses position " + a.str());
    auto ty = decorate_candidate(arena, it->second);
    if (!ty)
      throw std::invalid_argument("inner positions at " + a.str() +
                                  " are not a type support");
    switch (sub->kind) {
      case Term::Kind::Var: {
        SNode ax;
        ax.kind = SNode::Kind::Ax;
        ax.var = sub->name;
        ax.ax_track = space.coding()->code(a);
        ax.ax_type = *ty;
        deriv.nodes.push_back(std::move(ax));
        return static_cast<int>(deriv.nodes.size() - 1);
      }
      case Term::Kind::Abs: {
        SNode abs;
        abs.kind = SNode::Kind::Abs;
        abs.var = sub->name;
        abs.child = build(a.append_small(0), sub->child);
        deriv.nodes.push_back(std::move(abs));
        return static_cast<int>(deriv.nodes.size() - 1);
      }
      case Term::Kind::App: {
        SNode app;
        app.kind = SNode::Kind::App;
        app.left = build(a.append_small(1), sub->fun);
        // Argument subderivations: the outer positions right below a on
        // argument tracks.
        std::vector<Track> arg_tracks;
        for (auto jt = inners.lower_bound(a); jt != inners.end(); ++jt) {
          if (!a.is_prefix_of(jt->first)) break;
          if (jt->first.size() != a.size() + 1) continue;
          const Track& k = jt->first.back();
          if (k.collapse() == 2) arg_tracks.push_back(k);
        }
        for (const auto& k : arg_tracks)
          app.args.emplace_back(k, build(a.append(k), sub->arg));
        deriv.nodes.push_back(std::move(app));
        return static_cast<int>(deriv.nodes.size() - 1);
      }
    }
    throw std::logic_error("unreachable");
  };
  deriv.root = build(Word(), space.term());
  return deriv;
}

// ---------------------------------------------------------------------------
// Chain search

namespace {

struct SearchState {
  std::unordered_map<Biposition, std::pair<Biposition, ChainLink>> parent;
  std::unordered_set<Biposition> visited;
};

Chain reconstruct(const SearchState& st, const Biposition& start, const Biposition& goal) {
  Chain ch;
  ch.start_key = start;
  std::vector<ChainLink> back;
  Biposition cur = goal;
  while (!(cur == start)) {
    auto it = st.parent.find(cur);
    if (it == st.parent.end()) break;
    back.push_back(it->second.second);
    cur = it->second.first;
  }
  ch.links.assign(back.rbegin(), back.rend());
  return ch;
}

std::optional<Chain> chain_bfs(const RelationSpace& space, const Biposition& goal_key,
                               ChainBound bound, ChainSearchOptions options) {
  Biposition start = space.thread_key(Biposition::at(Word(), Word()));
  if (start == goal_key) return Chain{start, {}};
  SearchState st;
  st.visited.insert(start);
  std::deque<std::pair<Biposition, std::size_t>> work;
  work.emplace_back(start, 0);
  std::size_t processed = 0;
  while (!work.empty()) {
    auto [key, depth] = work.front();
    work.pop_front();
    if (depth >= bound.max_len) continue;
    if (processed++ > bound.max_nodes) return std::nullopt;

    for (const auto& member : space.thread_members(key)) {
      if (member.size() > bound.max_size) continue;
      std::vector<RelationSpace::Step> steps = space.forward_steps(member);
      if (options.t2_reversed && !member.inner.empty() &&
          is_small(member.inner.back(), 1)) {
        // Deliberately wrong orientation of the type-formation demand,
        // kept as a wiring control.
        for (std::uint64_t k : {2, 3})
          steps.push_back(
              {RelationSpace::StepKind::T2,
               Biposition::at(member.outer, member.inner.drop_last().append_small(k))});
      }
      for (const auto& s : steps) {
        const Biposition& q = s.to;
        if (!q.bottom && q.size() > bound.max_size) continue;
        Biposition qkey = q.bottom ? Biposition::bot() : space.thread_key(q);
        if (st.visited.count(qkey)) continue;
        st.visited.insert(qkey);
        ChainLink link;
        link.from_key = key;
        link.to_key = qkey;
        link.kind = s.kind;
        link.witness_src = member;
        link.witness_tgt = q;
        link.pol_src = space.polarity(member);
        link.pol_tgt = q.bottom ? Polarity::Neg : space.polarity(q);
        st.parent[qkey] = {key, link};
        if (qkey == goal_key) return reconstruct(st, start, qkey);
        work.emplace_back(qkey, depth + 1);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Chain> find_nihilating_chain(const RelationSpace& space, ChainBound bound,
                                           ChainSearchOptions options) {
  return chain_bfs(space, Biposition::bot(), bound, options);
}

std::optional<Chain> find_lambda_chain(const RelationSpace& space, ChainBound bound) {
  Biposition goal = space.thread_key(Biposition::at(Word(), Word::of({1})));
  return chain_bfs(space, goal, bound, {});
}

bool chain_well_formed(const RelationSpace& space, const Chain& ch) {
  Biposition cur = ch.start_key;
  for (const auto& link : ch.links) {
    if (!(link.from_key == cur)) return false;
    // The witnesses must inhabit the endpoint threads.
    if (!(space.thread_key(link.witness_src) == link.from_key)) return false;
    Biposition tkey =
        link.witness_tgt.bottom ? Biposition::bot() : space.thread_key(link.witness_tgt);
    if (!(tkey == link.to_key)) return false;
    // And the step must be a real relation edge.
    bool found = false;
    for (const auto& s : space.forward_steps(link.witness_src))
      if (s.kind == link.kind && s.to == link.witness_tgt) found = true;
    if (!found) return false;
    cur = link.to_key;
  }
  return true;
}

bool chain_is_nihilating(const RelationSpace& space, const Chain& ch) {
  if (!chain_well_formed(space, ch)) return false;
  Biposition root = space.thread_key(Biposition::at(Word(), Word()));
  return ch.start_key == root && ch.end_key().bottom;
}

// ---------------------------------------------------------------------------
// Zero-term analysis

ZeroTermReport zero_term_analysis(const RelationSpace& space, ChainBound bound) {
  ZeroTermReport rep;
  Biposition root = Biposition::at(Word(), Word());
  if (space.polarity(root) == Polarity::Neg) {
    // The root thread tops out at an abstraction: collapsing the root
    // tower sequence is a finite head-reduction segment ending in an
    // abstraction.
    rep.certificate = ZeroTermReport::Certificate::NegativeRoot;
    TermPtr cur = space.term();
    std::size_t cap = term_size(cur) + 8;
    for (std::size_t i = 0; i < cap && !cur->is_abs(); ++i) {
      auto r = leftmost_outermost_redex(cur);
      if (!r) break;
      rep.head_segment.push_back(*r);
      cur = beta_reduce_at(cur, *r);
    }
    rep.final_term = cur;
    if (!cur->is_abs())
      rep.certificate = ZeroTermReport::Certificate::Inconclusive;  // cap breached
    return rep;
  }
  if (auto ch = find_lambda_chain(space, bound)) {
    rep.certificate = ZeroTermReport::Certificate::PositiveRoot;
    rep.lambda_chain = ch;
    return rep;
  }
  rep.certificate = ZeroTermReport::Certificate::Inconclusive;
  return rep;
}

}  // namespace infinitype
