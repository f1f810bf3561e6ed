#include "infinitype/chain.hpp"

#include <algorithm>
#include <stdexcept>

namespace infinitype {

namespace {

// The left-consumed biposition of a consumption link, whatever its
// orientation in the chain.
const Biposition& left_consumed(const ChainLink& link) {
  return link.kind == RelationSpace::StepKind::Cons ? link.witness_src : link.witness_tgt;
}

Polarity left_polarity(const ChainLink& link) {
  return link.kind == RelationSpace::StepKind::Cons ? link.pol_src : link.pol_tgt;
}

bool is_consumption(const ChainLink& link) {
  return link.kind == RelationSpace::StepKind::Cons ||
         link.kind == RelationSpace::StepKind::ConsInv;
}

bool is_formation(const ChainLink& link) {
  return link.kind == RelationSpace::StepKind::T1 ||
         link.kind == RelationSpace::StepKind::T2;
}

}  // namespace

bool chain_is_normal(const Chain& ch) {
  for (const auto& link : ch.links)
    if (is_consumption(link) && left_polarity(link) == Polarity::Neg) return false;
  return true;
}

bool thread_edge_exists(const RelationSpace& space, const Biposition& key1,
                        RelationSpace::StepKind kind, const Biposition& key2,
                        std::size_t max_size) {
  for (const auto& member : space.thread_members(key1)) {
    if (member.size() > max_size) continue;
    for (const auto& s : space.forward_steps(member)) {
      if (s.kind != kind) continue;
      Biposition tk = s.to.bottom ? Biposition::bot() : space.thread_key(s.to);
      if (tk == key2) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Interaction rewriting

namespace {

// Slides a positive consumption leftwards past a type-formation link.
// The dropped (or replaced) trailing letter of the formation step is
// reattached over the consumption witnesses.
std::optional<std::pair<ChainLink, ChainLink>> exchange_formation_consumption(
    const RelationSpace& space, const ChainLink& tf, const ChainLink& cons) {
  if (tf.witness_src.inner.empty()) return std::nullopt;
  Track dropped = tf.witness_src.inner.back();

  const Biposition& cs = cons.witness_src;
  const Biposition& ct = cons.witness_tgt;
  Word cs_inner = cs.inner;
  Word ct_inner = ct.inner;
  if (tf.kind == RelationSpace::StepKind::T2) {
    // The formation step replaced the trailing argument letter with 1;
    // the consumption witnesses end in that 1.
    if (cs_inner.empty() || ct_inner.empty()) return std::nullopt;
    cs_inner = cs_inner.drop_last();
    ct_inner = ct_inner.drop_last();
  }
  Biposition new_cs = Biposition::at(cs.outer, cs_inner.append(dropped));
  Biposition new_ct = Biposition::at(ct.outer, ct_inner.append(dropped));

  ChainLink first;
  first.kind = RelationSpace::StepKind::Cons;
  first.witness_src = new_cs;
  first.witness_tgt = new_ct;
  first.from_key = space.thread_key(new_cs);
  first.to_key = space.thread_key(new_ct);
  first.pol_src = space.polarity(new_cs);
  first.pol_tgt = space.polarity(new_ct);

  ChainLink second;
  second.kind = tf.kind;
  second.witness_src = new_ct;
  second.witness_tgt = ct;
  second.from_key = first.to_key;
  second.to_key = space.thread_key(ct);
  second.pol_src = first.pol_tgt;
  second.pol_tgt = space.polarity(ct);
  return std::make_pair(first, second);
}

}  // namespace

CanonicalResult rewrite_to_canonical(const RelationSpace& space, const Chain& input) {
  if (!chain_is_normal(input))
    throw std::invalid_argument("rewrite requires a normal chain");

  std::vector<ChainLink> links = input.links;
  std::size_t cap = 16 * (links.size() + 2) * (links.size() + 2);

  for (std::size_t round = 0; round < cap; ++round) {
    bool changed = false;

    // Cancellation: a thread left-consumed positively has a unique
    // partner, so walking out of it and straight back collapses.
    for (std::size_t i = 0; i + 1 < links.size() && !changed; ++i) {
      if (links[i].kind == RelationSpace::StepKind::ConsInv &&
          left_polarity(links[i]) == Polarity::Pos &&
          links[i + 1].kind == RelationSpace::StepKind::Cons &&
          left_polarity(links[i + 1]) == Polarity::Pos) {
        if (!(links[i].from_key == links[i + 1].to_key))
          return Impossibility{"uniqueness", i,
                               "positive consumption with two distinct partners"};
        links.erase(links.begin() + static_cast<std::ptrdiff_t>(i),
                    links.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        changed = true;
      }
    }
    if (changed) continue;

    // Exchange: type formation commutes past a following positive
    // consumption.
    for (std::size_t i = 0; i + 1 < links.size() && !changed; ++i) {
      if (is_formation(links[i]) &&
          links[i + 1].kind == RelationSpace::StepKind::Cons &&
          left_polarity(links[i + 1]) == Polarity::Pos) {
        auto ex = exchange_formation_consumption(space, links[i], links[i + 1]);
        if (!ex || !(ex->first.from_key == links[i].from_key) ||
            !(ex->second.to_key == links[i + 1].to_key))
          return Impossibility{"exchange", i, "exchanged witnesses left their threads"};
        links[i] = ex->first;
        links[i + 1] = ex->second;
        changed = true;
      }
    }
    if (changed) continue;

    // The arrow and tree demands can never face a positive consumption.
    for (std::size_t i = 0; i + 1 < links.size(); ++i) {
      bool ad = links[i].kind == RelationSpace::StepKind::Abs ||
                links[i].kind == RelationSpace::StepKind::Down;
      if (ad && links[i + 1].kind == RelationSpace::StepKind::Cons &&
          left_polarity(links[i + 1]) == Polarity::Pos)
        return Impossibility{"elimination", i,
                             "arrow/tree demand in front of a positive consumption"};
    }

    // Trailing links into the empty thread.
    if (!links.empty() && links.back().to_key.bottom) {
      const ChainLink& last = links.back();
      if (is_formation(last)) {
        if (!last.from_key.bottom)
          return Impossibility{"emptiness", links.size() - 1,
                               "type formation into emptiness from a live thread"};
        links.pop_back();
        changed = true;
      } else if (last.kind == RelationSpace::StepKind::Abs ||
                 last.kind == RelationSpace::StepKind::Down) {
        return Impossibility{"emptiness", links.size() - 1,
                             "arrow/tree demand cannot reach emptiness"};
      }
    }
    if (changed) continue;

    break;
  }

  // Drop stuttering links connecting a thread to itself, then re-chain.
  links.erase(std::remove_if(links.begin(), links.end(),
                             [](const ChainLink& l) { return l.from_key == l.to_key; }),
              links.end());
  Chain out;
  out.start_key = input.start_key;
  out.links = std::move(links);
  Biposition cur = out.start_key;
  for (auto& l : out.links) {
    l.from_key = cur;
    cur = l.to_key;
  }

  bool all_cons = !out.links.empty();
  for (const auto& l : out.links)
    if (l.kind != RelationSpace::StepKind::Cons || left_polarity(l) != Polarity::Pos)
      all_cons = false;
  Biposition root = space.thread_key(Biposition::at(Word(), Word()));
  if (all_cons && out.start_key == root) {
    // A positive consumption out of the root thread would need an
    // argument track in its inner words, which the ascent shape forbids.
    return Impossibility{"root-consumption", 0,
                         "no positive consumption leaves the root thread"};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residuation of chains

std::shared_ptr<const ResidualMap> coding_residual_map(const RelationSpace& space,
                                                       const Word& b) {
  const TermPtr& t = space.term();
  CodingPtr coding = space.coding();
  auto sub = subterm_at(t, b);
  if (!sub || !(*sub)->is_app() || !(*sub)->fun->is_abs())
    throw std::invalid_argument("not a redex: " + b.str());
  TermPtr term = t;
  // Relocation through the coding: track k lands at the bound-variable
  // occurrence pos(k), taken relative to the body root of the copy.
  RelocationFn relocate = [term, coding](const Word& a,
                                         const Track& k) -> std::optional<Word> {
    RelationSpace local(term, coding);
    Word lambda_pos = a.append_small(1);
    if (!local.track_in_lambda(lambda_pos, k)) return std::nullopt;
    Word a0 = *coding->pos(k);
    Word delta;
    delta.letters.assign(a0.letters.begin() + static_cast<std::ptrdiff_t>(a.size()) + 2,
                         a0.letters.end());
    return delta;
  };
  return std::make_shared<ResidualMap>(t, b, std::move(relocate));
}

ChainResiduation residuate_chain(const RelationSpace& space, const Chain& ch, const Word& b) {
  auto map = coding_residual_map(space, b);
  ChainResiduation out;
  out.term = beta_reduce_at(space.term(), b);
  out.coding = std::make_shared<ResiduatedCoding>(space.coding(), map);
  RelationSpace next(out.term, out.coding);

  Biposition start_member =
      ch.links.empty() ? ch.start_key : ch.links.front().witness_src;
  if (ch.start_key.bottom) {
    out.chain.start_key = Biposition::bot();
  } else {
    Biposition q = map->qres_bip(start_member);
    out.chain.start_key = q.bottom ? Biposition::bot() : next.thread_key(q);
  }

  Biposition cur = out.chain.start_key;
  for (const auto& link : ch.links) {
    if (cur.bottom) break;  // the chain already arrived at emptiness
    Biposition q1 = link.witness_src.bottom ? Biposition::bot()
                                            : map->qres_bip(link.witness_src);
    Biposition q2 = link.witness_tgt.bottom ? Biposition::bot()
                                            : map->qres_bip(link.witness_tgt);
    Biposition k1 = q1.bottom ? Biposition::bot() : next.thread_key(q1);
    Biposition k2 = q2.bottom ? Biposition::bot() : next.thread_key(q2);
    if (k1 == k2) continue;  // the link collapsed to an equality
    ChainLink nl;
    nl.kind = link.kind;
    nl.witness_src = q1;
    nl.witness_tgt = q2;
    nl.from_key = cur;
    nl.to_key = k2;
    // A type-formation step that crossed the destroyed abstraction turns
    // into a tree demand.
    if (link.kind == RelationSpace::StepKind::T2 && !q1.bottom) {
      bool still_t2 = false;
      for (const auto& s : next.forward_steps(q1))
        if (s.kind == RelationSpace::StepKind::T2 && s.to == q2) still_t2 = true;
      if (!still_t2) nl.kind = RelationSpace::StepKind::Down;
    }
    nl.pol_src = q1.bottom ? Polarity::Neg : next.polarity(q1);
    nl.pol_tgt = q2.bottom ? Polarity::Neg : next.polarity(q2);
    out.chain.links.push_back(nl);
    cur = k2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The collapsing strategy

std::size_t consumption_height(const RelationSpace& space, const Biposition& witness_src) {
  if (witness_src.outer.empty())
    throw std::invalid_argument("consumption witness has no application below");
  Biposition top = space.top_ascendant(witness_src);
  return top.outer.size() - (witness_src.outer.size() - 1);
}

StrategyTrace collapsing_strategy(const RelationSpace& space, const Chain& input) {
  StrategyTrace trace;
  TermPtr term = space.term();
  CodingPtr coding = space.coding();
  Chain chain = input;

  std::size_t guard = 0;
  while (true) {
    if (++guard > 10000) throw std::logic_error("collapsing strategy did not terminate");
    RelationSpace cur(term, coding);
    // The negative left-consumption with the shortest outer witness.
    std::optional<std::size_t> target;
    for (std::size_t i = 0; i < chain.links.size(); ++i) {
      const ChainLink& l = chain.links[i];
      if (!is_consumption(l) || left_polarity(l) != Polarity::Neg) continue;
      if (!target ||
          left_consumed(l).outer.size() < left_consumed(chain.links[*target]).outer.size())
        target = i;
    }
    if (!target) break;

    const Biposition lc = left_consumed(chain.links[*target]);
    std::size_t h = consumption_height(cur, lc);
    Word b;
    if (h == 1) {
      b = lc.outer.drop_last().collapse();
    } else {
      // Ascend the spine between the application and the abstraction and
      // fire the innermost application found there.
      std::vector<Word> nodes{lc.outer};
      Biposition walk = lc;
      for (std::size_t i = 1; i + 1 < h; ++i) {
        auto up = cur.asc(walk);
        if (!up) break;
        walk = *up;
        nodes.push_back(walk.outer);
      }
      std::optional<Word> fire;
      for (std::size_t i = nodes.size(); i-- > 0;) {
        auto c = constructor_at(term, nodes[i]);
        if (c && *c == Constructor::App) {
          fire = nodes[i];
          break;
        }
      }
      if (!fire) throw std::logic_error("tower walk found no application");
      b = fire->collapse();
    }

    ChainResiduation res = residuate_chain(cur, chain, b);
    StrategyStep step;
    step.fired = b;
    step.height_before = h;
    step.term_after = res.term;
    step.chain_after = res.chain;
    trace.steps.push_back(std::move(step));
    term = res.term;
    coding = res.coding;
    chain = trace.steps.back().chain_after;
    ++trace.beta_steps;
  }

  trace.final_term = term;
  trace.final_coding = coding;
  trace.final_chain = chain;
  return trace;
}

}  // namespace infinitype
