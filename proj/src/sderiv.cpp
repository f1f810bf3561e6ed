#include "infinitype/sderiv.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace infinitype {

namespace {

void violation(CheckReport& rep, const Word& pos, std::string msg) {
  rep.violations.push_back(Violation{pos, std::move(msg)});
}

std::variant<SContext, TrackConflict> ctx_union(const SContext& a, const SContext& b,
                                                std::string* clash_var) {
  SContext out = a;
  for (const auto& [var, seq] : b) {
    auto it = out.find(var);
    if (it == out.end()) {
      out[var] = seq;
      continue;
    }
    auto u = seq_union(it->second, seq);
    if (std::holds_alternative<TrackConflict>(u)) {
      if (clash_var) *clash_var = var;
      return std::get<TrackConflict>(u);
    }
    it->second = std::get<SeqType>(u);
  }
  return out;
}

}  // namespace

SDerivAnalysis analyze_sderiv(const TermPtr& t, const SDerivation& p, TypeArena& arena,
                              const CodingPtr& coding) {
  SDerivAnalysis an;
  an.judgment.assign(p.nodes.size(), SJudgment{});
  an.node_position.assign(p.nodes.size(), Word());
  if (p.root < 0 || static_cast<std::size_t>(p.root) >= p.nodes.size()) {
    violation(an.report, Word(), "missing root node");
    return an;
  }

  std::function<void(int, const Word&, const TermPtr&)> go =
      [&](int idx, const Word& pos, const TermPtr& sub) {
        const SNode& n = p.at(idx);
        an.position_of[pos] = idx;
        an.node_position[static_cast<std::size_t>(idx)] = pos;
        SJudgment& j = an.judgment[static_cast<std::size_t>(idx)];
        switch (n.kind) {
          case SNode::Kind::Ax: {
            if (!sub->is_var()) {
              violation(an.report, pos, "axiom over a non-variable subterm");
              return;
            }
            if (n.var != sub->name)
              violation(an.report, pos, "axiom variable mismatch: " + n.var);
            if (n.ax_track.collapse() < 2)
              violation(an.report, pos, "axiom track must be >= 2");
            if (coding) {
              Track expect = coding->code(pos);
              if (!(expect == n.ax_track))
                violation(an.report, pos,
                          "axiom track " + n.ax_track.str() + " differs from code " +
                              expect.str());
            }
            if (n.ax_type == kNoType) {
              violation(an.report, pos, "axiom missing its type");
              return;
            }
            SeqType single;
            single.entries.push_back(SeqEntry{n.ax_track, n.ax_type});
            j.ctx[sub->name] = std::move(single);
            j.type = n.ax_type;
            return;
          }
          case SNode::Kind::Abs: {
            if (!sub->is_abs()) {
              violation(an.report, pos, "abstraction node over a non-abstraction");
              return;
            }
            if (!n.var.empty() && n.var != sub->name)
              violation(an.report, pos, "binder mismatch: " + n.var);
            if (n.child < 0) {
              violation(an.report, pos, "abstraction missing premise");
              return;
            }
            go(n.child, pos.append_small(0), sub->child);
            const SJudgment& pj = an.judgment[static_cast<std::size_t>(n.child)];
            if (pj.type == kNoType) return;
            SeqType source;
            SContext ctx = pj.ctx;
            auto it = ctx.find(sub->name);
            if (it != ctx.end()) {
              source = it->second;
              ctx.erase(it);
            }
            j.ctx = std::move(ctx);
            j.type = arena.sarrow(std::move(source), pj.type);
            return;
          }
          case SNode::Kind::App: {
            if (!sub->is_app()) {
              violation(an.report, pos, "application node over a non-application");
              return;
            }
            if (n.left < 0) {
              violation(an.report, pos, "application missing left premise");
              return;
            }
            go(n.left, pos.append_small(1), sub->fun);
            std::map<Track, int> seen_tracks;
            for (const auto& [track, arg] : n.args) {
              if (track.collapse() < 2) {
                violation(an.report, pos, "argument track must be >= 2");
                continue;
              }
              if (seen_tracks.count(track)) {
                violation(an.report, pos, "argument track clash on " + track.str());
                continue;
              }
              seen_tracks[track] = arg;
              go(arg, pos.append(track), sub->arg);
            }
            const SJudgment& lj = an.judgment[static_cast<std::size_t>(n.left)];
            if (lj.type == kNoType) return;
            const TypeNode& lt = arena.at(lj.type);
            if (lt.kind != TypeNode::Kind::SArrow) {
              violation(an.report, pos, "left premise not typed with an arrow");
              return;
            }
            // The arrow source's root tracks must be exactly the argument
            // tracks; finite families are expanded, infinite ones cannot
            // be met by a finite rule instance.
            std::map<Track, TypeId> expected;
            bool bad = false;
            for (const auto& e : lt.seq.entries) expected[e.track] = e.type;
            for (const auto& f : lt.seq.families) {
              if (f.tracks.infinite()) {
                violation(an.report, pos,
                          "arrow source has infinitely many tracks; not applicable");
                bad = true;
                break;
              }
              for (const auto& tr : f.tracks.finite) expected[tr] = f.type;
            }
            if (bad) return;
            for (const auto& [track, ty] : expected) {
              auto it = seen_tracks.find(track);
              if (it == seen_tracks.end()) {
                violation(an.report, pos, "missing argument on track " + track.str());
                continue;
              }
              const SJudgment& aj = an.judgment[static_cast<std::size_t>(it->second)];
              if (aj.type == kNoType) continue;
              if (!type_equal(arena, aj.type, ty))
                violation(an.report, pos,
                          "argument type mismatch on track " + track.str());
            }
            for (const auto& [track, arg] : seen_tracks) {
              (void)arg;
              if (!expected.count(track))
                violation(an.report, pos,
                          "argument on track " + track.str() + " absent from the arrow source");
            }
            // Context union over all premises.
            SContext ctx = lj.ctx;
            for (const auto& [track, arg] : seen_tracks) {
              (void)track;
              std::string clash;
              auto u = ctx_union(ctx, an.judgment[static_cast<std::size_t>(arg)].ctx, &clash);
              if (std::holds_alternative<TrackConflict>(u)) {
                violation(an.report, pos, "track conflict in context on " + clash);
                return;
              }
              ctx = std::get<SContext>(u);
            }
            j.ctx = std::move(ctx);
            j.type = lt.target;
            return;
          }
        }
      };

  go(p.root, Word(), t);
  return an;
}

CheckReport check_sderiv(const TermPtr& t, const SDerivation& p, TypeArena& arena,
                         const CodingPtr& coding) {
  return analyze_sderiv(t, p, arena, coding).report;
}

std::set<Word> sderiv_support(const SDerivation& p) {
  std::set<Word> out;
  if (p.root < 0) return out;
  std::function<void(int, const Word&)> go = [&](int idx, const Word& pos) {
    out.insert(pos);
    const SNode& n = p.at(idx);
    if (n.kind == SNode::Kind::Abs && n.child >= 0) go(n.child, pos.append_small(0));
    if (n.kind == SNode::Kind::App) {
      if (n.left >= 0) go(n.left, pos.append_small(1));
      for (const auto& [track, arg] : n.args) go(arg, pos.append(track));
    }
  };
  go(p.root, Word());
  return out;
}

std::optional<SJudgment> judgment_at(const TermPtr& t, const SDerivation& p,
                                     TypeArena& arena, const Word& a) {
  SDerivAnalysis an = analyze_sderiv(t, p, arena);
  auto it = an.position_of.find(a);
  if (it == an.position_of.end()) return std::nullopt;
  return an.judgment[static_cast<std::size_t>(it->second)];
}

namespace {

void type_positions(const TypeArena& arena, TypeId id, const Word& here,
                    std::size_t depth_left, std::map<Word, BipLabel>& out,
                    bool& truncated) {
  const TypeNode& n = arena.at(id);
  BipLabel label;
  if (n.kind == TypeNode::Kind::Atom) {
    label.atom = n.atom;
  } else {
    label.arrow = true;
  }
  out[here] = label;
  if (n.kind == TypeNode::Kind::Atom) return;
  if (depth_left == 0) {
    truncated = true;
    return;
  }
  if (n.kind == TypeNode::Kind::SArrow) {
    for (const auto& e : n.seq.entries)
      type_positions(arena, e.type, here.append(e.track), depth_left - 1, out, truncated);
    for (const auto& f : n.seq.families) {
      if (f.tracks.infinite()) truncated = true;
      for (const auto& tr : f.tracks.enumerate(4))
        type_positions(arena, f.type, here.append(tr), depth_left - 1, out, truncated);
    }
    type_positions(arena, n.target, here.append_small(1), depth_left - 1, out, truncated);
  } else {
    for (const auto& e : n.mset)
      type_positions(arena, e.type, here.append_small(2), depth_left - 1, out, truncated);
    type_positions(arena, n.target, here.append_small(1), depth_left - 1, out, truncated);
  }
}

}  // namespace

BisupportResult bisupport(const TermPtr& t, const SDerivation& p, TypeArena& arena,
                          std::size_t max_inner_depth) {
  BisupportResult res;
  SDerivAnalysis an = analyze_sderiv(t, p, arena);
  for (const auto& [pos, idx] : an.position_of) {
    const SJudgment& j = an.judgment[static_cast<std::size_t>(idx)];
    if (j.type == kNoType) continue;
    std::map<Word, BipLabel> inner;
    type_positions(arena, j.type, Word(), max_inner_depth, inner, res.truncated);
    for (auto& [c, label] : inner)
      res.labels[Biposition::at(pos, c)] = label;
  }
  return res;
}

namespace {

// Locates the derivation node at position a together with its subterm.
struct Located {
  int node = -1;
  TermPtr sub;
};

std::optional<Located> locate(const TermPtr& t, const SDerivation& p, const Word& a) {
  if (p.root < 0) return std::nullopt;
  int idx = p.root;
  TermPtr sub = t;
  for (const auto& letter : a.letters) {
    const SNode& n = p.at(idx);
    std::uint64_t k = letter.collapse();
    if (n.kind == SNode::Kind::Abs && k == 0 && !letter.is_big() &&
        letter.small_value() == 0) {
      idx = n.child;
      sub = sub->child;
    } else if (n.kind == SNode::Kind::App && !letter.is_big() && letter.small_value() == 1) {
      idx = n.left;
      sub = sub->fun;
    } else if (n.kind == SNode::Kind::App && k == 2) {
      int next = -1;
      for (const auto& [track, child] : n.args)
        if (track == letter) next = child;
      if (next < 0) return std::nullopt;
      idx = next;
      sub = sub->arg;
    } else {
      return std::nullopt;
    }
    if (idx < 0) return std::nullopt;
  }
  return Located{idx, sub};
}

}  // namespace

std::set<Word> axiom_positions(const TermPtr& t, const SDerivation& p, const Word& a,
                               const std::string& x) {
  std::set<Word> out;
  auto loc = locate(t, p, a);
  if (!loc) return out;
  // Collect axioms typing x above a that are not rebound by an
  // abstraction of x met on the way (the abstraction at a itself counts).
  std::function<void(int, const TermPtr&, const Word&)> go =
      [&](int idx, const TermPtr& sub, const Word& pos) {
        const SNode& n = p.at(idx);
        switch (n.kind) {
          case SNode::Kind::Ax:
            if (sub->is_var() && sub->name == x) out.insert(pos);
            return;
          case SNode::Kind::Abs:
            if (sub->name == x) return;  // rebound below here
            if (n.child >= 0) go(n.child, sub->child, pos.append_small(0));
            return;
          case SNode::Kind::App:
            if (n.left >= 0) go(n.left, sub->fun, pos.append_small(1));
            for (const auto& [track, arg] : n.args) go(arg, sub->arg, pos.append(track));
            return;
        }
      };
  if (loc->sub->is_abs() && loc->sub->name == x) return out;
  go(loc->node, loc->sub, a);
  return out;
}

// ---------------------------------------------------------------------------
// Residuation

ResidualMap::ResidualMap(TermPtr source_term, Word redex, RelocationFn relocate)
    : term_(std::move(source_term)), redex_(std::move(redex)), relocate_(std::move(relocate)) {
  auto sub = subterm_at(term_, redex_);
  assert(sub && (*sub)->is_app() && (*sub)->fun->is_abs());
  binder_ = (*sub)->fun->name;
}

std::optional<std::pair<Word, Word>> ResidualMap::split(const Word& a) const {
  if (a.size() < redex_.size()) return std::nullopt;
  Word head = a.prefix(redex_.size());
  if (!(head.collapse() == redex_)) return std::nullopt;
  Word rest;
  rest.letters.assign(a.letters.begin() + static_cast<std::ptrdiff_t>(redex_.size()),
                      a.letters.end());
  return std::make_pair(head, rest);
}

bool ResidualMap::is_bound_occurrence(const Word& copy, const Word& beta) const {
  (void)copy;
  auto redex_sub = subterm_at(term_, redex_);
  if (!redex_sub) return false;
  TermPtr body = (*redex_sub)->fun->child;
  // Walk the collapsed path; any abstraction of the binder on the way
  // (strictly above the endpoint) rebinds.
  TermPtr cur = body;
  for (const auto& letter : beta.letters) {
    if (cur->is_abs() && cur->name == binder_) return false;
    std::uint64_t k = letter.collapse();
    if (cur->is_abs() && k == 0) cur = cur->child;
    else if (cur->is_app() && k == 1) cur = cur->fun;
    else if (cur->is_app() && k == 2) cur = cur->arg;
    else return false;
  }
  return cur->is_var() && cur->name == binder_;
}

std::optional<Word> ResidualMap::res_pos(const Word& a) const {
  auto sp = split(a);
  if (!sp) return a;  // out of the redex
  const auto& [copy, rest] = *sp;
  if (rest.empty()) return std::nullopt;  // the redex root is destroyed
  std::uint64_t first = rest.front().is_big() ? 2 : rest.front().small_value();
  if (first == 1) {
    if (rest.size() == 1) return std::nullopt;  // the abstraction is destroyed
    // rest = 1 . 0 . beta, inside the body
    Word beta;
    beta.letters.assign(rest.letters.begin() + 2, rest.letters.end());
    if (is_bound_occurrence(copy, beta)) return std::nullopt;  // variable destroyed
    return copy.concat(beta);
  }
  // Argument copy on track k.
  const Track& k = rest.front();
  auto ak = relocate_(copy, k);
  if (!ak) return std::nullopt;  // nihilated argument
  Word beta = rest.tail();
  return copy.concat(*ak).concat(beta);
}

std::optional<Biposition> ResidualMap::res_bip(const Biposition& p) const {
  if (p.bottom) return std::nullopt;
  auto a = res_pos(p.outer);
  if (!a) return std::nullopt;
  return Biposition::at(*a, p.inner);
}

Biposition ResidualMap::qres_bip(const Biposition& p) const {
  if (p.bottom) return p;
  auto sp = split(p.outer);
  if (!sp) return p;  // out of the redex: identity
  const auto& [copy, rest] = *sp;
  if (rest.empty()) return Biposition::at(copy, p.inner);  // redex root
  std::uint64_t first = rest.front().is_big() ? 2 : rest.front().small_value();
  if (first == 1) {
    if (rest.size() == 1) {
      // The abstraction of the redex.
      const Word& c = p.inner;
      if (c.empty()) return Biposition::at(copy, Word());          // root of its type
      std::uint64_t ck = c.front().is_big() ? 2 : c.front().small_value();
      if (ck == 1) {
        if (c.size() == 1) return Biposition::at(copy, Word());    // also the root clause
        return Biposition::at(copy, c.tail());                     // target of the arrow
      }
      // Source entry on track k.
      const Track& k = c.front();
      auto ak = relocate_(copy, k);
      if (!ak) return Biposition::bot();                           // nihilated slot
      return Biposition::at(copy.concat(*ak), c.tail());
    }
    // Inside the body: both plain residuals and the destroyed variable
    // move to copy . beta.
    Word beta;
    beta.letters.assign(rest.letters.begin() + 2, rest.letters.end());
    return Biposition::at(copy.concat(beta), p.inner);
  }
  const Track& k = rest.front();
  auto ak = relocate_(copy, k);
  if (!ak) return Biposition::bot();  // the whole argument derivation dies
  Word beta = rest.tail();
  return Biposition::at(copy.concat(*ak).concat(beta), p.inner);
}

// ---------------------------------------------------------------------------
// Subject reduction

SubjectReduceResult subject_reduce(const TermPtr& t, const SDerivation& p,
                                   TypeArena& arena, const Word& b) {
  if (!is_redex_at(t, b)) throw std::invalid_argument("not a redex: " + b.str());
  SDerivAnalysis an = analyze_sderiv(t, p, arena);
  if (!an.report.valid()) throw std::invalid_argument("invalid input derivation");

  auto redex_sub = subterm_at(t, b);
  const TermPtr lam = (*redex_sub)->fun;
  const std::string& x = lam->name;

  SubjectReduceResult out;
  out.spec.redex = b;
  out.spec.var = x;
  out.spec.argument = (*redex_sub)->arg;
  out.term = beta_reduce_at(t, b, &out.spec.occurrences);

  // Relocation tables: for every derivation copy of the redex, the
  // positions of the bound-variable axioms per axiom track.
  auto reloc = std::make_shared<std::map<Word, std::map<Track, Word>>>();

  SDerivation result;
  std::function<int(int)> clone = [&](int idx) -> int {
    SNode n = p.at(idx);
    if (n.kind == SNode::Kind::Abs && n.child >= 0) n.child = clone(n.child);
    if (n.kind == SNode::Kind::App) {
      if (n.left >= 0) n.left = clone(n.left);
      for (auto& [track, arg] : n.args) arg = clone(arg);
    }
    result.nodes.push_back(std::move(n));
    return static_cast<int>(result.nodes.size() - 1);
  };

  // Collects the bound-variable axioms inside the body derivation; paths
  // are relative to the body premise root.
  std::function<void(int, const TermPtr&, const Word&, std::map<Track, std::pair<int, Word>>&)>
      collect_axioms = [&](int idx, const TermPtr& sub, const Word& rel,
                           std::map<Track, std::pair<int, Word>>& axioms) {
        const SNode& n = p.at(idx);
        switch (n.kind) {
          case SNode::Kind::Ax:
            if (sub->is_var() && sub->name == x) axioms[n.ax_track] = {idx, rel};
            return;
          case SNode::Kind::Abs:
            if (sub->name == x) return;  // rebound
            if (n.child >= 0) collect_axioms(n.child, sub->child, rel.append_small(0), axioms);
            return;
          case SNode::Kind::App:
            if (n.left >= 0) collect_axioms(n.left, sub->fun, rel.append_small(1), axioms);
            for (const auto& [track, arg] : n.args)
              collect_axioms(arg, sub->arg, rel.append(track), axioms);
            return;
        }
      };

  // Splice: clone the body derivation, substituting argument derivations
  // for the bound-variable axioms.
  std::function<int(int, const TermPtr&, const std::map<Track, int>&)> splice =
      [&](int idx, const TermPtr& sub, const std::map<Track, int>& arg_clones) -> int {
    const SNode& n = p.at(idx);
    switch (n.kind) {
      case SNode::Kind::Ax:
        if (sub->is_var() && sub->name == x) {
          auto it = arg_clones.find(n.ax_track);
          if (it == arg_clones.end())
            throw std::invalid_argument("axiom track without matching argument");
          return it->second;
        }
        return clone(idx);
      case SNode::Kind::Abs: {
        if (sub->name == x) return clone(idx);
        SNode nn = n;
        nn.child = splice(n.child, sub->child, arg_clones);
        result.nodes.push_back(std::move(nn));
        return static_cast<int>(result.nodes.size() - 1);
      }
      case SNode::Kind::App: {
        SNode nn = n;
        nn.left = splice(n.left, sub->fun, arg_clones);
        for (auto& [track, arg] : nn.args) arg = splice(arg, sub->arg, arg_clones);
        result.nodes.push_back(std::move(nn));
        return static_cast<int>(result.nodes.size() - 1);
      }
    }
    return -1;
  };

  std::function<int(int, const TermPtr&, const Word&)> transform =
      [&](int idx, const TermPtr& sub, const Word& termpos) -> int {
    const SNode& n = p.at(idx);
    if (termpos == b) {
      if (n.kind != SNode::Kind::App || n.left < 0)
        throw std::invalid_argument("redex position not typed by an application node");
      const SNode& absnode = p.at(n.left);
      if (absnode.kind != SNode::Kind::Abs)
        throw std::invalid_argument("redex left premise is not an abstraction node");
      const Word deriv_pos = an.node_position[static_cast<std::size_t>(idx)];
      std::map<Track, std::pair<int, Word>> axioms;
      if (absnode.child >= 0)
        collect_axioms(absnode.child, sub->fun->child, Word(), axioms);
      auto& table = (*reloc)[deriv_pos];
      for (const auto& [track, ax] : axioms) table[track] = ax.second;
      std::map<Track, int> arg_clones;
      for (const auto& [track, arg] : n.args) arg_clones[track] = clone(arg);
      if (arg_clones.size() != axioms.size())
        throw std::invalid_argument("argument tracks do not match axiom tracks");
      for (const auto& [track, ax] : axioms)
        if (!arg_clones.count(track))
          throw std::invalid_argument("axiom track without matching argument");
      return splice(absnode.child, sub->fun->child, arg_clones);
    }
    SNode nn = n;
    switch (n.kind) {
      case SNode::Kind::Ax:
        break;
      case SNode::Kind::Abs:
        nn.child = transform(n.child, sub->child, termpos.append_small(0));
        break;
      case SNode::Kind::App:
        nn.left = transform(n.left, sub->fun, termpos.append_small(1));
        for (auto& [track, arg] : nn.args)
          arg = transform(arg, sub->arg, termpos.append_small(2));
        break;
    }
    result.nodes.push_back(std::move(nn));
    return static_cast<int>(result.nodes.size() - 1);
  };

  result.root = transform(p.root, t, Word());
  out.deriv = std::move(result);

  RelocationFn relocate = [reloc](const Word& a, const Track& k) -> std::optional<Word> {
    auto it = reloc->find(a);
    if (it == reloc->end()) return std::nullopt;
    auto jt = it->second.find(k);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  };
  out.residuals = std::make_shared<ResidualMap>(t, b, std::move(relocate));

  CheckReport after = check_sderiv(out.term, out.deriv, arena);
  if (!after.valid())
    throw std::logic_error("subject reduction produced an invalid derivation: " +
                           after.violations.front().message);
  return out;
}

// ---------------------------------------------------------------------------
// Subject expansion

namespace {

TermPtr replace_at(const TermPtr& t, const Word& pos, std::size_t depth, const TermPtr& s) {
  if (depth == pos.size()) return s;
  std::uint64_t k = pos.letters[depth].collapse();
  switch (t->kind) {
    case Term::Kind::Var:
      throw std::invalid_argument("occurrence out of support");
    case Term::Kind::Abs:
      if (k != 0) throw std::invalid_argument("occurrence out of support");
      return Term::abs(t->name, replace_at(t->child, pos, depth + 1, s));
    case Term::Kind::App:
      if (k == 1) return Term::app(replace_at(t->fun, pos, depth + 1, s), t->arg);
      if (k == 2) return Term::app(t->fun, replace_at(t->arg, pos, depth + 1, s));
      throw std::invalid_argument("occurrence out of support");
  }
  throw std::invalid_argument("unreachable");
}

void collect_names(const TermPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::Var: out.insert(t->name); return;
    case Term::Kind::Abs:
      out.insert(t->name);
      collect_names(t->child, out);
      return;
    case Term::Kind::App:
      collect_names(t->fun, out);
      collect_names(t->arg, out);
      return;
  }
}

}  // namespace

SubjectExpandResult subject_expand(const TermPtr& t_reduced, const SDerivation& p,
                                   TypeArena& arena, const ExpandSpec& spec) {
  SDerivAnalysis an = analyze_sderiv(t_reduced, p, arena);
  if (!an.report.valid()) throw std::invalid_argument("invalid input derivation");
  auto target = subterm_at(t_reduced, spec.redex);
  if (!target) throw std::invalid_argument("redex position out of support");

  // The binder must be fresh for the whole subtree to rule out capture.
  std::set<std::string> names;
  collect_names(*target, names);
  if (names.count(spec.var))
    throw std::invalid_argument("binder name occurs in the expansion subtree");

  // Occurrences must be an antichain of copies of the argument.
  for (const auto& occ : spec.occurrences) {
    auto sub = subterm_at(*target, occ);
    if (!sub || !term_equal(*sub, spec.argument))
      throw std::invalid_argument("occurrence does not hold the argument");
    for (const auto& other : spec.occurrences)
      if (!(other == occ) && occ.is_prefix_of(other))
        throw std::invalid_argument("occurrences overlap");
  }

  // Term: cut the occurrences, bind them, and reapply the argument.
  TermPtr body = *target;
  for (const auto& occ : spec.occurrences)
    body = replace_at(body, occ, 0, Term::var(spec.var));
  TermPtr redex = Term::app(Term::abs(spec.var, body), spec.argument);
  TermPtr t = replace_at(t_reduced, spec.redex, 0, redex);

  std::set<Word> occ_set(spec.occurrences.begin(), spec.occurrences.end());

  SDerivation result;
  std::function<int(int)> clone = [&](int idx) -> int {
    SNode n = p.at(idx);
    if (n.kind == SNode::Kind::Abs && n.child >= 0) n.child = clone(n.child);
    if (n.kind == SNode::Kind::App) {
      if (n.left >= 0) n.left = clone(n.left);
      for (auto& [track, arg] : n.args) arg = clone(arg);
    }
    result.nodes.push_back(std::move(n));
    return static_cast<int>(result.nodes.size() - 1);
  };

  std::function<int(int, const TermPtr&, const Word&)> transform =
      [&](int idx, const TermPtr& sub, const Word& termpos) -> int {
    const SNode& n = p.at(idx);
    if (termpos == spec.redex) {
      // Wrap this subderivation into the new redex.
      const Word node_pos = an.node_position[static_cast<std::size_t>(idx)];
      std::vector<std::pair<Track, int>> cut_args;
      std::uint64_t fresh = 2;
      // Cut the subderivations sitting over the occurrences, replacing
      // them with axioms for the new variable.
      std::function<int(int, const TermPtr&, const Word&, const Word&)> cut =
          [&](int j, const TermPtr& jsub, const Word& rel_term,
              const Word& rel_deriv) -> int {
        if (occ_set.count(rel_term)) {
          const SJudgment& jj = an.judgment[static_cast<std::size_t>(j)];
          Track track = spec.coding
                            ? spec.coding->code(node_pos.append_small(1).append_small(0)
                                                    .concat(rel_deriv))
                            : Track(fresh++);
          int arg_clone = clone(j);
          cut_args.emplace_back(track, arg_clone);
          SNode ax;
          ax.kind = SNode::Kind::Ax;
          ax.var = spec.var;
          ax.ax_track = track;
          ax.ax_type = jj.type;
          result.nodes.push_back(std::move(ax));
          return static_cast<int>(result.nodes.size() - 1);
        }
        SNode nn = p.at(j);
        switch (nn.kind) {
          case SNode::Kind::Ax:
            break;
          case SNode::Kind::Abs:
            nn.child = cut(nn.child, jsub->child, rel_term.append_small(0),
                           rel_deriv.append_small(0));
            break;
          case SNode::Kind::App: {
            nn.left = cut(nn.left, jsub->fun, rel_term.append_small(1),
                          rel_deriv.append_small(1));
            for (auto& [track, arg] : nn.args)
              arg = cut(arg, jsub->arg, rel_term.append_small(2), rel_deriv.append(track));
            break;
          }
        }
        result.nodes.push_back(std::move(nn));
        return static_cast<int>(result.nodes.size() - 1);
      };
      int body_idx = cut(idx, sub, Word(), Word());
      SNode absn;
      absn.kind = SNode::Kind::Abs;
      absn.var = spec.var;
      absn.child = body_idx;
      result.nodes.push_back(std::move(absn));
      int abs_idx = static_cast<int>(result.nodes.size() - 1);
      SNode appn;
      appn.kind = SNode::Kind::App;
      appn.left = abs_idx;
      appn.args = std::move(cut_args);
      result.nodes.push_back(std::move(appn));
      return static_cast<int>(result.nodes.size() - 1);
    }
    SNode nn = n;
    switch (n.kind) {
      case SNode::Kind::Ax:
        break;
      case SNode::Kind::Abs:
        nn.child = transform(n.child, sub->child, termpos.append_small(0));
        break;
      case SNode::Kind::App:
        nn.left = transform(n.left, sub->fun, termpos.append_small(1));
        for (auto& [track, arg] : nn.args)
          arg = transform(arg, sub->arg, termpos.append_small(2));
        break;
    }
    result.nodes.push_back(std::move(nn));
    return static_cast<int>(result.nodes.size() - 1);
  };

  result.root = transform(p.root, t_reduced, Word());

  SubjectExpandResult out;
  out.term = t;
  out.deriv = std::move(result);
  CheckReport after = check_sderiv(out.term, out.deriv, arena);
  if (!after.valid())
    throw std::logic_error("subject expansion produced an invalid derivation: " +
                           after.violations.front().message);
  return out;
}

Track ResiduatedCoding::code(const Word& a) const {
  // The residual position keeps the code of its source. Invert the
  // residual map on positions.
  const Word& b = map_->redex();
  if (a.size() >= b.size() && a.prefix(b.size()).collapse() == b) {
    Word copy = a.prefix(b.size());
    Word rest;
    rest.letters.assign(a.letters.begin() + static_cast<std::ptrdiff_t>(b.size()),
                        a.letters.end());
    // Does rest pass through a spot where the argument was substituted?
    // Try every prefix of rest as the landing spot of some argument copy.
    for (std::size_t len = 0; len <= rest.size(); ++len) {
      Word delta = rest.prefix(len);
      Word candidate_axiom = copy.append_small(1).append_small(0).concat(delta);
      Track k = parent_->code(candidate_axiom);
      auto ak = map_->relocation(copy, k);
      if (ak && *ak == delta) {
        Word gamma;
        gamma.letters.assign(rest.letters.begin() + static_cast<std::ptrdiff_t>(len),
                             rest.letters.end());
        return parent_->code(copy.append(k).concat(gamma));
      }
    }
    // Otherwise the position came from inside the body.
    return parent_->code(copy.append_small(1).append_small(0).concat(rest));
  }
  return parent_->code(a);
}

std::optional<Word> ResiduatedCoding::pos(const Track& k) const {
  auto a = parent_->pos(k);
  if (!a) return std::nullopt;
  return map_->res_pos(*a);
}

}  // namespace infinitype
