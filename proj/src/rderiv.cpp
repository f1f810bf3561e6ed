#include "infinitype/rderiv.hpp"

#include <functional>
#include <set>

namespace infinitype {

namespace {

void violation(CheckReport& rep, int node, std::string msg) {
  Word pos;
  pos.letters.emplace_back(static_cast<std::uint64_t>(node));
  rep.violations.push_back(Violation{pos, std::move(msg)});
}

std::vector<MultEntry> mset_scale(const std::vector<MultEntry>& a, Mult m) {
  std::vector<MultEntry> out;
  if (m.v == 0) return out;
  for (const auto& e : a) out.push_back(MultEntry{e.type, mult_scale(e.mult, m)});
  return out;
}

std::vector<MultEntry> mset_add(const std::vector<MultEntry>& a,
                                const std::vector<MultEntry>& b) {
  std::vector<MultEntry> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

bool mset_equal(const TypeArena& arena, const std::vector<MultEntry>& a,
                const std::vector<MultEntry>& b) {
  // Group by bisimilar keys, then match with multiplicities.
  auto group = [&](const std::vector<MultEntry>& src) {
    std::vector<MultEntry> g;
    for (const auto& e : src) {
      if (e.mult.v == 0) continue;
      bool joined = false;
      for (auto& m : g)
        if (type_equal(arena, m.type, e.type)) {
          m.mult = mult_add(m.mult, e.mult);
          joined = true;
          break;
        }
      if (!joined) g.push_back(e);
    }
    return g;
  };
  auto ga = group(a);
  auto gb = group(b);
  if (ga.size() != gb.size()) return false;
  std::vector<bool> used(gb.size(), false);
  for (const auto& ea : ga) {
    bool found = false;
    for (std::size_t j = 0; j < gb.size(); ++j) {
      if (used[j] || gb[j].mult != ea.mult) continue;
      if (type_equal(arena, ea.type, gb[j].type)) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

RContext rcontext_add(const TypeArena& arena, const RContext& a, const RContext& b) {
  (void)arena;
  RContext out = a;
  for (const auto& [var, mset] : b) {
    auto it = out.find(var);
    if (it == out.end()) out[var] = mset;
    else it->second = mset_add(it->second, mset);
  }
  return out;
}

RContext rcontext_scale(const RContext& a, Mult m) {
  RContext out;
  if (m.v == 0) return out;
  for (const auto& [var, mset] : a) out[var] = mset_scale(mset, m);
  return out;
}

bool rcontext_equal(const TypeArena& arena, const RContext& a, const RContext& b) {
  auto nonempty = [](const RContext& c) {
    std::vector<std::string> vars;
    for (const auto& [var, mset] : c) {
      for (const auto& e : mset)
        if (e.mult.v != 0) {
          vars.push_back(var);
          break;
        }
    }
    return vars;
  };
  auto va = nonempty(a);
  auto vb = nonempty(b);
  if (va != vb) return false;
  for (const auto& var : va)
    if (!mset_equal(arena, a.at(var), b.at(var))) return false;
  return true;
}

CheckReport check_rderiv(const TermPtr& t, const RDerivation& d, TypeArena& arena,
                         RSystem system) {
  CheckReport rep;
  if (d.root < 0 || static_cast<std::size_t>(d.root) >= d.nodes.size()) {
    rep.violations.push_back(Violation{Word(), "missing root node"});
    return rep;
  }
  if (!term_equal(d.at(d.root).subject, t)) {
    rep.violations.push_back(Violation{Word(), "root node does not type the term"});
    return rep;
  }

  auto simple_ctx_ok = [&](const RContext& ctx) {
    for (const auto& [var, mset] : ctx) {
      (void)var;
      if (mset.size() != 1 || mset.front().mult != Mult(1)) return false;
    }
    return true;
  };

  for (std::size_t i = 0; i < d.nodes.size(); ++i) {
    const RNode& n = d.nodes[i];
    int ni = static_cast<int>(i);
    if (!n.subject) {
      violation(rep, ni, "node without subject");
      continue;
    }
    if (n.type == kNoType) {
      violation(rep, ni, "node without claimed type");
      continue;
    }
    switch (n.kind) {
      case RNode::Kind::Ax: {
        if (!n.subject->is_var() || n.subject->name != n.var) {
          violation(rep, ni, "axiom subject mismatch");
          break;
        }
        auto it = n.ctx.find(n.var);
        if (it == n.ctx.end()) {
          violation(rep, ni, "axiom context missing its variable");
          break;
        }
        switch (system) {
          case RSystem::R: {
            // Exactly x : [type] with multiplicity 1 and nothing else.
            RContext expect;
            expect[n.var] = {MultEntry{n.type, Mult(1)}};
            if (!rcontext_equal(arena, n.ctx, expect))
              violation(rep, ni, "relevant axiom must carry exactly its own hypothesis");
            break;
          }
          case RSystem::Rw: {
            bool found = false;
            for (const auto& e : it->second)
              if (e.mult.v != 0 && type_equal(arena, e.type, n.type)) found = true;
            if (!found) violation(rep, ni, "axiom type absent from its context entry");
            break;
          }
          case RSystem::Simple: {
            if (!simple_ctx_ok(n.ctx)) {
              violation(rep, ni, "simple context entries must be single types");
              break;
            }
            if (!type_equal(arena, it->second.front().type, n.type))
              violation(rep, ni, "axiom type differs from its context entry");
            break;
          }
        }
        break;
      }
      case RNode::Kind::Abs: {
        if (!n.subject->is_abs() || (!n.var.empty() && n.var != n.subject->name)) {
          violation(rep, ni, "abstraction subject mismatch");
          break;
        }
        if (n.left < 0 || static_cast<std::size_t>(n.left) >= d.nodes.size()) {
          violation(rep, ni, "abstraction missing premise");
          break;
        }
        const RNode& prem = d.at(n.left);
        if (!term_equal(prem.subject, n.subject->child)) {
          violation(rep, ni, "premise subject mismatch");
          break;
        }
        const TypeNode& ty = arena.at(n.type);
        if (ty.kind != TypeNode::Kind::RArrow) {
          violation(rep, ni, "abstraction type is not an arrow");
          break;
        }
        if (!type_equal(arena, ty.target, prem.type)) {
          violation(rep, ni, "arrow target differs from premise type");
          break;
        }
        const std::string& x = n.subject->name;
        std::vector<MultEntry> bound;
        auto it = prem.ctx.find(x);
        if (it != prem.ctx.end()) bound = it->second;
        if (!mset_equal(arena, ty.mset, bound)) {
          violation(rep, ni, "arrow source differs from the premise hypothesis");
          break;
        }
        RContext rest = prem.ctx;
        rest.erase(x);
        if (system == RSystem::Simple) {
          RContext conc = n.ctx;
          conc.erase(x);
          if (!simple_ctx_ok(prem.ctx) || !rcontext_equal(arena, rest, conc))
            violation(rep, ni, "contexts do not match across the abstraction");
        } else if (!rcontext_equal(arena, rest, n.ctx)) {
          violation(rep, ni, "contexts do not match across the abstraction");
        }
        break;
      }
      case RNode::Kind::App: {
        if (!n.subject->is_app()) {
          violation(rep, ni, "application subject mismatch");
          break;
        }
        if (n.left < 0 || static_cast<std::size_t>(n.left) >= d.nodes.size()) {
          violation(rep, ni, "application missing left premise");
          break;
        }
        const RNode& fun = d.at(n.left);
        if (!term_equal(fun.subject, n.subject->fun)) {
          violation(rep, ni, "left premise subject mismatch");
          break;
        }
        const TypeNode& fty = arena.at(fun.type);
        if (fty.kind != TypeNode::Kind::RArrow) {
          violation(rep, ni, "left premise not typed with an arrow");
          break;
        }
        if (!type_equal(arena, fty.target, n.type)) {
          violation(rep, ni, "application type differs from the arrow target");
          break;
        }
        std::vector<MultEntry> supplied;
        bool args_ok = true;
        for (const auto& g : n.args) {
          if (g.node < 0 || static_cast<std::size_t>(g.node) >= d.nodes.size()) {
            violation(rep, ni, "argument group out of range");
            args_ok = false;
            break;
          }
          const RNode& arg = d.at(g.node);
          if (!term_equal(arg.subject, n.subject->arg)) {
            violation(rep, ni, "argument subject mismatch");
            args_ok = false;
            break;
          }
          supplied.push_back(MultEntry{arg.type, g.mult});
        }
        if (!args_ok) break;
        if (!mset_equal(arena, fty.mset, supplied)) {
          violation(rep, ni, "argument multiset differs from the arrow source");
          break;
        }
        if (system == RSystem::Simple) {
          if (n.args.size() != 1 || n.args.front().mult != Mult(1)) {
            violation(rep, ni, "simple application takes exactly one argument premise");
            break;
          }
          const RNode& arg = d.at(n.args.front().node);
          if (!rcontext_equal(arena, n.ctx, fun.ctx) ||
              !rcontext_equal(arena, n.ctx, arg.ctx))
            violation(rep, ni, "simple premises must share the conclusion context");
          break;
        }
        RContext sum = fun.ctx;
        for (const auto& g : n.args)
          sum = rcontext_add(arena, sum, rcontext_scale(d.at(g.node).ctx, g.mult));
        if (!rcontext_equal(arena, sum, n.ctx))
          violation(rep, ni, "context is not the sum of the premise contexts");
        break;
      }
    }
  }
  // Reachability sanity: the root must reach only existing nodes (already
  // bounds-checked above); unreached nodes are permitted but ignored.
  return rep;
}

bool rderiv_equal(const TypeArena& arena, const RDerivation& a, int na,
                  const RDerivation& b, int nb) {
  std::set<std::pair<int, int>> assumed;
  std::function<bool(int, int)> go = [&](int x, int y) -> bool {
    if (assumed.count({x, y})) return true;
    assumed.insert({x, y});
    const RNode& nx = a.at(x);
    const RNode& ny = b.at(y);
    if (nx.kind != ny.kind) return false;
    if (!term_equal(nx.subject, ny.subject)) return false;
    if (!type_equal(arena, nx.type, ny.type)) return false;
    if (!rcontext_equal(arena, nx.ctx, ny.ctx)) return false;
    switch (nx.kind) {
      case RNode::Kind::Ax:
        return nx.var == ny.var;
      case RNode::Kind::Abs:
        return go(nx.left, ny.left);
      case RNode::Kind::App: {
        if (!go(nx.left, ny.left)) return false;
        if (nx.args.size() != ny.args.size()) return false;
        std::vector<bool> used(ny.args.size(), false);
        for (const auto& ga : nx.args) {
          bool found = false;
          for (std::size_t j = 0; j < ny.args.size(); ++j) {
            if (used[j] || !(ny.args[j].mult == ga.mult)) continue;
            if (go(ga.node, ny.args[j].node)) {
              used[j] = true;
              found = true;
              break;
            }
          }
          if (!found) return false;
        }
        return true;
      }
    }
    return false;
  };
  return go(na, nb);
}

// ---------------------------------------------------------------------------
// Collapse of tracked derivations

RDerivation collapse_deriv(const TermPtr& t, const SDerivation& p, TypeArena& arena) {
  SDerivAnalysis an = analyze_sderiv(t, p, arena);
  if (!an.report.valid())
    throw std::invalid_argument("cannot collapse an invalid derivation");

  RDerivation out;

  auto collapse_seq = [&](const SeqType& seq) {
    std::vector<MultEntry> mset;
    for (const auto& e : seq.entries)
      mset.push_back(MultEntry{collapse_S_to_R(arena, e.type), Mult(1)});
    for (const auto& f : seq.families) {
      Mult m = f.tracks.infinite() ? Mult::omega()
                                   : Mult(static_cast<std::uint64_t>(f.tracks.finite.size()));
      mset.push_back(MultEntry{collapse_S_to_R(arena, f.type), m});
    }
    return mset;
  };

  auto collapse_ctx = [&](const SContext& ctx) {
    RContext out_ctx;
    for (const auto& [var, seq] : ctx) out_ctx[var] = collapse_seq(seq);
    return out_ctx;
  };

  std::function<int(int, const TermPtr&)> go = [&](int idx, const TermPtr& sub) -> int {
    const SNode& n = p.at(idx);
    const SJudgment& j = an.judgment[static_cast<std::size_t>(idx)];
    RNode rn;
    rn.subject = sub;
    rn.ctx = collapse_ctx(j.ctx);
    rn.type = collapse_S_to_R(arena, j.type);
    switch (n.kind) {
      case SNode::Kind::Ax:
        rn.kind = RNode::Kind::Ax;
        rn.var = n.var;
        break;
      case SNode::Kind::Abs:
        rn.kind = RNode::Kind::Abs;
        rn.var = sub->name;
        rn.left = go(n.child, sub->child);
        break;
      case SNode::Kind::App: {
        rn.kind = RNode::Kind::App;
        rn.left = go(n.left, sub->fun);
        // Equal collapsed argument derivations merge into one group with
        // a higher multiplicity.
        for (const auto& [track, arg] : n.args) {
          (void)track;
          int child = go(arg, sub->arg);
          bool merged = false;
          for (auto& g : rn.args)
            if (rderiv_equal(arena, out, g.node, out, child)) {
              g.mult = mult_add(g.mult, Mult(1));
              merged = true;
              break;
            }
          if (!merged) rn.args.push_back(ArgGroup{child, Mult(1)});
        }
        break;
      }
    }
    out.nodes.push_back(std::move(rn));
    return static_cast<int>(out.nodes.size() - 1);
  };

  out.root = go(p.root, t);
  return out;
}

}  // namespace infinitype
