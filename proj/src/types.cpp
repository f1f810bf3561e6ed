#include "infinitype/types.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>

namespace infinitype {

Mult mult_add(Mult a, Mult b) {
  if (a.is_omega() || b.is_omega()) return Mult::omega();
  std::uint64_t s = a.v + b.v;
  if (s < a.v) return Mult::omega();  // saturate
  return Mult(s);
}

Mult mult_scale(Mult a, Mult factor) {
  if (a.v == 0 || factor.v == 0) return Mult(0);
  if (a.is_omega() || factor.is_omega()) return Mult::omega();
  if (a.v > Mult::kOmega / factor.v) return Mult::omega();
  return Mult(a.v * factor.v);
}

std::string mult_str(Mult m) { return m.is_omega() ? "w" : std::to_string(m.v); }

TrackSet TrackSet::of(std::vector<Track> ts) {
  TrackSet s;
  s.kind = Kind::Finite;
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  s.finite = std::move(ts);
  return s;
}

TrackSet TrackSet::progression(std::uint64_t start, std::uint64_t step) {
  TrackSet s;
  s.kind = Kind::Progression;
  s.start = start;
  s.step = step == 0 ? 1 : step;
  return s;
}

bool TrackSet::contains(const Track& t) const {
  if (kind == Kind::Finite)
    return std::binary_search(finite.begin(), finite.end(), t);
  if (t.is_big()) return false;  // progressions hold numeric tracks only
  std::uint64_t v = t.small_value();
  return v >= start && (v - start) % step == 0;
}

bool TrackSet::intersects(const TrackSet& o) const {
  if (kind == Kind::Finite) {
    for (const auto& t : finite)
      if (o.contains(t)) return true;
    return false;
  }
  if (o.kind == Kind::Finite) return o.intersects(*this);
  // Two progressions intersect iff start difference is a multiple of
  // gcd(step, step') beyond the larger start.
  std::uint64_t g = std::gcd(step, o.step);
  std::uint64_t lo = std::max(start, o.start);
  std::uint64_t diff = start > o.start ? start - o.start : o.start - start;
  if (diff % g != 0) return false;
  // There is a common value >= lo by CRT; progressions are infinite.
  (void)lo;
  return true;
}

std::vector<Track> TrackSet::enumerate(std::size_t limit) const {
  if (kind == Kind::Finite) {
    if (finite.size() <= limit) return finite;
    return std::vector<Track>(finite.begin(), finite.begin() + limit);
  }
  std::vector<Track> out;
  for (std::size_t i = 0; i < limit; ++i) out.emplace_back(start + step * i);
  return out;
}

bool TrackSet::operator==(const TrackSet& o) const {
  if (kind != o.kind) return false;
  if (kind == Kind::Finite) return finite == o.finite;
  return start == o.start && step == o.step;
}

std::string TrackSet::str() const {
  std::ostringstream out;
  out << '{';
  if (kind == Kind::Finite) {
    for (std::size_t i = 0; i < finite.size(); ++i) {
      if (i) out << ',';
      out << finite[i].str();
    }
  } else {
    out << start << '+' << step << 'n';
  }
  out << '}';
  return out.str();
}

std::optional<TypeId> SeqType::lookup(const Track& t) const {
  for (const auto& e : entries)
    if (e.track == t) return e.type;
  for (const auto& f : families)
    if (f.tracks.contains(t)) return f.type;
  return std::nullopt;
}

std::vector<Track> SeqType::root_tracks(std::size_t family_limit) const {
  std::vector<Track> out;
  for (const auto& e : entries) out.push_back(e.track);
  for (const auto& f : families)
    for (const auto& t : f.tracks.enumerate(family_limit)) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::variant<SeqType, TrackConflict> seq_union(const SeqType& a, const SeqType& b) {
  std::vector<Track> clash;
  for (const auto& e : b.entries)
    if (a.lookup(e.track)) clash.push_back(e.track);
  for (const auto& e : a.entries)
    if (!a.lookup(e.track).has_value()) continue;  // always present; skip
  for (const auto& f : b.families) {
    for (const auto& e : a.entries)
      if (f.tracks.contains(e.track)) clash.push_back(e.track);
    for (const auto& g : a.families)
      if (f.tracks.intersects(g.tracks)) {
        // Report a witness where cheap, else the family start.
        for (const auto& t : f.tracks.enumerate(8))
          if (g.tracks.contains(t)) {
            clash.push_back(t);
            break;
          }
        if (clash.empty()) clash.emplace_back(f.tracks.start);
      }
  }
  for (const auto& f : a.families)
    for (const auto& e : b.entries)
      if (f.tracks.contains(e.track)) clash.push_back(e.track);
  if (!clash.empty()) {
    std::sort(clash.begin(), clash.end());
    clash.erase(std::unique(clash.begin(), clash.end()), clash.end());
    return TrackConflict{std::move(clash)};
  }
  SeqType out = a;
  out.entries.insert(out.entries.end(), b.entries.begin(), b.entries.end());
  std::sort(out.entries.begin(), out.entries.end(),
            [](const SeqEntry& x, const SeqEntry& y) { return x.track < y.track; });
  out.families.insert(out.families.end(), b.families.begin(), b.families.end());
  return out;
}

TypeId TypeArena::atom(const std::string& name) {
  TypeNode n;
  n.kind = TypeNode::Kind::Atom;
  n.atom = name;
  nodes_.push_back(std::move(n));
  return static_cast<TypeId>(nodes_.size() - 1);
}

TypeId TypeArena::sarrow(SeqType source, TypeId target) {
  TypeNode n;
  n.kind = TypeNode::Kind::SArrow;
  n.seq = std::move(source);
  n.target = target;
  std::sort(n.seq.entries.begin(), n.seq.entries.end(),
            [](const SeqEntry& x, const SeqEntry& y) { return x.track < y.track; });
  nodes_.push_back(std::move(n));
  return static_cast<TypeId>(nodes_.size() - 1);
}

TypeId TypeArena::rarrow(std::vector<MultEntry> source, TypeId target) {
  TypeNode n;
  n.kind = TypeNode::Kind::RArrow;
  n.mset = std::move(source);
  n.target = target;
  nodes_.push_back(std::move(n));
  return static_cast<TypeId>(nodes_.size() - 1);
}

TypeId TypeArena::declare() {
  TypeNode n;
  n.defined = false;
  nodes_.push_back(std::move(n));
  return static_cast<TypeId>(nodes_.size() - 1);
}

void TypeArena::define(TypeId hole, TypeNode node) {
  assert(!nodes_.at(hole).defined);
  node.defined = true;
  if (node.kind == TypeNode::Kind::SArrow)
    std::sort(node.seq.entries.begin(), node.seq.entries.end(),
              [](const SeqEntry& x, const SeqEntry& y) { return x.track < y.track; });
  nodes_.at(hole) = std::move(node);
}

bool TypeArena::fully_defined() const {
  for (const auto& n : nodes_)
    if (!n.defined) return false;
  return true;
}

std::set<Word> stype_support(const TypeArena& arena, TypeId id, std::size_t depth,
                             std::size_t family_limit) {
  std::set<Word> out;
  std::deque<std::pair<Word, TypeId>> work;
  work.emplace_back(Word(), id);
  while (!work.empty()) {
    auto [pos, ty] = work.front();
    work.pop_front();
    if (pos.size() > depth) continue;
    out.insert(pos);
    const TypeNode& n = arena.at(ty);
    if (n.kind == TypeNode::Kind::Atom) continue;
    if (pos.size() == depth) continue;
    if (n.kind == TypeNode::Kind::SArrow) {
      work.emplace_back(pos.append_small(1), n.target);
      for (const auto& e : n.seq.entries) work.emplace_back(pos.append(e.track), e.type);
      for (const auto& f : n.seq.families)
        for (const auto& t : f.tracks.enumerate(family_limit))
          work.emplace_back(pos.append(t), f.type);
    } else {
      // Multiset sources have no stable track labels; the R-side support
      // uses track 2 for every source occurrence.
      work.emplace_back(pos.append_small(1), n.target);
      for (const auto& e : n.mset) work.emplace_back(pos.append_small(2), e.type);
    }
  }
  return out;
}

bool is_support_candidate(const std::set<Word>& c) {
  if (c.empty()) return false;
  for (const auto& w : c) {
    for (const auto& letter : w.letters)
      if (!letter.is_big() && letter.small_value() == 0) return false;
    if (!w.empty()) {
      // closed under t1: the parent must be present
      if (!c.count(w.drop_last())) return false;
      // closed under t2: a child on a track >= 2 demands a sibling on 1
      if (w.back().collapse() == 2) {
        Word sib = w.drop_last().append_small(1);
        if (!c.count(sib)) return false;
      }
    }
  }
  return true;
}

std::optional<TypeId> decorate_candidate(TypeArena& arena, const std::set<Word>& c) {
  if (!is_support_candidate(c)) return std::nullopt;
  // Build bottom-up over the (finite) tree.
  std::function<TypeId(const Word&)> build = [&](const Word& pos) -> TypeId {
    std::vector<SeqEntry> sources;
    std::optional<Word> target;
    bool internal = false;
    // Children of pos in c.
    for (auto it = c.upper_bound(pos); it != c.end(); ++it) {
      if (!pos.is_prefix_of(*it)) break;
      if (it->size() != pos.size() + 1) continue;
      internal = true;
      const Track& k = it->back();
      if (!k.is_big() && k.small_value() == 1) target = *it;
      else sources.push_back(SeqEntry{k, kNoType});
    }
    if (!internal) return arena.atom("o");
    SeqType seq;
    for (auto& e : sources) {
      Word child = pos.append(e.track);
      seq.entries.push_back(SeqEntry{e.track, build(child)});
    }
    TypeId tgt = build(*target);
    return arena.sarrow(std::move(seq), tgt);
  };
  return build(Word());
}

TypeOrder type_order(const TypeArena& arena, TypeId id) {
  TypeOrder ord;
  std::set<TypeId> seen;
  TypeId cur = id;
  while (true) {
    if (seen.count(cur)) {
      ord.omega = true;
      return ord;
    }
    seen.insert(cur);
    const TypeNode& n = arena.at(cur);
    if (n.kind == TypeNode::Kind::Atom) return ord;
    ++ord.n;
    cur = n.target;
  }
}

TypeId collapse_S_to_R(TypeArena& arena, TypeId id) {
  std::map<TypeId, TypeId> memo;
  std::function<TypeId(TypeId)> go = [&](TypeId s) -> TypeId {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const TypeNode n = arena.at(s);  // copy; arena may reallocate
    if (n.kind == TypeNode::Kind::Atom) {
      TypeId r = arena.atom(n.atom);
      memo[s] = r;
      return r;
    }
    if (n.kind == TypeNode::Kind::RArrow) {
      memo[s] = s;  // already on the R side
      return s;
    }
    TypeId hole = arena.declare();
    memo[s] = hole;
    std::vector<MultEntry> mset;
    for (const auto& e : n.seq.entries) mset.push_back(MultEntry{go(e.type), Mult(1)});
    for (const auto& f : n.seq.families) {
      Mult m = f.tracks.infinite() ? Mult::omega()
                                   : Mult(static_cast<std::uint64_t>(f.tracks.finite.size()));
      mset.push_back(MultEntry{go(f.type), m});
    }
    TypeId tgt = go(n.target);
    TypeNode rn;
    rn.kind = TypeNode::Kind::RArrow;
    rn.mset = std::move(mset);
    rn.target = tgt;
    arena.define(hole, std::move(rn));
    return hole;
  };
  TypeId result = go(id);
  // Merge bisimilar keys inside each freshly built multiset.
  std::set<TypeId> done;
  std::function<void(TypeId)> merge = [&](TypeId r) {
    if (done.count(r)) return;
    done.insert(r);
    const TypeNode& n = arena.at(r);
    if (n.kind != TypeNode::Kind::RArrow) return;
    std::vector<MultEntry> merged;
    for (const auto& e : arena.at(r).mset) {
      bool joined = false;
      for (auto& m : merged)
        if (type_equal(arena, m.type, e.type)) {
          m.mult = mult_add(m.mult, e.mult);
          joined = true;
          break;
        }
      if (!joined) merged.push_back(e);
    }
    // Rewrite in place via const_cast-free path: rebuild node.
    TypeNode nn = arena.at(r);
    nn.mset = merged;
    const_cast<TypeNode&>(arena.at(r)) = nn;  // arena-internal update
    for (const auto& e : merged) merge(e.type);
    merge(arena.at(r).target);
  };
  merge(result);
  return result;
}

namespace {

struct Bisim {
  const TypeArena& arena;
  std::set<std::pair<TypeId, TypeId>> assumed;

  bool eq(TypeId a, TypeId b) {
    if (a == b) return true;
    auto key = std::minmax(a, b);
    if (assumed.count({key.first, key.second})) return true;
    const TypeNode& na = arena.at(a);
    const TypeNode& nb = arena.at(b);
    if (na.kind != nb.kind) return false;
    assumed.insert({key.first, key.second});
    bool ok = false;
    switch (na.kind) {
      case TypeNode::Kind::Atom:
        ok = na.atom == nb.atom;
        break;
      case TypeNode::Kind::SArrow:
        ok = seq_eq(na.seq, nb.seq) && eq(na.target, nb.target);
        break;
      case TypeNode::Kind::RArrow:
        ok = mset_eq(na.mset, nb.mset) && eq(na.target, nb.target);
        break;
    }
    if (!ok) assumed.erase({key.first, key.second});
    return ok;
  }

  bool seq_eq(const SeqType& a, const SeqType& b) {
    // Canonicalize: finite families expand into entries.
    auto expand = [&](const SeqType& s) {
      std::vector<SeqEntry> es = s.entries;
      std::vector<Family> fs;
      for (const auto& f : s.families) {
        if (f.tracks.infinite()) fs.push_back(f);
        else
          for (const auto& t : f.tracks.finite) es.push_back(SeqEntry{t, f.type});
      }
      std::sort(es.begin(), es.end(),
                [](const SeqEntry& x, const SeqEntry& y) { return x.track < y.track; });
      return std::make_pair(es, fs);
    };
    auto [ea, fa] = expand(a);
    auto [eb, fb] = expand(b);
    if (ea.size() != eb.size() || fa.size() != fb.size()) return false;
    for (std::size_t i = 0; i < ea.size(); ++i) {
      if (!(ea[i].track == eb[i].track)) return false;
      if (!eq(ea[i].type, eb[i].type)) return false;
    }
    auto fkey = [](const Family& f) { return std::make_pair(f.tracks.start, f.tracks.step); };
    auto fa2 = fa, fb2 = fb;
    std::sort(fa2.begin(), fa2.end(),
              [&](const Family& x, const Family& y) { return fkey(x) < fkey(y); });
    std::sort(fb2.begin(), fb2.end(),
              [&](const Family& x, const Family& y) { return fkey(x) < fkey(y); });
    for (std::size_t i = 0; i < fa2.size(); ++i) {
      if (!(fa2[i].tracks == fb2[i].tracks)) return false;
      if (!eq(fa2[i].type, fb2[i].type)) return false;
    }
    return true;
  }

  bool mset_eq(const std::vector<MultEntry>& a, const std::vector<MultEntry>& b) {
    // Group each side by bisimilar keys, then match groups across.
    auto group = [&](const std::vector<MultEntry>& src) {
      std::vector<MultEntry> g;
      for (const auto& e : src) {
        if (e.mult.v == 0) continue;
        bool joined = false;
        for (auto& m : g)
          if (eq(m.type, e.type)) {
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
        if (eq(ea.type, gb[j].type)) {
          used[j] = true;
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  }
};

}  // namespace

bool type_equal(const TypeArena& arena, TypeId a, TypeId b) {
  Bisim bs{arena, {}};
  return bs.eq(a, b);
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void collect_shared(const TypeArena& arena, TypeId id, std::map<TypeId, int>& refs) {
  auto seen = refs.find(id);
  if (seen != refs.end()) {
    ++seen->second;
    return;
  }
  refs[id] = 1;
  const TypeNode& n = arena.at(id);
  if (n.kind == TypeNode::Kind::Atom) return;
  if (n.kind == TypeNode::Kind::SArrow) {
    for (const auto& e : n.seq.entries) collect_shared(arena, e.type, refs);
    for (const auto& f : n.seq.families) collect_shared(arena, f.type, refs);
  } else {
    for (const auto& e : n.mset) collect_shared(arena, e.type, refs);
  }
  collect_shared(arena, n.target, refs);
}

struct Renderer {
  const TypeArena& arena;
  std::map<TypeId, std::string> names;   // nodes printed via equations
  std::map<std::string, std::string> equations;
  int counter = 0;

  std::string render(TypeId id, std::set<TypeId>& on_path) {
    auto named = names.find(id);
    if (named != names.end()) {
      if (!equations.count(named->second) && !on_path.count(id)) {
        on_path.insert(id);
        equations[named->second] = body(id, on_path);
        on_path.erase(id);
      }
      return named->second;
    }
    if (on_path.count(id)) {
      // Cycle found without a pre-assigned name: name it now.
      std::string nm = "t" + std::to_string(counter++);
      names[id] = nm;
      return nm;
    }
    on_path.insert(id);
    std::string s = body(id, on_path);
    on_path.erase(id);
    auto it = names.find(id);
    if (it != names.end()) {
      // A cycle through this node was discovered while rendering it.
      equations[it->second] = s;
      return it->second;
    }
    return s;
  }

  std::string body(TypeId id, std::set<TypeId>& on_path) {
    const TypeNode& n = arena.at(id);
    std::ostringstream out;
    switch (n.kind) {
      case TypeNode::Kind::Atom:
        return n.atom;
      case TypeNode::Kind::SArrow: {
        out << '(';
        bool first = true;
        for (const auto& e : n.seq.entries) {
          if (!first) out << ", ";
          first = false;
          out << e.track.str() << '.' << render(e.type, on_path);
        }
        for (const auto& f : n.seq.families) {
          if (!first) out << ", ";
          first = false;
          out << f.tracks.str() << '.' << render(f.type, on_path);
        }
        out << ") -> " << render(n.target, on_path);
        return out.str();
      }
      case TypeNode::Kind::RArrow: {
        // Single-entry sources print in the [A]^m sugar, mixed ones with
        // per-entry multiplicities.
        if (n.mset.size() == 1 && !(n.mset.front().mult == Mult(1))) {
          out << '[' << render(n.mset.front().type, on_path) << "]^"
              << mult_str(n.mset.front().mult);
        } else {
          out << '[';
          bool first = true;
          for (const auto& e : n.mset) {
            if (!first) out << ", ";
            first = false;
            out << render(e.type, on_path);
            if (!(e.mult == Mult(1))) out << '^' << mult_str(e.mult);
          }
          out << ']';
        }
        out << " -> " << render(n.target, on_path);
        return out.str();
      }
    }
    return "?";
  }
};

}  // namespace

std::string type_str(const TypeArena& arena, TypeId id) {
  TypeDocument doc = type_document(arena, id);
  if (doc.equations.empty()) return doc.root;
  std::ostringstream out;
  for (const auto& [k, v] : doc.equations) out << k << " = " << v << "; ";
  out << doc.root;
  return out.str();
}

TypeDocument type_document(const TypeArena& arena, TypeId id) {
  Renderer r{arena, {}, {}, 0};
  std::set<TypeId> path;
  std::string root = r.render(id, path);
  // Render any named-but-unrendered cycles.
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& [node, nm] : r.names) {
      if (!r.equations.count(nm)) {
        std::set<TypeId> p;
        p.insert(node);
        r.equations[nm] = r.body(node, p);
        progress = true;
        break;
      }
    }
  }
  TypeDocument doc;
  doc.equations = std::move(r.equations);
  doc.root = std::move(root);
  return doc;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct TypeParser {
  const std::string& s;
  std::size_t i = 0;
  TypeArena& arena;
  std::map<std::string, TypeId>& named;

  TypeParser(const std::string& text, TypeArena& a, std::map<std::string, TypeId>& n)
      : s(text), arena(a), named(n) {}

  [[noreturn]] void fail(const std::string& m) { throw TypeParseError{i, m}; }

  void ws() {
    while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) ++i;
  }

  bool eat(char c) {
    ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  bool lookahead(char c) {
    ws();
    return i < s.size() && s[i] == c;
  }

  bool eat_arrow() {
    ws();
    if (s.compare(i, 2, "->") == 0) {
      i += 2;
      return true;
    }
    return false;
  }

  std::uint64_t number() {
    ws();
    if (i >= s.size() || !isdigit(static_cast<unsigned char>(s[i]))) fail("expected number");
    std::uint64_t v = 0;
    while (i < s.size() && isdigit(static_cast<unsigned char>(s[i])))
      v = v * 10 + static_cast<std::uint64_t>(s[i++] - '0');
    return v;
  }

  std::string ident() {
    ws();
    if (i >= s.size() || !(isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_'))
      fail("expected identifier");
    std::size_t start = i;
    while (i < s.size() &&
           (isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '\''))
      ++i;
    return s.substr(start, i - start);
  }

  TypeId type() {
    ws();
    if (i >= s.size()) fail("expected type");
    if (s[i] == '(') return after_source(seq_source());
    if (s[i] == '[') return after_source_r(mset_source());
    std::string name = ident();
    TypeId base;
    auto it = named.find(name);
    if (it != named.end()) base = it->second;
    else base = arena.atom(name);
    if (eat_arrow()) fail("plain arrow sources are not in the grammar; use (k.T) or [T]");
    return base;
  }

  TypeId after_source(SeqType seq) {
    if (!eat_arrow()) fail("expected -> after sequence source");
    TypeId tgt = type();
    return arena.sarrow(std::move(seq), tgt);
  }

  TypeId after_source_r(std::vector<MultEntry> mset) {
    if (!eat_arrow()) fail("expected -> after multiset source");
    TypeId tgt = type();
    return arena.rarrow(std::move(mset), tgt);
  }

  SeqType seq_source() {
    // '(' already peeked
    eat('(');
    SeqType seq;
    ws();
    if (eat(')')) return seq;
    while (true) {
      ws();
      if (i < s.size() && s[i] == '{') {
        ++i;
        // family: {k1,k2} or {a+dn}
        std::uint64_t first = number();
        ws();
        if (i < s.size() && s[i] == '+') {
          ++i;
          std::uint64_t step = number();
          ws();
          if (i >= s.size() || (s[i] != 'n' && s[i] != 'N')) fail("expected n in progression");
          ++i;
          if (!eat('}')) fail("expected }");
          if (!eat('.')) fail("expected . after family");
          TypeId ty = type();
          seq.families.push_back(Family{TrackSet::progression(first, step), ty});
        } else {
          std::vector<Track> ts;
          ts.emplace_back(first);
          while (eat(',')) ts.emplace_back(number());
          if (!eat('}')) fail("expected }");
          if (!eat('.')) fail("expected . after family");
          TypeId ty = type();
          seq.families.push_back(Family{TrackSet::of(std::move(ts)), ty});
        }
      } else {
        std::uint64_t track = number();
        if (!eat('.')) fail("expected . after track");
        TypeId ty = type();
        seq.entries.push_back(SeqEntry{Track(track), ty});
      }
      if (eat(')')) break;
      if (!eat(',')) fail("expected , or ) in sequence");
    }
    std::sort(seq.entries.begin(), seq.entries.end(),
              [](const SeqEntry& x, const SeqEntry& y) { return x.track < y.track; });
    return seq;
  }

  Mult mult_suffix() {
    // A '^' multiplicity: ^w or ^n.
    ++i;
    ws();
    if (i < s.size() && (s[i] == 'w' || s[i] == 'W')) {
      ++i;
      return Mult::omega();
    }
    return Mult(number());
  }

  std::vector<MultEntry> mset_source() {
    eat('[');
    std::vector<MultEntry> mset;
    ws();
    if (!eat(']')) {
      while (true) {
        TypeId ty = type();
        Mult m(1);
        ws();
        if (i < s.size() && s[i] == '^') m = mult_suffix();
        mset.push_back(MultEntry{ty, m});
        if (eat(']')) break;
        if (!eat(',')) fail("expected , or ] in multiset");
      }
    }
    ws();
    if (i < s.size() && s[i] == '^') {
      Mult m = mult_suffix();
      for (auto& e : mset) e.mult = m;
    }
    return mset;
  }
};

}  // namespace

TypeId parse_type(TypeArena& arena, const std::string& text) {
  // Split "name = ...;" equations from the root expression.
  std::map<std::string, TypeId> named;
  std::vector<std::pair<std::string, std::string>> eqs;
  std::string root = text;
  if (text.find('=') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t j = 0; j <= text.size(); ++j) {
      if (j == text.size() || text[j] == ';') {
        parts.push_back(text.substr(start, j - start));
        start = j + 1;
      }
    }
    root.clear();
    for (auto& p : parts) {
      auto eqpos = p.find('=');
      if (eqpos == std::string::npos) {
        if (!root.empty()) throw TypeParseError{0, "multiple root expressions"};
        root = p;
        continue;
      }
      std::string name = p.substr(0, eqpos);
      // trim
      auto trim = [](std::string& v) {
        while (!v.empty() && isspace(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
        while (!v.empty() && isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
      };
      trim(name);
      eqs.emplace_back(name, p.substr(eqpos + 1));
    }
    if (root.empty() && !eqs.empty()) root = eqs.back().first;
  }
  for (const auto& [name, rhs] : eqs) {
    (void)rhs;
    named[name] = arena.declare();
  }
  for (const auto& [name, rhs] : eqs) {
    TypeParser p(rhs, arena, named);
    TypeId body = p.type();
    p.ws();
    if (p.i != rhs.size()) throw TypeParseError{p.i, "trailing input in equation"};
    // Copy the parsed node into the declared hole.
    TypeNode node = arena.at(body);
    if (!node.defined) throw TypeParseError{0, "equation aliases another name directly"};
    arena.define(named[name], std::move(node));
  }
  TypeParser p(root, arena, named);
  TypeId id = p.type();
  p.ws();
  if (p.i != root.size()) throw TypeParseError{p.i, "trailing input"};
  return id;
}

TypeId parse_type_document(TypeArena& arena, const TypeDocument& doc) {
  std::ostringstream text;
  for (const auto& [k, v] : doc.equations) text << k << " = " << v << "; ";
  text << doc.root;
  return parse_type(arena, text.str());
}

}  // namespace infinitype
