#include "infinitype/term.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace infinitype {

TermPtr Term::var(std::string n) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Var;
  t->name = std::move(n);
  return t;
}

TermPtr Term::abs(std::string n, TermPtr body) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Abs;
  t->name = std::move(n);
  t->child = std::move(body);
  return t;
}

TermPtr Term::app(TermPtr f, TermPtr a) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::App;
  t->fun = std::move(f);
  t->arg = std::move(a);
  return t;
}

namespace {

struct Parser {
  const std::string& s;
  std::size_t i = 0;

  explicit Parser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) { throw ParseError{i, msg}; }

  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r'))
      ++i;
  }

  bool at_lambda() {
    if (i < s.size() && s[i] == '\\') return true;
    // UTF-8 for the lambda letter
    return s.compare(i, 2, "\xce\xbb") == 0;
  }

  void eat_lambda() {
    if (s[i] == '\\') {
      ++i;
    } else {
      i += 2;
    }
  }

  static bool ident_char(char c) {
    return isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '#';
  }

  std::string ident() {
    skip_ws();
    if (i >= s.size() || !ident_char(s[i]) || isdigit(static_cast<unsigned char>(s[i])))
      fail("expected identifier");
    std::size_t start = i;
    while (i < s.size() && ident_char(s[i])) ++i;
    return s.substr(start, i - start);
  }

  TermPtr atom() {
    skip_ws();
    if (i >= s.size()) fail("unexpected end of input");
    if (s[i] == '(') {
      ++i;
      TermPtr t = expr();
      skip_ws();
      if (i >= s.size() || s[i] != ')') fail("expected ')'");
      ++i;
      return t;
    }
    if (at_lambda()) {
      eat_lambda();
      std::vector<std::string> binders;
      binders.push_back(ident());
      skip_ws();
      while (i < s.size() && s[i] != '.') {
        binders.push_back(ident());
        skip_ws();
      }
      if (i >= s.size() || s[i] != '.') fail("expected '.' after binder");
      ++i;
      TermPtr body = expr();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = Term::abs(*it, body);
      return body;
    }
    return Term::var(ident());
  }

  bool atom_follows() {
    skip_ws();
    if (i >= s.size()) return false;
    char c = s[i];
    return c == '(' || at_lambda() ||
           (Parser::ident_char(c) && !isdigit(static_cast<unsigned char>(c)));
  }

  TermPtr expr() {
    TermPtr t = atom();
    while (atom_follows()) t = Term::app(t, atom());
    return t;
  }

  TermPtr top() {
    TermPtr t = expr();
    skip_ws();
    if (i != s.size()) fail("trailing input");
    return t;
  }
};

}  // namespace

TermPtr parse_term(const std::string& text) { return Parser(text).top(); }

std::optional<TermPtr> try_parse_term(const std::string& text, ParseError* err) {
  try {
    return parse_term(text);
  } catch (const ParseError& e) {
    if (err) *err = e;
    return std::nullopt;
  }
}

namespace {

void pretty_rec(const TermPtr& t, std::ostringstream& out, bool fun_pos, bool arg_pos) {
  switch (t->kind) {
    case Term::Kind::Var:
      out << t->name;
      return;
    case Term::Kind::Abs: {
      bool paren = fun_pos || arg_pos;
      if (paren) out << '(';
      out << '\\' << t->name;
      TermPtr body = t->child;
      while (body->is_abs()) {
        out << ' ' << body->name;
        body = body->child;
      }
      out << ". ";
      pretty_rec(body, out, false, false);
      if (paren) out << ')';
      return;
    }
    case Term::Kind::App: {
      bool paren = arg_pos;
      if (paren) out << '(';
      pretty_rec(t->fun, out, true, false);
      out << ' ';
      pretty_rec(t->arg, out, false, true);
      if (paren) out << ')';
      return;
    }
  }
}

}  // namespace

std::string pretty(const TermPtr& t) {
  std::ostringstream out;
  pretty_rec(t, out, false, false);
  return out.str();
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Var:
      return a->name == b->name;
    case Term::Kind::Abs:
      return a->name == b->name && term_equal(a->child, b->child);
    case Term::Kind::App:
      return term_equal(a->fun, b->fun) && term_equal(a->arg, b->arg);
  }
  return false;
}

namespace {

bool alpha_rec(const TermPtr& a, const TermPtr& b,
               std::map<std::string, std::string>& ab,
               std::map<std::string, std::string>& ba) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Var: {
      auto ia = ab.find(a->name);
      auto ib = ba.find(b->name);
      if (ia == ab.end() && ib == ba.end()) return a->name == b->name;
      return ia != ab.end() && ib != ba.end() && ia->second == b->name &&
             ib->second == a->name;
    }
    case Term::Kind::Abs: {
      auto sa = ab.find(a->name), sb = ba.find(b->name);
      std::optional<std::string> olda, oldb;
      if (sa != ab.end()) olda = sa->second;
      if (sb != ba.end()) oldb = sb->second;
      ab[a->name] = b->name;
      ba[b->name] = a->name;
      bool ok = alpha_rec(a->child, b->child, ab, ba);
      if (olda) ab[a->name] = *olda; else ab.erase(a->name);
      if (oldb) ba[b->name] = *oldb; else ba.erase(b->name);
      return ok;
    }
    case Term::Kind::App:
      return alpha_rec(a->fun, b->fun, ab, ba) && alpha_rec(a->arg, b->arg, ab, ba);
  }
  return false;
}

}  // namespace

bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  std::map<std::string, std::string> ab, ba;
  return alpha_rec(a, b, ab, ba);
}

std::size_t term_size(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var: return 1;
    case Term::Kind::Abs: return 1 + term_size(t->child);
    case Term::Kind::App: return 1 + term_size(t->fun) + term_size(t->arg);
  }
  return 0;
}

namespace {

void support_rec(const TermPtr& t, Word& here, std::set<Word>& out) {
  out.insert(here);
  switch (t->kind) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Abs:
      here.letters.emplace_back(std::uint64_t{0});
      support_rec(t->child, here, out);
      here.letters.pop_back();
      return;
    case Term::Kind::App:
      here.letters.emplace_back(std::uint64_t{1});
      support_rec(t->fun, here, out);
      here.letters.back() = Track(2);
      support_rec(t->arg, here, out);
      here.letters.pop_back();
      return;
  }
}

}  // namespace

std::set<Word> support(const TermPtr& t) {
  std::set<Word> out;
  Word here;
  support_rec(t, here, out);
  return out;
}

std::optional<TermPtr> subterm_at(const TermPtr& t, const Word& a) {
  TermPtr cur = t;
  for (const auto& letter : a.letters) {
    std::uint64_t k = letter.collapse();
    switch (cur->kind) {
      case Term::Kind::Var:
        return std::nullopt;
      case Term::Kind::Abs:
        if (k != 0) return std::nullopt;
        cur = cur->child;
        break;
      case Term::Kind::App:
        if (k == 1) cur = cur->fun;
        else if (k == 2) cur = cur->arg;
        else return std::nullopt;
        break;
    }
  }
  return cur;
}

std::optional<Constructor> constructor_at(const TermPtr& t, const Word& a) {
  auto sub = subterm_at(t, a);
  if (!sub) return std::nullopt;
  switch ((*sub)->kind) {
    case Term::Kind::Var: return Constructor::Var;
    case Term::Kind::Abs: return Constructor::Abs;
    case Term::Kind::App: return Constructor::App;
  }
  return std::nullopt;
}

std::optional<std::string> name_at(const TermPtr& t, const Word& a) {
  auto sub = subterm_at(t, a);
  if (!sub || (*sub)->is_app()) return std::nullopt;
  return (*sub)->name;
}

bool in_support(const TermPtr& t, const Word& a) {
  return subterm_at(t, a).has_value();
}

namespace {

void free_vars_rec(const TermPtr& t, std::set<std::string>& bound,
                   std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case Term::Kind::Abs: {
      bool fresh = bound.insert(t->name).second;
      free_vars_rec(t->child, bound, out);
      if (fresh) bound.erase(t->name);
      return;
    }
    case Term::Kind::App:
      free_vars_rec(t->fun, bound, out);
      free_vars_rec(t->arg, bound, out);
      return;
  }
}

void all_vars_rec(const TermPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::Var: out.insert(t->name); return;
    case Term::Kind::Abs:
      out.insert(t->name);
      all_vars_rec(t->child, out);
      return;
    case Term::Kind::App:
      all_vars_rec(t->fun, out);
      all_vars_rec(t->arg, out);
      return;
  }
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string stem = base;
  auto hash = stem.find('#');
  if (hash != std::string::npos) stem = stem.substr(0, hash);
  for (std::uint64_t n = 0;; ++n) {
    std::string cand = stem + "#" + std::to_string(n);
    if (!avoid.count(cand)) return cand;
  }
}

TermPtr subst_rec(const TermPtr& t, const std::string& x, const TermPtr& s,
                  const std::set<std::string>& fv_s) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name == x ? s : t;
    case Term::Kind::Abs: {
      if (t->name == x) return t;  // x is shadowed
      if (fv_s.count(t->name)) {
        std::set<std::string> avoid = fv_s;
        all_vars_rec(t->child, avoid);
        avoid.insert(x);
        std::string y = fresh_name(t->name, avoid);
        TermPtr renamed = subst_rec(t->child, t->name, Term::var(y), {});
        return Term::abs(y, subst_rec(renamed, x, s, fv_s));
      }
      return Term::abs(t->name, subst_rec(t->child, x, s, fv_s));
    }
    case Term::Kind::App:
      return Term::app(subst_rec(t->fun, x, s, fv_s), subst_rec(t->arg, x, s, fv_s));
  }
  return t;
}

}  // namespace

TermPtr substitute(const TermPtr& t, const std::string& x, const TermPtr& s) {
  return subst_rec(t, x, s, free_vars(s));
}

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> bound, out;
  free_vars_rec(t, bound, out);
  return out;
}

bool is_redex_at(const TermPtr& t, const Word& b) {
  auto sub = subterm_at(t, b);
  return sub && (*sub)->is_app() && (*sub)->fun->is_abs();
}

namespace {

void redexes_rec(const TermPtr& t, Word& here, std::vector<Word>& out) {
  switch (t->kind) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Abs:
      here.letters.emplace_back(std::uint64_t{0});
      redexes_rec(t->child, here, out);
      here.letters.pop_back();
      return;
    case Term::Kind::App:
      if (t->fun->is_abs()) out.push_back(here);
      here.letters.emplace_back(std::uint64_t{1});
      redexes_rec(t->fun, here, out);
      here.letters.back() = Track(2);
      redexes_rec(t->arg, here, out);
      here.letters.pop_back();
      return;
  }
}

// Positions of the free occurrences of x in t.
void occurrences_rec(const TermPtr& t, const std::string& x, Word& here,
                     std::vector<Word>& out) {
  switch (t->kind) {
    case Term::Kind::Var:
      if (t->name == x) out.push_back(here);
      return;
    case Term::Kind::Abs:
      if (t->name == x) return;
      here.letters.emplace_back(std::uint64_t{0});
      occurrences_rec(t->child, x, here, out);
      here.letters.pop_back();
      return;
    case Term::Kind::App:
      here.letters.emplace_back(std::uint64_t{1});
      occurrences_rec(t->fun, x, here, out);
      here.letters.back() = Track(2);
      occurrences_rec(t->arg, x, here, out);
      here.letters.pop_back();
      return;
  }
}

TermPtr beta_rec(const TermPtr& t, const Word& b, std::size_t depth,
                 std::vector<Word>* occurrences) {
  if (depth == b.size()) {
    if (!t->is_app() || !t->fun->is_abs()) throw ParseError{0, "not a redex"};
    const TermPtr& lam = t->fun;
    if (occurrences) {
      Word here;
      occurrences_rec(lam->child, lam->name, here, *occurrences);
    }
    return substitute(lam->child, lam->name, t->arg);
  }
  std::uint64_t k = b.letters[depth].collapse();
  switch (t->kind) {
    case Term::Kind::Var:
      throw ParseError{0, "position out of support"};
    case Term::Kind::Abs:
      if (k != 0) throw ParseError{0, "position out of support"};
      return Term::abs(t->name, beta_rec(t->child, b, depth + 1, occurrences));
    case Term::Kind::App:
      if (k == 1) return Term::app(beta_rec(t->fun, b, depth + 1, occurrences), t->arg);
      if (k == 2) return Term::app(t->fun, beta_rec(t->arg, b, depth + 1, occurrences));
      throw ParseError{0, "position out of support"};
  }
  throw ParseError{0, "unreachable"};
}

}  // namespace

std::vector<Word> redex_positions(const TermPtr& t) {
  std::vector<Word> out;
  Word here;
  redexes_rec(t, here, out);
  return out;
}

TermPtr beta_reduce_at(const TermPtr& t, const Word& b, std::vector<Word>* occurrences) {
  return beta_rec(t, b, 0, occurrences);
}

std::optional<RedexTowerReport> redex_tower_at(const TermPtr& t, const Word& b) {
  auto c = constructor_at(t, b);
  if (!c || *c != Constructor::App) return std::nullopt;

  // Walk the ascendants of b: position a.1 above an application, a.0 above
  // an abstraction. The consumption degree gains one arrow per application
  // passed and spends one per abstraction passed; each return to 0 marks an
  // abstraction completing a tower. The walk stops at a variable or when
  // the degree would drop below 0.
  Word cur = b;
  int cdeg = 0;
  std::size_t steps = 0;
  std::vector<int> trace;
  std::vector<std::size_t> zeros;
  std::vector<Word> lambdas;
  while (true) {
    auto cc = constructor_at(t, cur);
    if (!cc || *cc == Constructor::Var) break;
    Word node = cur;
    if (*cc == Constructor::App) {
      cur = cur.append_small(1);
      ++cdeg;
    } else {
      cur = cur.append_small(0);
      --cdeg;
    }
    ++steps;
    if (cdeg < 0) break;
    trace.push_back(cdeg);
    if (cdeg == 0) {
      zeros.push_back(steps);
      lambdas.push_back(node);
    }
  }
  if (zeros.empty()) return std::nullopt;
  RedexTowerReport rep;
  rep.root = b;
  rep.height = zeros.front() - 1;      // the matching abstraction's index
  rep.lambda_position = lambdas.front();
  rep.cdeg_trace = std::move(trace);
  rep.strict_tower = zeros.size() == 1;  // further zeros stack more towers
  return rep;
}

std::optional<Word> leftmost_outermost_redex(const TermPtr& t) {
  // redexes_rec collects in pre-order, node before children and function
  // before argument, so the first entry is the normal-order redex.
  auto rs = redex_positions(t);
  if (rs.empty()) return std::nullopt;
  return rs.front();
}

std::size_t leading_lambdas(const TermPtr& t) {
  std::size_t n = 0;
  TermPtr cur = t;
  while (cur->is_abs()) {
    ++n;
    cur = cur->child;
  }
  return n;
}

bool is_head_normal(const TermPtr& t) {
  TermPtr cur = t;
  while (cur->is_abs()) cur = cur->child;
  while (cur->is_app()) cur = cur->fun;
  return cur->is_var();
}

OrderBound order_bounded(const TermPtr& t, std::size_t fuel) {
  OrderBound out;
  TermPtr cur = t;
  for (std::size_t step = 0;; ++step) {
    out.lower_bound = std::max(out.lower_bound, leading_lambdas(cur));
    if (is_head_normal(cur)) {
      // The head variable blocks any further abstraction from appearing.
      out.exact = true;
      return out;
    }
    if (step == fuel) return out;
    auto r = leftmost_outermost_redex(cur);
    if (!r) {
      out.exact = true;  // normal form without head variable cannot occur
      return out;
    }
    cur = beta_reduce_at(cur, *r);
  }
}

}  // namespace infinitype
