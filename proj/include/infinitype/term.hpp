#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "infinitype/track.hpp"

namespace infinitype {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Finite lambda-terms. Abstraction bodies live on track 0, application
// functions on track 1 and application arguments on track 2.
struct Term {
  enum class Kind { Var, Abs, App };

  Kind kind;
  std::string name;       // Var: the variable; Abs: the binder
  TermPtr child;          // Abs body
  TermPtr fun, arg;       // App children

  static TermPtr var(std::string n);
  static TermPtr abs(std::string n, TermPtr body);
  static TermPtr app(TermPtr f, TermPtr a);

  bool is_var() const { return kind == Kind::Var; }
  bool is_abs() const { return kind == Kind::Abs; }
  bool is_app() const { return kind == Kind::App; }
};

struct ParseError {
  std::size_t offset;  // byte offset into the input
  std::string message;
};

// Grammar: `var`, `\x. M` (also `λx. M`), application by juxtaposition
// (left-associative), parentheses. `\x y. M` abbreviates `\x. \y. M`.
TermPtr parse_term(const std::string& text);                    // throws ParseError
std::optional<TermPtr> try_parse_term(const std::string& text,
                                      ParseError* err = nullptr);

std::string pretty(const TermPtr& t);

bool term_equal(const TermPtr& a, const TermPtr& b);       // syntactic
bool alpha_equal(const TermPtr& a, const TermPtr& b);
std::size_t term_size(const TermPtr& t);

// The support of a term: a finite, prefix-closed set of {0,1,2}-words.
std::set<Word> support(const TermPtr& t);

// Subterm and constructor at a position whose collapse lies in the
// support. Returns nothing if the position is out of support.
std::optional<TermPtr> subterm_at(const TermPtr& t, const Word& a);
enum class Constructor { Var, Abs, App };
std::optional<Constructor> constructor_at(const TermPtr& t, const Word& a);
// Variable or binder name at a position labelled Var/Abs.
std::optional<std::string> name_at(const TermPtr& t, const Word& a);

bool in_support(const TermPtr& t, const Word& a);  // collapse(a) in supp(t)

std::set<std::string> free_vars(const TermPtr& t);
bool is_redex_at(const TermPtr& t, const Word& b);
std::vector<Word> redex_positions(const TermPtr& t);

// Capture-avoiding substitution t[x := s]; fresh names are drawn
// deterministically from a counter suffix.
TermPtr substitute(const TermPtr& t, const std::string& x, const TermPtr& s);

// One beta step at position b (which must collapse to a redex).
// `occurrences`, when given, receives the positions inside the contractum
// where the argument has been substituted (relative to b), i.e. the
// positions of the bound variable in the body before the step.
TermPtr beta_reduce_at(const TermPtr& t, const Word& b,
                       std::vector<Word>* occurrences = nullptr);

// Redex towers. Tower height h means the abstraction matching the
// application at b sits h ascendant steps above it; the consumption
// degree trace records, position by position, how many arrows separate
// the type at each ascendant from the type at b.
struct RedexTowerReport {
  Word root;                        // b, with t(b) = @
  std::size_t height = 0;           // >= 1; 1 means a plain redex
  std::vector<int> cdeg_trace;      // cdeg at asc^1(b) .. asc^{height+1}(b)
  bool strict_tower = false;        // single tower vs tower sequence above
  Word lambda_position;             // asc^height(b), an abstraction
};

std::optional<RedexTowerReport> redex_tower_at(const TermPtr& t, const Word& b);

// Leftmost-outermost (head-first) redex position, if any.
std::optional<Word> leftmost_outermost_redex(const TermPtr& t);

// Number of leading abstractions.
std::size_t leading_lambdas(const TermPtr& t);

// Head normal form shape: \x1...xp. x u1 ... uq.
bool is_head_normal(const TermPtr& t);

struct OrderBound {
  std::size_t lower_bound = 0;
  bool exact = false;
};

// Best-effort order estimation: reduce leftmost-outermost for at most
// `fuel` steps, take the max leading-lambda count over the reducts, and
// certify exactness only when a reduct is head normal (its body can
// never produce further abstractions).
OrderBound order_bounded(const TermPtr& t, std::size_t fuel);

}  // namespace infinitype
