#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfomc/formula.hpp"

namespace gfomc {

// Two-variable universal CNF sentences over a vocabulary of one optional
// unary symbol on each side ("R" on the left, "T" on the right) and any
// number of binary symbols. A symbol name other than R/T is binary.
using Symbol = std::string;

enum class ClauseKind {
  LeftI,       // forall x forall y (R(x) | S_J(x,y)), J nonempty
  LeftII,      // forall x (forall y S_J1 | ... | forall y S_Jm), m > 1
  Middle,      // forall x forall y S_J(x,y)
  RightI,      // forall x forall y (S_J(x,y) | T(y))
  RightII,     // forall y (forall x S_J1 | ... | forall x S_Jn), n > 1
  UnaryLeft,   // forall x R(x)      (shows up after rewrites)
  UnaryRight,  // forall y T(y)
  Invalid,     // grammatical but outside the five shapes (e.g. R and T together)
};

struct Clause {
  ClauseKind kind = ClauseKind::Invalid;
  // head: 'b' = forall x forall y (flat), 'x' = forall x (...), 'y' = forall y (...)
  char head = 'b';
  bool has_R = false;
  bool has_T = false;
  // Binary symbols per subclause. Flat clauses have exactly one entry
  // (possibly empty for the unary kinds). Misplaced unary atoms inside a
  // type-II subclause are kept in the set verbatim and force Invalid.
  std::vector<std::set<Symbol>> subclauses;

  std::set<Symbol> symbols() const;
  bool is_left() const;   // LeftI, LeftII or UnaryLeft
  bool is_right() const;
  bool is_proper_left() const;   // LeftI or LeftII
  bool is_proper_right() const;
  std::string str() const;
  bool operator==(const Clause& o) const;
};

struct Query {
  bool constant_true = false;
  bool constant_false = false;
  std::vector<Clause> clauses;

  bool is_constant() const { return constant_true || constant_false; }
  std::set<Symbol> symbols() const;
  std::set<Symbol> binary_symbols() const;
  std::string str() const;
  bool operator==(const Query& o) const;
};

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_);
};

Query parse_query(const std::string& text);

// Recomputes the kind a clause has after structural normalization (R factored
// out of forall-y subclauses, singleton type-II flattened, absorbed
// subclauses dropped). Exposed for tests.
Clause normalize_clause(Clause c);

// True when c logically implies d (both universally closed). Complete for
// the clause shapes above except Invalid, which never participates.
bool clause_implies(const Clause& c, const Clause& d);

Query minimize_query(const Query& q);

Query rewrite_symbol(const Query& q, const Symbol& s, int value);

struct ClassReport {
  bool bipartite = false;
  char left_type = '-';   // 'I', '2' (type II), '-' (none)
  char right_type = '-';
  bool safe = true;
  bool unsafe = false;
  std::optional<std::size_t> length;            // edges in a minimal path
  std::optional<std::vector<std::size_t>> witness_path;  // clause indices
  bool final_query = false;
  bool forbidden = false;
  std::set<Symbol> ubiquitous_left;
  std::set<Symbol> ubiquitous_right;
  std::string diagnostics;
};

ClassReport classify(const Query& q);

struct ForbiddenReport {
  bool applicable = false;
  bool forbidden = false;
  std::set<Symbol> ubiquitous_left;
  std::set<Symbol> ubiquitous_right;
  std::vector<std::string> violations;
};

ForbiddenReport forbidden_report(const Query& q);

// Rewrites an unsafe bipartite query into one whose minimal left-right paths
// are at least twice as long, over a duplicated vocabulary: copies of a
// binary S are named S"c1".."cn", the first and last R-copies collapse to
// the unary R and T of the new query, intermediate R-copies are binary
// "Rc2".."Rc<n-1>", and T becomes the binary "Tc12".
Query zigzag_query(const Query& q);

// Number of symbol layers the zig-zag rewrite uses: 2 when the right part is
// pure type I, otherwise at least 3 and at least the widest right disjunction.
std::size_t zigzag_layers(const Query& q);

struct GhDecomposition {
  std::vector<CnfFormula> g;  // one entry per distinct product of left subclauses
  std::vector<CnfFormula> h;
  CnfFormula c;               // conjunction of the middle clauses
};

GhDecomposition gh_decomposition(const Query& q);

struct Lattice {
  // Closed subsets of {1..m}, 1-based, sorted by (size, lexicographic);
  // element 0 is the empty set, the top of the reverse-inclusion order.
  std::vector<std::set<std::size_t>> elements;
  std::vector<long> mobius;
  std::vector<CnfFormula> formulas;       // conjunction over the element (true for the top)
  std::vector<std::size_t> support;       // indices with mobius != 0

  std::size_t index_of(const std::set<std::size_t>& alpha) const;
  bool contains(const std::set<std::size_t>& alpha) const;
};

Lattice build_lattice(const std::vector<CnfFormula>& formulas);

// The sentence G_alpha(x) & Q & H_beta(y) in clause form; the empty set
// denotes the lattice top on either side.
Query q_alpha_beta(const Query& q, const std::set<std::size_t>& alpha,
                   const std::set<std::size_t>& beta);

}  // namespace gfomc
