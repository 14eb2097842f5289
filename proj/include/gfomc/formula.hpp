#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gfomc/rational.hpp"

namespace gfomc {

using VarId = std::string;
using ProbMap = std::map<VarId, Rational>;

// Monotone CNF over positive atoms. Kept canonical: clauses sorted and
// deduplicated, each clause sorted and duplicate-free. A formula is either
// constant true (no clauses), constant false, or a nonempty clause list.
class CnfFormula {
 public:
  CnfFormula() = default;  // constant true
  static CnfFormula constant(bool value);
  static CnfFormula from_clauses(std::vector<std::vector<VarId>> clauses);

  bool is_true() const { return !false_ && clauses_.empty(); }
  bool is_false() const { return false_; }
  bool is_constant() const { return false_ || clauses_.empty(); }
  const std::vector<std::vector<VarId>>& clauses() const { return clauses_; }

  std::set<VarId> vars() const;
  std::string key() const;  // canonical serialization
  bool operator==(const CnfFormula& o) const { return false_ == o.false_ && clauses_ == o.clauses_; }
  bool operator<(const CnfFormula& o) const;

  // Conjunction (clause union, then canonicalize).
  CnfFormula conjoin(const CnfFormula& o) const;

 private:
  std::vector<std::vector<VarId>> clauses_;
  bool false_ = false;
};

// Partial 0/1 substitution: true atoms satisfy their clauses, false atoms
// drop out; an emptied clause makes the formula false.
CnfFormula substitute(const CnfFormula& f, const std::map<VarId, bool>& bindings);

// Removes clauses that are supersets of other clauses. For monotone CNFs the
// result is the canonical prime-implicate form.
CnfFormula subsume_reduce(const CnfFormula& f);

// Connected components of the subsumption-reduced formula (variables linked
// by sharing a clause). Constants yield an empty list.
std::vector<CnfFormula> connectivity(const CnfFormula& f);

// Pr over independent atoms: atom v true with probability p[v]. p must cover
// vars(f); probabilities 0/1 are substituted away first.
Rational weighted_count(const CnfFormula& f, const ProbMap& p);

// Sparse exact polynomial with positive integer exponents.
struct Poly {
  using Monomial = std::vector<std::pair<VarId, std::uint32_t>>;  // sorted by var
  std::map<Monomial, Rational> terms;  // no zero coefficients

  static Poly zero() { return {}; }
  static Poly constant(const Rational& r);
  static Poly var(const VarId& v);

  bool is_zero() const { return terms.empty(); }
  bool operator==(const Poly& o) const { return terms == o.terms; }
  std::set<VarId> vars() const;
  std::uint32_t degree_in(const VarId& v) const;
  bool is_multilinear() const;

  Poly add(const Poly& o) const;
  Poly sub(const Poly& o) const;
  Poly neg() const;
  Poly mul(const Poly& o) const;
  Poly scale(const Rational& r) const;
  Rational eval(const ProbMap& point) const;  // total evaluation
  std::string str() const;
};

// Substitutes values for some variables, keeping the rest symbolic.
Poly poly_eval(const Poly& p, const ProbMap& partial);

// Coefficient polynomials of p viewed as a polynomial in v:
// p = sum_i out[i] * v^i; out has degree_in(v)+1 entries.
std::vector<Poly> poly_coeffs_in(const Poly& p, const VarId& v);

// Unique multilinear polynomial agreeing with f on 0/1 points. Refuses
// formulas with more variables than the cap (default 18, override with
// GFOMC_MAX_VARS).
Poly arithmetize(const CnfFormula& f);
Poly arithmetize(const CnfFormula& f, std::size_t var_cap);

// det [[y00, y01],[y10, y11]] with y_ab = arithmetize(f[r:=a, t:=b]).
Poly small_matrix_det(const CnfFormula& f, const VarId& r, const VarId& t);

// For p with per-variable degree <= 2 and p not identically zero, returns an
// assignment theta out of the 3 given pairwise distinct constants per
// variable with p[theta] != 0. Variables absent from p are left unassigned.
// Throws std::domain_error("identically zero") when p == 0.
ProbMap find_nonroot(const Poly& p, const std::array<Rational, 3>& consts);
ProbMap find_nonroot(const Poly& p);  // constants {0, 1/2, 1}

struct DisconnectReport {
  bool disconnects = false;
  std::set<VarId> migrating;
};

// Whether both f[x:=0] and f[x:=1] leave no connected component containing a
// u-variable and a v-variable together. migrating lists variables y outside
// u, v, {x} that can be attached to neither side: adding y to u breaks the
// separation, and so does adding y to v.
DisconnectReport var_disconnects(const CnfFormula& f, const VarId& x,
                                 const std::set<VarId>& u, const std::set<VarId>& v);

// Conditional independence of the variable sets a and b given the assignment
// of the variables in c, under the distribution Pr(. | f) with atom
// probabilities p. Throws on Pr(f) = 0 ("conditioning on null event").
bool ci_sets(const CnfFormula& f, const ProbMap& p, const std::set<VarId>& a,
             const std::set<VarId>& b, const std::set<VarId>& c);

// ci_sets specialized to a single conditioning variable.
bool cond_independent(const CnfFormula& f, const std::set<VarId>& u,
                      const std::set<VarId>& v, const VarId& x, const ProbMap& p);

// Brute-force cap override: value of GFOMC_MAX_VARS if set, else fallback.
std::size_t max_vars_cap(std::size_t fallback);

}  // namespace gfomc
