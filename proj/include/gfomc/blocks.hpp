#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gfomc/exactla.hpp"
#include "gfomc/formula.hpp"
#include "gfomc/lineage.hpp"
#include "gfomc/query.hpp"
#include "gfomc/tid.hpp"

namespace gfomc {

// z_ab(1) for the length-one zig-zag block of q with every tuple at c.
// Entry (a,b) conditions the block on R(u) = a, R(v) = b. Meaningful for
// final unsafe I-I queries; anything else still produces the matrix but
// sets *warning when given.
RatMatrix a1_matrix(const Query& q, const Rational& c, std::string* warning = nullptr);

// A^(p) = (A^(1) C)^(p-1) A^(1) with C = diag(1-c, c); p = 0 is the identity.
RatMatrix ap_matrix(const RatMatrix& a1, const Rational& c, int p);

struct FaForm {
  bool attempted = false;  // skipped when the block has more than 14 free variables
  Rational alpha;          // coefficient of the monomial with every variable once
  bool matches_product_form = false;  // det A^(1)[symbolic] == alpha * prod u(1-u)
};

// Conditions a1/b must satisfy for the interpolation arguments downstream.
// Sequences are indexed 0 -> z_00(p), 1 -> z_01(p) (= z_10), 2 -> z_11(p);
// each condition is checked both on the Q[sqrt(disc)] spectral coefficients
// and on the rational sequence values, and a disagreement between the two
// throws std::logic_error.
struct DesignReport {
  RatMatrix a1{2, 2};
  RatMatrix b{2, 2};  // a1 * diag(1-c, c)
  QuadEigen eigen;
  bool ordering_ok = false;  // 0 < z_00 < z_01 = z_10 < z_11 <= 1
  bool lambda_ok = false;    // eigenvalues nonzero, distinct, not opposite
  std::array<bool, 3> b_nonzero{};          // lambda2 coefficient of each sequence
  std::array<bool, 3> cross_products_ok{};  // a_i b_j != a_j b_i for pairs (0,1),(0,2),(1,2)
  FaForm fa_form;
  std::vector<std::string> failures;  // one line per failed condition

  bool all_ok() const { return failures.empty(); }
};

DesignReport design_report(const Query& q, const Rational& c);

// (n+1) x (n+1) pendant system: row t = t_start..t_start+n, column q = 0..n,
// entry (c y_1(t))^q ((1-c) y_0(t))^(n-q) with y_a(t) folded from A^(t) rows
// per mode. Throws std::domain_error when singular; the message lists the
// per-row quotients c y_1 / ((1-c) y_0) whose collision caused it.
RatMatrix pendant_matrix(const Query& q, const Rational& c, int n, PendantMode mode,
                         int t_start = 1);

// (m+1)^2 x (m+1)^2 edge system for two parallel branches: row (p1,p2) in
// {p_start..p_start+m}^2 row-major, column (k10,k11) in {0..m}^2 row-major,
// entry y00^k00 y10^k10 y11^k11 with y_ab = z_ab(p1) z_ab(p2) and
// k00 = m - k10 - k11 taken as a (possibly negative) rational power.
// Throws std::domain_error when y00 vanishes or the matrix is singular.
RatMatrix grid_matrix(const Query& q, const Rational& c, int m, int p_start = 1);

// The zig-zag interior of a type-2 block on its own: path r0 - t0 - r1 - ...
// with plain node names, dead-end branches e{j}@r{i} on r1..rp and f{j}@t{i}
// on t0..t(p-1), one branch per subclause beyond the second. Block tuples at
// c, everything else at the default 1.
Tid zigzag_portion(const Query& q, int p, const Rational& c = Rational(1, 2));

struct Theta0Class {
  std::string symbol;
  char side;   // 'l' for e-branches off r-nodes, 'r' for f-branches off t-nodes
  int branch;  // j >= 1
  int value;   // 0 or 1, -1 when neither keeps the anchors connected
};

struct Theta0Result {
  std::vector<Theta0Class> classes;        // every dead-end class, in search order
  std::map<std::string, Rational> theta0;  // portion tuples of the decided classes
};

// Per dead-end equivalence class, the first value in {1,0} whose class-wide
// substitution keeps U(r0,t0) and V(rp,tp) in one connected component of
// every restricted lineage Y_ab over the portion. Classes are visited by
// symbol, then side, then branch index.
Theta0Result theta0_search(const Query& q, int p);

// u . diag(1-s0,s0) . z1 . diag(1-s1,s1) ... zp . diag(1-sp,sp) . v.
// Requires s.size() == z.size() + 1 and 2x2 factors.
Rational chain_eval(const std::array<Rational, 2>& u, const std::vector<RatMatrix>& z,
                    const std::array<Rational, 2>& v, const std::vector<Rational>& s);

struct DetDResult {
  std::map<std::string, Rational> assignment;  // prefix/suffix tuples -> {0, 1/2, 1}
  Rational det;                                // nonzero
  std::array<Rational, 2> y_first;             // (y^(0), y^(1)) for the first pair
  std::array<Rational, 2> y_second;
};

// Searches the free prefix/suffix tuples of the single-branch blocks
// B^(0)(u,v), B^(1)(u,v) for values making
//   det [ y^(0)_{a1 b1}  y^(0)_{a2 b2} ; y^(1)_{a1 b1}  y^(1)_{a2 b2} ]
// nonzero, with the interior pinned by theta0 and 1/2. Pairs index lattice
// elements of the left/right subclause lattices and must differ. Refuses
// more than 18 free variables; throws std::runtime_error when no
// distinguishing assignment is found.
DetDResult detD_search(const Query& q, std::pair<std::size_t, std::size_t> pair1,
                       std::pair<std::size_t, std::size_t> pair2);

struct ExponentPoint {
  std::vector<unsigned long long> k;  // one exponent per polynomial
  ProbMap point;                      // prod_i v_i^{k_i} componentwise
};

// Exponents k_i >= 1 such that every f_j is nonzero at the componentwise
// product prod v_i^{k_i}. Points must have positive coordinates covering
// each polynomial's variables, and f_i(v_i) != 0.
ExponentPoint products_exponent_search(const std::vector<Poly>& f,
                                       const std::vector<ProbMap>& points);

}  // namespace gfomc
