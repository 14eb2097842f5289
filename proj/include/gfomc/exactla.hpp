#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfomc/rational.hpp"

namespace gfomc {

// Element of Q[sqrt(d)] for a fixed rational radicand d, stored as a + b*sqrt(d).
// d is kept verbatim (not square-free-reduced); equality is componentwise, so
// values built over different radicands compare unequal by design.
struct QuadNum {
  Rational a{0};
  Rational b{0};
  Rational d{0};

  QuadNum() = default;
  QuadNum(Rational a_, Rational b_, Rational d_) : a(std::move(a_)), b(std::move(b_)), d(std::move(d_)) {}
  static QuadNum from_rat(const Rational& r, const Rational& d_) { return QuadNum(r, Rational(0), d_); }

  bool operator==(const QuadNum& o) const { return a == o.a && b == o.b && d == o.d; }
  bool operator!=(const QuadNum& o) const { return !(*this == o); }
  bool is_zero() const { return a == 0 && b == 0; }
  bool is_rational() const { return b == 0; }
};

QuadNum quad_add(const QuadNum& x, const QuadNum& y);
QuadNum quad_sub(const QuadNum& x, const QuadNum& y);
QuadNum quad_mul(const QuadNum& x, const QuadNum& y);
QuadNum quad_scale(const Rational& r, const QuadNum& x);
// Multiplicative inverse; throws on zero divisors (a^2 - d b^2 = 0).
QuadNum quad_inv(const QuadNum& x);
QuadNum quad_div(const QuadNum& x, const QuadNum& y);
QuadNum quad_pow(const QuadNum& x, unsigned long e);
std::string quad_str(const QuadNum& x);

// Dense exact rational matrix, row major.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, Rational(0)) {}
  static RatMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Rational& at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  bool operator==(const RatMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

  RatMatrix mul(const RatMatrix& o) const;
  RatMatrix transpose() const;
  RatMatrix scale(const Rational& r) const;
  RatMatrix add(const RatMatrix& o) const;
  RatMatrix sub(const RatMatrix& o) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> a_;
};

Rational mat_det(const RatMatrix& m);

struct GaussResult {
  std::vector<Rational> solution;
  Rational det;
};

// Thrown when gauss_solve meets a singular matrix. Carries the rank and one
// nonzero null-space vector as a witness.
struct SingularMatrixError : std::runtime_error {
  std::size_t rank;
  std::vector<Rational> null_vector;
  SingularMatrixError(std::size_t rank_, std::vector<Rational> null_vector_);
};

// Solves A x = b exactly for square A; verifies the residual A x - b = 0
// before returning. Throws SingularMatrixError when det(A) = 0.
GaussResult gauss_solve(const RatMatrix& A, const std::vector<Rational>& b);

// Kronecker product. Row (i1,i2) -> i1*rows(B)+i2, column likewise.
RatMatrix kron(const RatMatrix& A, const RatMatrix& B);

// Solves (A kron B) x = rhs by two factor solves instead of one big
// elimination; exact, and equal to gauss_solve(kron(A,B), rhs).
std::vector<Rational> kron_solve(const RatMatrix& A, const RatMatrix& B, const std::vector<Rational>& rhs);

struct CauchyCheck {
  Rational det;
  Rational formula_value;
  bool equal = false;
};

// det[ 1/(c_i + z_j) ] against the closed product formula
// prod_{i<j}(c_i-c_j)(z_i-z_j) / prod_{i,j}(c_i+z_j).
// Requires c_i + z_j != 0 for every pair.
CauchyCheck cauchy_det_check(const std::vector<Rational>& c, const std::vector<Rational>& z);

struct EigenFlags {
  bool nonzero = false;             // both eigenvalues nonzero (det != 0)
  bool distinct = false;            // lambda1 != lambda2 (disc != 0)
  bool not_opposite = false;        // lambda1 != -lambda2 (trace != 0)
  bool real_distinct_dominant = false;  // disc > 0
};

struct QuadEigen {
  QuadNum lambda1;  // (trace - sqrt(disc)) / 2
  QuadNum lambda2;  // (trace + sqrt(disc)) / 2
  Rational trace;
  Rational det;
  Rational disc;  // trace^2 - 4 det
  EigenFlags flags;
};

// Eigenvalues of a 2x2 rational matrix in Q[sqrt(disc)].
QuadEigen quad_eigen(const RatMatrix& B);

struct SpectralCoeffs {
  // Entry (i,j) of A^(p) equals, for p >= 1,
  //   sum over the two eigenvalues of (coeff * lambda^p) right-multiplied by C^{-1};
  // a[i][j] pairs with lambda1, b[i][j] with lambda2, and at p = 0 the two
  // coefficient matrices sum to the identity.
  std::array<std::array<QuadNum, 2>, 2> a;
  std::array<std::array<QuadNum, 2>, 2> b;
  QuadEigen eigen;  // of B = A1 * C
};

// Spectral projector decomposition of B = A1 * C. Throws on a repeated
// eigenvalue (disc == 0) or singular B.
SpectralCoeffs spectral_coeffs(const RatMatrix& A1, const RatMatrix& C);

}  // namespace gfomc
