#include "gfomc/exactla.hpp"

#include <sstream>

namespace gfomc {

namespace {

void require_same_field(const QuadNum& x, const QuadNum& y) {
  // Rational values embed into any Q[sqrt(d)], so only genuine radicals clash.
  if (x.b != 0 && y.b != 0 && x.d != y.d)
    throw std::invalid_argument("mixed radicands in QuadNum arithmetic");
}

Rational pick_d(const QuadNum& x, const QuadNum& y) {
  return x.b != 0 ? x.d : y.d;
}

}  // namespace

QuadNum quad_add(const QuadNum& x, const QuadNum& y) {
  require_same_field(x, y);
  return QuadNum(x.a + y.a, x.b + y.b, pick_d(x, y));
}

QuadNum quad_sub(const QuadNum& x, const QuadNum& y) {
  require_same_field(x, y);
  return QuadNum(x.a - y.a, x.b - y.b, pick_d(x, y));
}

QuadNum quad_mul(const QuadNum& x, const QuadNum& y) {
  require_same_field(x, y);
  Rational d = pick_d(x, y);
  return QuadNum(x.a * y.a + x.b * y.b * d, x.a * y.b + x.b * y.a, d);
}

QuadNum quad_scale(const Rational& r, const QuadNum& x) {
  return QuadNum(r * x.a, r * x.b, x.d);
}

QuadNum quad_inv(const QuadNum& x) {
  Rational norm = x.a * x.a - x.b * x.b * x.d;
  if (norm == 0) throw std::domain_error("QuadNum has no inverse (zero divisor)");
  return QuadNum(x.a / norm, -x.b / norm, x.d);
}

QuadNum quad_div(const QuadNum& x, const QuadNum& y) {
  require_same_field(x, y);
  QuadNum inv = quad_inv(QuadNum(y.a, y.b, pick_d(x, y)));
  return quad_mul(QuadNum(x.a, x.b, inv.d), inv);
}

QuadNum quad_pow(const QuadNum& x, unsigned long e) {
  QuadNum acc = QuadNum::from_rat(Rational(1), x.d);
  QuadNum base = x;
  while (e > 0) {
    if (e & 1UL) acc = quad_mul(acc, base);
    base = quad_mul(base, base);
    e >>= 1UL;
  }
  return acc;
}

std::string quad_str(const QuadNum& x) {
  std::ostringstream os;
  os << rat_str(x.a);
  if (x.b != 0) os << " + " << rat_str(x.b) << "*sqrt(" << rat_str(x.d) << ")";
  return os.str();
}

RatMatrix RatMatrix::identity(std::size_t n) {
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

RatMatrix RatMatrix::mul(const RatMatrix& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("matrix product shape mismatch");
  RatMatrix out(rows_, o.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const Rational& v = at(i, k);
      if (v == 0) continue;
      for (std::size_t j = 0; j < o.cols_; ++j) out.at(i, j) += v * o.at(k, j);
    }
  return out;
}

RatMatrix RatMatrix::transpose() const {
  RatMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out.at(j, i) = at(i, j);
  return out;
}

RatMatrix RatMatrix::scale(const Rational& r) const {
  RatMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out.at(i, j) = at(i, j) * r;
  return out;
}

RatMatrix RatMatrix::add(const RatMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix sum shape mismatch");
  RatMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out.at(i, j) = at(i, j) + o.at(i, j);
  return out;
}

RatMatrix RatMatrix::sub(const RatMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix diff shape mismatch");
  RatMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out.at(i, j) = at(i, j) - o.at(i, j);
  return out;
}

SingularMatrixError::SingularMatrixError(std::size_t rank_, std::vector<Rational> null_vector_)
    : std::runtime_error("singular matrix (rank " + std::to_string(rank_) + ")"),
      rank(rank_),
      null_vector(std::move(null_vector_)) {}

namespace {

// Ordinary Gauss-Jordan over Q. Returns reduced rows, pivot columns and det.
struct Elim {
  RatMatrix m;                     // reduced row echelon form
  std::vector<std::size_t> pivot;  // pivot column per pivot row
  Rational det;                    // defined for square input
};

Elim eliminate(RatMatrix m) {
  Elim e{m, {}, Rational(1)};
  std::size_t r = 0;
  for (std::size_t col = 0; col < e.m.cols() && r < e.m.rows(); ++col) {
    std::size_t sel = r;
    while (sel < e.m.rows() && e.m.at(sel, col) == 0) ++sel;
    if (sel == e.m.rows()) continue;
    if (sel != r) {
      for (std::size_t j = 0; j < e.m.cols(); ++j) std::swap(e.m.at(sel, j), e.m.at(r, j));
      e.det = -e.det;
    }
    Rational p = e.m.at(r, col);
    e.det *= p;
    for (std::size_t j = col; j < e.m.cols(); ++j) e.m.at(r, j) /= p;
    for (std::size_t i = 0; i < e.m.rows(); ++i) {
      if (i == r) continue;
      Rational f = e.m.at(i, col);
      if (f == 0) continue;
      for (std::size_t j = col; j < e.m.cols(); ++j) e.m.at(i, j) -= f * e.m.at(r, j);
    }
    e.pivot.push_back(col);
    ++r;
  }
  if (e.pivot.size() < e.m.rows()) e.det = 0;
  return e;
}

std::vector<Rational> null_witness(const Elim& e, std::size_t ncols) {
  // First non-pivot column yields a kernel vector of the column space map.
  std::vector<bool> is_pivot(ncols, false);
  for (auto c : e.pivot) is_pivot[c] = true;
  std::size_t freec = ncols;
  for (std::size_t c = 0; c < ncols; ++c)
    if (!is_pivot[c]) { freec = c; break; }
  std::vector<Rational> v(ncols, Rational(0));
  if (freec == ncols) return v;
  v[freec] = 1;
  for (std::size_t pr = 0; pr < e.pivot.size(); ++pr) v[e.pivot[pr]] = -e.m.at(pr, freec);
  return v;
}

}  // namespace

Rational mat_det(const RatMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
  if (m.rows() == 0) return Rational(1);
  Elim e = eliminate(m);
  return e.det;
}

GaussResult gauss_solve(const RatMatrix& A, const std::vector<Rational>& b) {
  if (A.rows() != A.cols()) throw std::invalid_argument("gauss_solve needs a square matrix");
  if (b.size() != A.rows()) throw std::invalid_argument("rhs length mismatch");
  std::size_t n = A.rows();
  RatMatrix aug(n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug.at(i, j) = A.at(i, j);
    aug.at(i, n) = b[i];
  }
  // Eliminate only on the coefficient block; track pivots manually so the
  // augmented column never becomes a pivot.
  Elim e{aug, {}, Rational(1)};
  std::size_t r = 0;
  for (std::size_t col = 0; col < n && r < n; ++col) {
    std::size_t sel = r;
    while (sel < n && e.m.at(sel, col) == 0) ++sel;
    if (sel == n) continue;
    if (sel != r) {
      for (std::size_t j = 0; j <= n; ++j) std::swap(e.m.at(sel, j), e.m.at(r, j));
      e.det = -e.det;
    }
    Rational p = e.m.at(r, col);
    e.det *= p;
    for (std::size_t j = col; j <= n; ++j) e.m.at(r, j) /= p;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == r) continue;
      Rational f = e.m.at(i, col);
      if (f == 0) continue;
      for (std::size_t j = col; j <= n; ++j) e.m.at(i, j) -= f * e.m.at(r, j);
    }
    e.pivot.push_back(col);
    ++r;
  }
  if (e.pivot.size() < n) {
    throw SingularMatrixError(e.pivot.size(), null_witness(e, n));
  }
  std::vector<Rational> x(n);
  for (std::size_t pr = 0; pr < n; ++pr) x[e.pivot[pr]] = e.m.at(pr, n);
  // Residual check: the elimination above is exact, but verify anyway.
  for (std::size_t i = 0; i < n; ++i) {
    Rational acc(0);
    for (std::size_t j = 0; j < n; ++j) acc += A.at(i, j) * x[j];
    if (acc != b[i]) throw std::logic_error("gauss_solve residual nonzero");
  }
  return GaussResult{std::move(x), e.det};
}

RatMatrix kron(const RatMatrix& A, const RatMatrix& B) {
  RatMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (std::size_t i1 = 0; i1 < A.rows(); ++i1)
    for (std::size_t j1 = 0; j1 < A.cols(); ++j1) {
      const Rational& v = A.at(i1, j1);
      if (v == 0) continue;
      for (std::size_t i2 = 0; i2 < B.rows(); ++i2)
        for (std::size_t j2 = 0; j2 < B.cols(); ++j2)
          out.at(i1 * B.rows() + i2, j1 * B.cols() + j2) = v * B.at(i2, j2);
    }
  return out;
}

std::vector<Rational> kron_solve(const RatMatrix& A, const RatMatrix& B, const std::vector<Rational>& rhs) {
  std::size_t na = A.rows(), nb = B.rows();
  if (A.rows() != A.cols() || B.rows() != B.cols()) throw std::invalid_argument("kron_solve needs square factors");
  if (rhs.size() != na * nb) throw std::invalid_argument("kron_solve rhs length mismatch");
  // (A kron B) x = rhs with row index i1*nb+i2. View rhs as matrix R[i2][i1];
  // then B X A^T = R with x laid out as X[j2][j1], i.e. solve per factor.
  // Pass 1: for each column i1 of R, solve B y = R[:,i1] -> Y[:,i1].
  RatMatrix Y(nb, na);
  for (std::size_t i1 = 0; i1 < na; ++i1) {
    std::vector<Rational> col(nb);
    for (std::size_t i2 = 0; i2 < nb; ++i2) col[i2] = rhs[i1 * nb + i2];
    GaussResult g = gauss_solve(B, col);
    for (std::size_t i2 = 0; i2 < nb; ++i2) Y.at(i2, i1) = g.solution[i2];
  }
  // Pass 2: for each row j2 of Y, solve A z = Y[j2,:]^T -> X[j2,:].
  std::vector<Rational> x(na * nb);
  for (std::size_t j2 = 0; j2 < nb; ++j2) {
    std::vector<Rational> row(na);
    for (std::size_t i1 = 0; i1 < na; ++i1) row[i1] = Y.at(j2, i1);
    GaussResult g = gauss_solve(A, row);
    for (std::size_t j1 = 0; j1 < na; ++j1) x[j1 * nb + j2] = g.solution[j1];
  }
  return x;
}

CauchyCheck cauchy_det_check(const std::vector<Rational>& c, const std::vector<Rational>& z) {
  if (c.size() != z.size()) throw std::invalid_argument("cauchy_det_check needs equal lengths");
  std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c[i] + z[j] == 0) throw std::invalid_argument("cauchy_det_check: c_i + z_j = 0");
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = Rational(1) / (c[i] + z[j]);
  CauchyCheck out;
  out.det = mat_det(m);
  Rational num(1), den(1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) num *= (c[i] - c[j]) * (z[i] - z[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) den *= c[i] + z[j];
  out.formula_value = num / den;
  out.equal = out.det == out.formula_value;
  return out;
}

QuadEigen quad_eigen(const RatMatrix& B) {
  if (B.rows() != 2 || B.cols() != 2) throw std::invalid_argument("quad_eigen needs a 2x2 matrix");
  QuadEigen e;
  e.trace = B.at(0, 0) + B.at(1, 1);
  e.det = B.at(0, 0) * B.at(1, 1) - B.at(0, 1) * B.at(1, 0);
  e.disc = e.trace * e.trace - Rational(4) * e.det;
  Rational half(1, 2);
  e.lambda1 = QuadNum(e.trace * half, -half, e.disc);
  e.lambda2 = QuadNum(e.trace * half, half, e.disc);
  if (auto s = rat_sqrt_exact(e.disc)) {
    // Rational eigenvalues: collapse the radical part so zero tests are plain.
    e.lambda1 = QuadNum((e.trace - *s) * half, Rational(0), e.disc);
    e.lambda2 = QuadNum((e.trace + *s) * half, Rational(0), e.disc);
  }
  e.flags.nonzero = e.det != 0;
  e.flags.distinct = e.disc != 0;
  e.flags.not_opposite = e.trace != 0;
  e.flags.real_distinct_dominant = e.disc > 0;
  return e;
}

SpectralCoeffs spectral_coeffs(const RatMatrix& A1, const RatMatrix& C) {
  RatMatrix B = A1.mul(C);
  QuadEigen e = quad_eigen(B);
  if (!e.flags.distinct) throw std::domain_error("spectral_coeffs: repeated eigenvalue");
  if (!e.flags.nonzero) throw std::domain_error("spectral_coeffs: singular base matrix");
  // E1 = (B - l2 I)/(l1 - l2), E2 = (B - l1 I)/(l2 - l1); then
  // B^p = E1 l1^p + E2 l2^p for all p >= 0.
  QuadNum denom1 = quad_sub(e.lambda1, e.lambda2);
  QuadNum denom2 = quad_sub(e.lambda2, e.lambda1);
  SpectralCoeffs out;
  out.eigen = e;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      QuadNum bij = QuadNum::from_rat(B.at(i, j), e.disc);
      QuadNum e1 = bij, e2 = bij;
      if (i == j) {
        e1 = quad_sub(e1, e.lambda2);
        e2 = quad_sub(e2, e.lambda1);
      }
      out.a[i][j] = quad_div(e1, denom1);
      out.b[i][j] = quad_div(e2, denom2);
    }
  return out;
}

}  // namespace gfomc
