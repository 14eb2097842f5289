#include "gfomc/blocks.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace gfomc {

namespace {

// Right-multiplication by diag(1-c, c).
RatMatrix scale_cols(const RatMatrix& a, const Rational& c) {
  RatMatrix b = a;
  for (std::size_t i = 0; i < b.rows(); ++i) {
    b.at(i, 0) *= Rational(1) - c;
    b.at(i, 1) *= c;
  }
  return b;
}

int max_subclauses(const Query& q) {
  int m = 0;
  for (const auto& cl : q.clauses) m = std::max<int>(m, static_cast<int>(cl.subclauses.size()));
  return m;
}

Tid length_one_block(const Query& q, const Rational& c) {
  std::set<Symbol> syms = q.binary_symbols();
  if (syms.empty()) throw std::invalid_argument("query has no binary symbols");
  std::set<Symbol> all = q.symbols();
  BlockSpec spec;
  spec.u = "u";
  spec.v = "v";
  spec.length = 1;
  spec.c = c;
  spec.binary_symbols = syms;
  spec.with_R = all.count("R") > 0;
  spec.with_T = all.count("T") > 0;
  return build_zigzag_block(spec);
}

struct AtomParts {
  std::string symbol, left, right;
};

AtomParts split_atom(const std::string& atom) {
  auto open = atom.find('(');
  auto comma = atom.find(',', open);
  return {atom.substr(0, open), atom.substr(open + 1, comma - open - 1),
          atom.substr(comma + 1, atom.size() - comma - 2)};
}

bool anchors_connected(const CnfFormula& f, const VarId& a, const VarId& b) {
  for (const auto& comp : connectivity(f)) {
    std::set<VarId> vs = comp.vars();
    bool has_a = vs.count(a) > 0, has_b = vs.count(b) > 0;
    if (has_a && has_b) return true;
    if (has_a || has_b) return false;
  }
  return false;
}

// Shannon expansion of Pr(f) with the free variables kept symbolic and the
// rest read from the pinned map. Components multiply and results memoize on
// the formula key, so the four determinant entries share subformula work.
class PolyCounter {
 public:
  PolyCounter(const ProbMap& pinned, const std::set<VarId>& free)
      : pinned_(pinned), free_(free) {}

  Poly run(const CnfFormula& f) {
    if (f.is_true()) return Poly::constant(Rational(1));
    if (f.is_false()) return Poly::zero();
    std::string key = f.key();
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Poly out;
    std::vector<CnfFormula> comps = connectivity(f);
    if (comps.size() > 1) {
      out = Poly::constant(Rational(1));
      for (const auto& c : comps) out = out.mul(run(c));
    } else {
      std::set<VarId> vs = f.vars();
      VarId x;
      bool pinned_var = false;
      for (const auto& v : vs)
        if (!free_.count(v)) {
          x = v;
          pinned_var = true;
          break;
        }
      if (!pinned_var) x = *vs.begin();
      Poly r0 = run(substitute(f, {{x, false}}));
      Poly r1 = run(substitute(f, {{x, true}}));
      if (pinned_var) {
        const Rational& p = pinned_.at(x);
        out = r0.scale(Rational(1) - p).add(r1.scale(p));
      } else {
        out = r0.add(Poly::var(x).mul(r1.sub(r0)));
      }
    }
    memo_.emplace(std::move(key), out);
    return out;
  }

 private:
  const ProbMap& pinned_;
  const std::set<VarId>& free_;
  std::map<std::string, Poly> memo_;
};

unsigned long long mul_exp(unsigned long long a, unsigned long long b) {
  unsigned long long out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("exponent overflow");
  return out;
}

}  // namespace

RatMatrix a1_matrix(const Query& q, const Rational& c, std::string* warning) {
  if (warning) {
    warning->clear();
    ClassReport rep = classify(q);
    if (!rep.unsafe)
      *warning = "query is safe; the block matrix carries no reduction content";
    else if (rep.left_type != 'I' || rep.right_type != 'I')
      *warning = "query is not of shape I-I";
    else if (!rep.final_query)
      *warning = "query is unsafe but not final";
  }
  Tid block = length_one_block(q, c);
  RatMatrix z(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      z.at(a, b) = block_prob(restricted_lineage(q, block, "u", a, "v", b), block);
  return z;
}

RatMatrix ap_matrix(const RatMatrix& a1, const Rational& c, int p) {
  if (a1.rows() != 2 || a1.cols() != 2) throw std::invalid_argument("a1 must be 2x2");
  if (p < 0) throw std::invalid_argument("power must be >= 0");
  if (p == 0) return RatMatrix::identity(2);
  RatMatrix b = scale_cols(a1, c);
  RatMatrix out = a1;
  for (int i = 1; i < p; ++i) out = b.mul(out);
  return out;
}

DesignReport design_report(const Query& q, const Rational& c) {
  DesignReport rep;
  std::string warn;
  rep.a1 = a1_matrix(q, c, &warn);
  if (!warn.empty()) rep.failures.push_back(warn);

  const Rational& z00 = rep.a1.at(0, 0);
  const Rational& z01 = rep.a1.at(0, 1);
  const Rational& z10 = rep.a1.at(1, 0);
  const Rational& z11 = rep.a1.at(1, 1);
  rep.ordering_ok = z00 > 0 && z00 < z01 && z01 == z10 && z01 < z11 && z11 <= 1;
  if (!rep.ordering_ok)
    rep.failures.push_back("entry ordering 0 < z00 < z01 = z10 < z11 <= 1 fails");

  rep.b = scale_cols(rep.a1, c);
  rep.eigen = quad_eigen(rep.b);
  rep.lambda_ok = rep.eigen.flags.nonzero && rep.eigen.flags.distinct &&
                  rep.eigen.flags.not_opposite;
  if (!rep.lambda_ok)
    rep.failures.push_back("eigenvalues must be nonzero, distinct and not opposite");
  if (!(rep.eigen.trace > 0)) rep.failures.push_back("trace of A1 diag(1-c,c) is not positive");
  if (!rep.eigen.flags.real_distinct_dominant)
    rep.failures.push_back("discriminant is not positive");

  // Rational side: the three sequences z_00(p), z_01(p), z_11(p).
  std::array<RatMatrix, 5> zp;
  for (int p = 0; p <= 4; ++p) zp[p] = ap_matrix(rep.a1, c, p);
  auto seq = [&](int i, int p) -> const Rational& {
    if (i == 0) return zp[p].at(0, 0);
    if (i == 1) return zp[p].at(0, 1);
    return zp[p].at(1, 1);
  };
  static const char* kSeqName[3] = {"00", "01", "11"};

  if (rep.lambda_ok) {
    RatMatrix cm(2, 2);
    cm.at(0, 0) = Rational(1) - c;
    cm.at(1, 1) = c;
    SpectralCoeffs sc = spectral_coeffs(rep.a1, cm);
    const Rational& d = rep.eigen.disc;
    // Fold in C^{-1}: column 0 scales by 1/(1-c), column 1 by 1/c.
    auto coeff = [&](const std::array<std::array<QuadNum, 2>, 2>& mat, int i) {
      if (i == 0) return quad_scale(Rational(1) / (Rational(1) - c), mat[0][0]);
      if (i == 1) return quad_scale(Rational(1) / c, mat[0][1]);
      return quad_scale(Rational(1) / c, mat[1][1]);
    };
    std::array<QuadNum, 3> ai, bi;
    for (int i = 0; i < 3; ++i) {
      ai[i] = coeff(sc.a, i);
      bi[i] = coeff(sc.b, i);
    }

    // Each sequence must reproduce as a_i l1^p + b_i l2^p.
    for (int i = 0; i < 3; ++i)
      for (int p = 1; p <= 4; ++p) {
        QuadNum lhs = quad_add(quad_mul(ai[i], quad_pow(rep.eigen.lambda1, p)),
                               quad_mul(bi[i], quad_pow(rep.eigen.lambda2, p)));
        if (lhs != QuadNum::from_rat(seq(i, p), d))
          throw std::logic_error("spectral coefficients disagree with the rational powers");
      }

    for (int i = 0; i < 3; ++i) {
      rep.b_nonzero[i] = !bi[i].is_zero();
      // z_i(1) z_i(3) - z_i(2)^2 = a_i b_i det(B) disc, all rational.
      Rational s = seq(i, 1) * seq(i, 3) - seq(i, 2) * seq(i, 2);
      QuadNum pred = quad_mul(quad_mul(ai[i], bi[i]),
                              QuadNum::from_rat(rep.eigen.det * rep.eigen.disc, d));
      if (pred != QuadNum::from_rat(s, d))
        throw std::logic_error("lambda2 coefficient check disagrees with the rational powers");
      if (!rep.b_nonzero[i])
        rep.failures.push_back(std::string("lambda2 coefficient of the ") + kSeqName[i] +
                               " sequence vanishes");
    }

    static const std::array<std::pair<int, int>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
    for (int t = 0; t < 3; ++t) {
      auto [i, j] = kPairs[t];
      QuadNum cross = quad_sub(quad_mul(ai[i], bi[j]), quad_mul(ai[j], bi[i]));
      rep.cross_products_ok[t] = !cross.is_zero();
      // z_i(1) z_j(2) - z_j(1) z_i(2) = det(B) sqrt(disc) (a_i b_j - a_j b_i).
      Rational r = seq(i, 1) * seq(j, 2) - seq(j, 1) * seq(i, 2);
      QuadNum pred = quad_mul(QuadNum(Rational(0), rep.eigen.det, d), cross);
      if (pred != QuadNum::from_rat(r, d))
        throw std::logic_error("cross-product check disagrees with the rational powers");
      if (!rep.cross_products_ok[t])
        rep.failures.push_back(std::string("sequences ") + kSeqName[i] + " and " + kSeqName[j] +
                               " have proportional coefficients");
    }
  } else {
    rep.failures.push_back("coefficient conditions skipped: no clean eigenvalue split");
  }

  // det of the symbolic length-one block matrix against alpha prod u(1-u).
  Tid block = length_one_block(q, c);
  std::array<std::array<CnfFormula, 2>, 2> y;
  std::set<VarId> vars;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      y[a][b] = restricted_lineage(q, block, "u", a, "v", b);
      std::set<VarId> vs = y[a][b].vars();
      vars.insert(vs.begin(), vs.end());
    }
  if (vars.size() <= 14) {
    rep.fa_form.attempted = true;
    auto ar = [&](const CnfFormula& f) { return arithmetize(f, 14); };
    Poly fa = ar(y[0][0]).mul(ar(y[1][1])).sub(ar(y[0][1]).mul(ar(y[1][0])));
    Poly::Monomial all_once;
    for (const auto& v : vars) all_once.push_back({v, 1});
    auto it = fa.terms.find(all_once);
    rep.fa_form.alpha = it == fa.terms.end() ? Rational(0) : it->second;
    Poly prod = Poly::constant(rep.fa_form.alpha);
    for (const auto& v : vars)
      prod = prod.mul(Poly::var(v).sub(Poly::var(v).mul(Poly::var(v))));
    rep.fa_form.matches_product_form = fa == prod;
    if (!rep.fa_form.matches_product_form)
      rep.failures.push_back("symbolic block determinant is not alpha * prod u(1-u)");
  }
  return rep;
}

RatMatrix pendant_matrix(const Query& q, const Rational& c, int n, PendantMode mode,
                         int t_start) {
  if (n < 0) throw std::invalid_argument("pendant grid needs n >= 0");
  if (t_start < 1) throw std::invalid_argument("pendant lengths start at 1");
  RatMatrix a1 = a1_matrix(q, c);
  RatMatrix out(n + 1, n + 1);
  std::vector<std::string> quot;
  for (int r = 0; r <= n; ++r) {
    RatMatrix z = ap_matrix(a1, c, t_start + r);
    std::array<std::array<Rational, 2>, 2> zz = {
        {{z.at(0, 0), z.at(0, 1)}, {z.at(1, 0), z.at(1, 1)}}};
    std::array<Rational, 2> yv = pendant_values(zz, c, mode);
    Rational hi = c * yv[1], lo = (Rational(1) - c) * yv[0];
    for (int col = 0; col <= n; ++col) out.at(r, col) = rat_pow(hi, col) * rat_pow(lo, n - col);
    quot.push_back(lo == 0 ? "undefined (y0 = 0)" : rat_str(hi / lo));
  }
  if (mat_det(out) == 0) {
    std::ostringstream msg;
    msg << "pendant matrix is singular; row quotients";
    for (const auto& s : quot) msg << " " << s;
    throw std::domain_error(msg.str());
  }
  return out;
}

RatMatrix grid_matrix(const Query& q, const Rational& c, int m, int p_start) {
  if (m < 0) throw std::invalid_argument("edge grid needs m >= 0");
  if (p_start < 1) throw std::invalid_argument("branch lengths start at 1");
  RatMatrix a1 = a1_matrix(q, c);
  int side = m + 1;
  std::vector<RatMatrix> z;
  for (int i = 0; i < side; ++i) z.push_back(ap_matrix(a1, c, p_start + i));
  RatMatrix out(static_cast<std::size_t>(side) * side, static_cast<std::size_t>(side) * side);
  for (int i1 = 0; i1 < side; ++i1)
    for (int i2 = 0; i2 < side; ++i2) {
      std::size_t row = static_cast<std::size_t>(i1) * side + i2;
      Rational y00 = z[i1].at(0, 0) * z[i2].at(0, 0);
      Rational y10 = z[i1].at(0, 1) * z[i2].at(0, 1);
      Rational y11 = z[i1].at(1, 1) * z[i2].at(1, 1);
      if (y00 == 0)
        throw std::domain_error("edge grid needs y00 > 0 to absorb negative exponents");
      for (int k10 = 0; k10 <= m; ++k10)
        for (int k11 = 0; k11 <= m; ++k11) {
          std::size_t col = static_cast<std::size_t>(k10) * side + k11;
          long k00 = m - k10 - k11;  // negative values become rational powers
          out.at(row, col) = rat_pow(y00, k00) * rat_pow(y10, k10) * rat_pow(y11, k11);
        }
    }
  if (mat_det(out) == 0) throw std::domain_error("edge grid matrix is singular");
  return out;
}

Tid zigzag_portion(const Query& q, int p, const Rational& c) {
  if (p < 0) throw std::invalid_argument("portion length must be >= 0");
  std::set<Symbol> syms = q.binary_symbols();
  if (syms.empty()) throw std::invalid_argument("query has no binary symbols");
  int dead = std::max(0, max_subclauses(q) - 2);
  Tid out;
  out.default_prob = 1;
  auto rn = [](int i) { return "r" + std::to_string(i); };
  auto tn = [](int i) { return "t" + std::to_string(i); };
  for (int i = 0; i <= p; ++i) out.left_domain.push_back(rn(i));
  for (int i = 0; i <= p; ++i) out.right_domain.push_back(tn(i));
  auto elem = [&](const std::string& a, const std::string& b) {
    for (const auto& s : syms) out.probs[atom_s(s, a, b)] = c;
  };
  elem(rn(0), tn(0));
  for (int i = 1; i <= p; ++i) {
    elem(rn(i), tn(i - 1));
    elem(rn(i), tn(i));
  }
  for (int i = 1; i <= p; ++i)
    for (int j = 1; j <= dead; ++j) {
      std::string e = "e" + std::to_string(j) + "@" + rn(i);
      out.right_domain.push_back(e);
      elem(rn(i), e);
    }
  for (int i = 0; i < p; ++i)
    for (int j = 1; j <= dead; ++j) {
      std::string f = "f" + std::to_string(j) + "@" + tn(i);
      out.left_domain.push_back(f);
      elem(f, tn(i));
    }
  return out;
}

Theta0Result theta0_search(const Query& q, int p) {
  if (p < 0) throw std::invalid_argument("portion length must be >= 0");
  ForbiddenReport fr = forbidden_report(q);
  if (!fr.applicable || !fr.forbidden)
    throw std::invalid_argument("theta0 is only defined for forbidden queries");
  Theta0Result res;
  int dead = std::max(0, max_subclauses(q) - 2);
  if (p == 0 || dead == 0) return res;

  GhDecomposition gh = gh_decomposition(q);
  Lattice lg = build_lattice(gh.g), lh = build_lattice(gh.h);
  Tid portion = zigzag_portion(q, p);
  auto rn = [](int i) { return "r" + std::to_string(i); };
  auto tn = [](int i) { return "t" + std::to_string(i); };
  VarId anchor_u = atom_s(*fr.ubiquitous_left.begin(), rn(0), tn(0));
  VarId anchor_v = atom_s(*fr.ubiquitous_right.begin(), rn(p), tn(p));

  std::vector<CnfFormula> ys;
  for (std::size_t a = 0; a < lg.elements.size(); ++a)
    for (std::size_t b = 0; b < lh.elements.size(); ++b)
      ys.push_back(restricted_lineage(q, portion, rn(0), lg.elements[a], tn(p),
                                      lh.elements[b], lg, lh));

  std::map<VarId, bool> fixed;
  for (const auto& s : q.binary_symbols())
    for (char side : {'l', 'r'})
      for (int j = 1; j <= dead; ++j) {
        std::vector<VarId> tuples;
        if (side == 'l')
          for (int i = 1; i <= p; ++i)
            tuples.push_back(atom_s(s, rn(i), "e" + std::to_string(j) + "@" + rn(i)));
        else
          for (int i = 0; i < p; ++i)
            tuples.push_back(atom_s(s, "f" + std::to_string(j) + "@" + tn(i), tn(i)));
        int chosen = -1;
        for (int v : {1, 0}) {
          std::map<VarId, bool> trial = fixed;
          for (const auto& t : tuples) trial[t] = v == 1;
          bool ok = true;
          for (const auto& y : ys)
            if (!anchors_connected(substitute(y, trial), anchor_u, anchor_v)) {
              ok = false;
              break;
            }
          if (ok) {
            chosen = v;
            break;
          }
        }
        if (chosen >= 0)
          for (const auto& t : tuples) {
            fixed[t] = chosen == 1;
            res.theta0[t] = Rational(chosen);
          }
        res.classes.push_back({s, side, j, chosen});
      }
  return res;
}

Rational chain_eval(const std::array<Rational, 2>& u, const std::vector<RatMatrix>& z,
                    const std::array<Rational, 2>& v, const std::vector<Rational>& s) {
  if (s.size() != z.size() + 1)
    throw std::invalid_argument("need one articulation value per diagonal: z.size()+1");
  for (const auto& m : z)
    if (m.rows() != 2 || m.cols() != 2) throw std::invalid_argument("chain factors must be 2x2");
  std::array<Rational, 2> row = u;
  for (std::size_t i = 0; i < s.size(); ++i) {
    row[0] *= Rational(1) - s[i];
    row[1] *= s[i];
    if (i < z.size()) {
      std::array<Rational, 2> nxt = {row[0] * z[i].at(0, 0) + row[1] * z[i].at(1, 0),
                                     row[0] * z[i].at(0, 1) + row[1] * z[i].at(1, 1)};
      row = nxt;
    }
  }
  return row[0] * v[0] + row[1] * v[1];
}

DetDResult detD_search(const Query& q, std::pair<std::size_t, std::size_t> pair1,
                       std::pair<std::size_t, std::size_t> pair2) {
  ForbiddenReport fr = forbidden_report(q);
  if (!fr.applicable || !fr.forbidden)
    throw std::invalid_argument("detD is only defined for forbidden queries");
  if (pair1 == pair2) throw std::invalid_argument("the two lattice pairs must differ");
  GhDecomposition gh = gh_decomposition(q);
  Lattice lg = build_lattice(gh.g), lh = build_lattice(gh.h);
  if (pair1.first >= lg.elements.size() || pair2.first >= lg.elements.size() ||
      pair1.second >= lh.elements.size() || pair2.second >= lh.elements.size())
    throw std::invalid_argument("lattice index out of range");

  std::set<Symbol> syms = q.binary_symbols();
  if (2 * syms.size() > 18)
    throw std::invalid_argument("more than 18 free prefix/suffix variables");

  BlockSpec spec;
  spec.u = "u";
  spec.v = "v";
  spec.c = Rational(1, 2);
  spec.binary_symbols = syms;
  spec.dead_ends = std::max(0, max_subclauses(q) - 2);
  spec.length = 0;
  Tid b0 = build_type2_block(spec);
  spec.length = 1;
  Tid b1 = build_type2_block(spec);

  // The prefix and suffix elementary blocks next to the endpoints share names
  // across lengths, so one assignment serves both determant rows.
  std::vector<VarId> free_vars;
  for (const auto& s : syms) free_vars.push_back(atom_s(s, "u", "tp1@u;v"));
  for (const auto& s : syms) free_vars.push_back(atom_s(s, "rs1@u;v", "v"));
  std::set<VarId> free_set(free_vars.begin(), free_vars.end());

  Theta0Result th = theta0_search(q, 1);
  std::map<std::pair<std::string, std::pair<char, int>>, Rational> class_val;
  for (const auto& cl : th.classes)
    if (cl.value >= 0) class_val[{cl.symbol, {cl.side, cl.branch}}] = Rational(cl.value);

  // Interior tuples sit at 1/2 except dead-end classes with a theta0 value.
  auto pin = [&](const Tid& b) {
    ProbMap pm;
    for (const auto& [atom, pr] : b.probs) {
      if (free_set.count(atom)) continue;
      AtomParts parts = split_atom(atom);
      Rational val(1, 2);
      char side = 0;
      std::string node;
      if (parts.right.size() > 1 && parts.right[0] == 'e' && parts.right.find('@') != std::string::npos) {
        side = 'l';
        node = parts.right;
      } else if (parts.left.size() > 1 && parts.left[0] == 'f' && parts.left.find('@') != std::string::npos) {
        side = 'r';
        node = parts.left;
      }
      if (side) {
        int j = std::stoi(node.substr(1, node.find('@') - 1));
        auto it = class_val.find({parts.symbol, {side, j}});
        if (it != class_val.end()) val = it->second;
      }
      pm[atom] = val;
    }
    return pm;
  };
  ProbMap pin0 = pin(b0), pin1 = pin(b1);

  CnfFormula f0_1 = restricted_lineage(q, b0, "u", lg.elements[pair1.first], "v",
                                       lh.elements[pair1.second], lg, lh);
  CnfFormula f0_2 = restricted_lineage(q, b0, "u", lg.elements[pair2.first], "v",
                                       lh.elements[pair2.second], lg, lh);
  CnfFormula f1_1 = restricted_lineage(q, b1, "u", lg.elements[pair1.first], "v",
                                       lh.elements[pair1.second], lg, lh);
  CnfFormula f1_2 = restricted_lineage(q, b1, "u", lg.elements[pair2.first], "v",
                                       lh.elements[pair2.second], lg, lh);

  auto eval_at = [&](const std::map<VarId, Rational>& assignment) {
    ProbMap m0 = pin0, m1 = pin1;
    for (const auto& [v, val] : assignment) {
      m0[v] = val;
      m1[v] = val;
    }
    DetDResult r;
    r.assignment = assignment;
    r.y_first = {weighted_count(f0_1, m0), weighted_count(f1_1, m1)};
    r.y_second = {weighted_count(f0_2, m0), weighted_count(f1_2, m1)};
    r.det = r.y_first[0] * r.y_second[1] - r.y_second[0] * r.y_first[1];
    return r;
  };

  {
    // Exact expansion: the determinant has per-variable degree <= 2.
    ProbMap pins = pin0;
    for (const auto& [atom, val] : pin1) pins[atom] = val;
    PolyCounter pc(pins, free_set);
    Poly y01 = pc.run(f0_1), y02 = pc.run(f0_2), y11 = pc.run(f1_1), y12 = pc.run(f1_2);
    std::size_t worst = std::max(y01.terms.size() * y12.terms.size(),
                                 y02.terms.size() * y11.terms.size());
    if (worst <= 4000000) {
      Poly det = y01.mul(y12).sub(y02.mul(y11));
      if (det.is_zero())
        throw std::runtime_error("no distinguishing assignment: determinant vanishes identically");
      ProbMap at = find_nonroot(det);
      std::map<VarId, Rational> assignment;
      for (const auto& v : free_vars) {
        auto it = at.find(v);
        assignment[v] = it == at.end() ? Rational(1, 2) : it->second;
      }
      DetDResult r = eval_at(assignment);
      if (r.det == 0) throw std::logic_error("expanded determinant disagrees with direct counts");
      return r;
    }
  }

  // Too wide to expand: walk {0,1/2,1} candidates outward from all-1/2.
  std::vector<Rational> consts = {Rational(1, 2), Rational(1), Rational(0)};
  std::map<VarId, Rational> base;
  for (const auto& v : free_vars) base[v] = Rational(1, 2);
  DetDResult r = eval_at(base);
  if (r.det != 0) return r;
  for (std::size_t i = 0; i < free_vars.size(); ++i)
    for (int vi = 1; vi < 3; ++vi) {
      auto cand = base;
      cand[free_vars[i]] = consts[vi];
      r = eval_at(cand);
      if (r.det != 0) return r;
    }
  std::mt19937 rng(20240817u);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int attempt = 0; attempt < 4000; ++attempt) {
    auto cand = base;
    for (const auto& v : free_vars) cand[v] = consts[pick(rng)];
    r = eval_at(cand);
    if (r.det != 0) return r;
  }
  throw std::runtime_error("no distinguishing assignment found");
}

ExponentPoint products_exponent_search(const std::vector<Poly>& f,
                                       const std::vector<ProbMap>& points) {
  if (f.empty()) throw std::invalid_argument("need at least one polynomial");
  if (f.size() != points.size()) throw std::invalid_argument("need one point per polynomial");
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (const auto& [var, val] : points[i])
      if (!(val > 0)) throw std::invalid_argument("points must have positive coordinates");
    for (const auto& var : f[i].vars())
      if (!points[i].count(var))
        throw std::invalid_argument("point misses a variable of its polynomial");
    if (f[i].eval(points[i]) == 0)
      throw std::invalid_argument("each polynomial must be nonzero at its own point");
  }

  ExponentPoint acc;
  acc.k = {1};
  acc.point = points[0];
  for (std::size_t next = 1; next < f.size(); ++next) {
    const ProbMap& w = points[next];
    bool found = false;
    for (int total = 2; total <= 64 && !found; ++total)
      for (int s = 1; s < total && !found; ++s) {
        int t = total - s;
        for (unsigned long long k = 1; k <= 200 && !found; ++k) {
          ProbMap u;
          for (const auto& [var, val] : acc.point)
            u[var] = rat_pow(val, static_cast<long>(k * static_cast<unsigned long long>(s)));
          for (const auto& [var, val] : w) {
            Rational pw = rat_pow(val, static_cast<long>(k * static_cast<unsigned long long>(t)));
            auto it = u.find(var);
            if (it == u.end())
              u[var] = pw;
            else
              it->second *= pw;
          }
          bool ok = true;
          for (std::size_t i = 0; i <= next && ok; ++i) ok = f[i].eval(u) != 0;
          if (!ok) continue;
          for (auto& e : acc.k) e = mul_exp(e, mul_exp(k, s));
          acc.k.push_back(mul_exp(k, t));
          acc.point = std::move(u);
          found = true;
        }
      }
    if (!found) throw std::runtime_error("no exponent ray keeps every polynomial nonzero");
  }
  return acc;
}

}  // namespace gfomc
