#include "gfomc/formula.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace gfomc {

CnfFormula CnfFormula::constant(bool value) {
  CnfFormula f;
  f.false_ = !value;
  return f;
}

CnfFormula CnfFormula::from_clauses(std::vector<std::vector<VarId>> clauses) {
  CnfFormula f;
  for (auto& c : clauses) {
    if (c.empty()) return constant(false);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::sort(clauses.begin(), clauses.end());
  clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
  f.clauses_ = std::move(clauses);
  return f;
}

std::set<VarId> CnfFormula::vars() const {
  std::set<VarId> out;
  for (const auto& c : clauses_) out.insert(c.begin(), c.end());
  return out;
}

std::string CnfFormula::key() const {
  if (false_) return "#f";
  if (clauses_.empty()) return "#t";
  std::ostringstream os;
  for (const auto& c : clauses_) {
    for (const auto& v : c) os << v << ',';
    os << '|';
  }
  return os.str();
}

bool CnfFormula::operator<(const CnfFormula& o) const {
  if (false_ != o.false_) return false_ < o.false_;
  return clauses_ < o.clauses_;
}

CnfFormula CnfFormula::conjoin(const CnfFormula& o) const {
  if (is_false() || o.is_false()) return constant(false);
  std::vector<std::vector<VarId>> all = clauses_;
  all.insert(all.end(), o.clauses_.begin(), o.clauses_.end());
  return from_clauses(std::move(all));
}

CnfFormula substitute(const CnfFormula& f, const std::map<VarId, bool>& bindings) {
  if (f.is_constant() || bindings.empty()) return f;
  std::vector<std::vector<VarId>> out;
  for (const auto& c : f.clauses()) {
    std::vector<VarId> nc;
    bool sat = false;
    for (const auto& v : c) {
      auto it = bindings.find(v);
      if (it == bindings.end()) {
        nc.push_back(v);
      } else if (it->second) {
        sat = true;
        break;
      }
    }
    if (sat) continue;
    if (nc.empty()) return CnfFormula::constant(false);
    out.push_back(std::move(nc));
  }
  return CnfFormula::from_clauses(std::move(out));
}

CnfFormula subsume_reduce(const CnfFormula& f) {
  if (f.is_constant()) return f;
  const auto& cs = f.clauses();
  std::vector<std::vector<VarId>> keep;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    bool subsumed = false;
    for (std::size_t j = 0; j < cs.size() && !subsumed; ++j) {
      if (i == j) continue;
      if (cs[j].size() > cs[i].size()) continue;
      if (cs[j].size() == cs[i].size() && j > i) continue;  // keep one of equals
      subsumed = std::includes(cs[i].begin(), cs[i].end(), cs[j].begin(), cs[j].end());
    }
    if (!subsumed) keep.push_back(cs[i]);
  }
  return CnfFormula::from_clauses(std::move(keep));
}

std::vector<CnfFormula> connectivity(const CnfFormula& f) {
  CnfFormula r = subsume_reduce(f);
  if (r.is_constant()) return {};
  std::map<VarId, std::size_t> id;
  for (const auto& v : r.vars()) {
    std::size_t n = id.size();
    id.emplace(v, n);
  }
  std::vector<std::size_t> parent(id.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& c : r.clauses()) {
    std::size_t first = id[c[0]];
    for (const auto& v : c) parent[find(id[v])] = find(first);
  }
  std::map<std::size_t, std::vector<std::vector<VarId>>> groups;
  for (const auto& c : r.clauses()) groups[find(id[c[0]])].push_back(c);
  std::vector<CnfFormula> out;
  for (auto& [root, clauses] : groups) out.push_back(CnfFormula::from_clauses(std::move(clauses)));
  return out;
}

namespace {

// Memoized Shannon expansion with component splitting. Probabilities stay
// fixed for the lifetime of one counter.
class WeightedCounter {
 public:
  explicit WeightedCounter(const ProbMap& p) : p_(p) {}

  Rational count(const CnfFormula& f) {
    if (f.is_false()) return Rational(0);
    if (f.is_true()) return Rational(1);
    auto it = memo_.find(f.key());
    if (it != memo_.end()) return it->second;
    Rational result(1);
    std::vector<CnfFormula> comps = connectivity(f);
    if (comps.size() > 1) {
      for (const auto& c : comps) result *= count(c);
    } else {
      const CnfFormula& g = comps.empty() ? f : comps[0];
      VarId x = pick_var(g);
      const Rational& px = prob(x);
      Rational r0 = count(substitute(g, {{x, false}}));
      Rational r1 = count(substitute(g, {{x, true}}));
      result = (Rational(1) - px) * r0 + px * r1;
    }
    memo_.emplace(f.key(), result);
    return result;
  }

 private:
  const Rational& prob(const VarId& v) const {
    auto it = p_.find(v);
    if (it == p_.end()) throw std::invalid_argument("probability missing for " + v);
    return it->second;
  }

  static VarId pick_var(const CnfFormula& f) {
    std::map<VarId, std::size_t> freq;
    for (const auto& c : f.clauses())
      for (const auto& v : c) ++freq[v];
    VarId best;
    std::size_t best_n = 0;
    for (const auto& [v, n] : freq)
      if (n > best_n) { best = v; best_n = n; }
    return best;
  }

  const ProbMap& p_;
  std::unordered_map<std::string, Rational> memo_;
};

}  // namespace

Rational weighted_count(const CnfFormula& f, const ProbMap& p) {
  // 0/1 probabilities are facts, not coins: substitute them first.
  std::map<VarId, bool> fixed;
  for (const auto& v : f.vars()) {
    auto it = p.find(v);
    if (it == p.end()) throw std::invalid_argument("probability missing for " + v);
    if (it->second < 0 || it->second > 1) throw std::invalid_argument("probability out of range for " + v);
    if (it->second == 0) fixed.emplace(v, false);
    if (it->second == 1) fixed.emplace(v, true);
  }
  CnfFormula g = subsume_reduce(substitute(f, fixed));
  WeightedCounter wc(p);
  return wc.count(g);
}

Poly Poly::constant(const Rational& r) {
  Poly p;
  if (r != 0) p.terms.emplace(Monomial{}, r);
  return p;
}

Poly Poly::var(const VarId& v) {
  Poly p;
  p.terms.emplace(Monomial{{v, 1}}, Rational(1));
  return p;
}

std::set<VarId> Poly::vars() const {
  std::set<VarId> out;
  for (const auto& [m, coef] : terms)
    for (const auto& [v, e] : m) out.insert(v);
  return out;
}

std::uint32_t Poly::degree_in(const VarId& v) const {
  std::uint32_t d = 0;
  for (const auto& [m, coef] : terms)
    for (const auto& [w, e] : m)
      if (w == v) d = std::max(d, e);
  return d;
}

bool Poly::is_multilinear() const {
  for (const auto& [m, coef] : terms)
    for (const auto& [v, e] : m)
      if (e > 1) return false;
  return true;
}

Poly Poly::add(const Poly& o) const {
  Poly out = *this;
  for (const auto& [m, coef] : o.terms) {
    auto it = out.terms.find(m);
    if (it == out.terms.end()) {
      out.terms.emplace(m, coef);
    } else {
      it->second += coef;
      if (it->second == 0) out.terms.erase(it);
    }
  }
  return out;
}

Poly Poly::sub(const Poly& o) const { return add(o.neg()); }

Poly Poly::neg() const {
  Poly out;
  for (const auto& [m, coef] : terms) out.terms.emplace(m, -coef);
  return out;
}

namespace {

Poly::Monomial mono_mul(const Poly::Monomial& a, const Poly::Monomial& b) {
  Poly::Monomial out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i; ++j;
    }
  }
  return out;
}

}  // namespace

Poly Poly::mul(const Poly& o) const {
  Poly out;
  for (const auto& [ma, ca] : terms)
    for (const auto& [mb, cb] : o.terms) {
      Monomial m = mono_mul(ma, mb);
      Rational c = ca * cb;
      auto it = out.terms.find(m);
      if (it == out.terms.end()) {
        out.terms.emplace(std::move(m), std::move(c));
      } else {
        it->second += c;
        if (it->second == 0) out.terms.erase(it);
      }
    }
  return out;
}

Poly Poly::scale(const Rational& r) const {
  Poly out;
  if (r == 0) return out;
  for (const auto& [m, coef] : terms) out.terms.emplace(m, coef * r);
  return out;
}

Rational Poly::eval(const ProbMap& point) const {
  Rational acc(0);
  for (const auto& [m, coef] : terms) {
    Rational t = coef;
    for (const auto& [v, e] : m) {
      auto it = point.find(v);
      if (it == point.end()) throw std::invalid_argument("evaluation point missing " + v);
      t *= rat_pow(it->second, e);
    }
    acc += t;
  }
  return acc;
}

std::string Poly::str() const {
  if (terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, coef] : terms) {
    if (!first) os << " + ";
    first = false;
    os << rat_str(coef);
    for (const auto& [v, e] : m) {
      os << "*" << v;
      if (e > 1) os << "^" << e;
    }
  }
  return os.str();
}

Poly poly_eval(const Poly& p, const ProbMap& partial) {
  Poly out;
  for (const auto& [m, coef] : p.terms) {
    Rational c = coef;
    Poly::Monomial rest;
    for (const auto& [v, e] : m) {
      auto it = partial.find(v);
      if (it == partial.end()) {
        rest.emplace_back(v, e);
      } else {
        c *= rat_pow(it->second, e);
      }
    }
    if (c == 0) continue;
    auto it = out.terms.find(rest);
    if (it == out.terms.end()) {
      out.terms.emplace(std::move(rest), std::move(c));
    } else {
      it->second += c;
      if (it->second == 0) out.terms.erase(it);
    }
  }
  return out;
}

std::vector<Poly> poly_coeffs_in(const Poly& p, const VarId& v) {
  std::vector<Poly> out(p.degree_in(v) + 1);
  for (const auto& [m, coef] : p.terms) {
    std::uint32_t e = 0;
    Poly::Monomial rest;
    for (const auto& [w, we] : m) {
      if (w == v) e = we; else rest.emplace_back(w, we);
    }
    out[e].terms.emplace(std::move(rest), coef);
  }
  return out;
}

std::size_t max_vars_cap(std::size_t fallback) {
  if (const char* s = std::getenv("GFOMC_MAX_VARS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return fallback;
}

namespace {

class Arithmetizer {
 public:
  Poly run(const CnfFormula& f) {
    if (f.is_false()) return Poly::zero();
    if (f.is_true()) return Poly::constant(1);
    auto it = memo_.find(f.key());
    if (it != memo_.end()) return it->second;
    Poly result = Poly::constant(1);
    std::vector<CnfFormula> comps = connectivity(f);
    if (comps.size() > 1) {
      for (const auto& c : comps) result = result.mul(run(c));
    } else {
      const CnfFormula& g = comps.empty() ? f : comps[0];
      VarId x = *g.vars().begin();
      Poly a0 = run(substitute(g, {{x, false}}));
      Poly a1 = run(substitute(g, {{x, true}}));
      // (1-x) a0 + x a1 = a0 + x (a1 - a0); stays multilinear.
      result = a0.add(Poly::var(x).mul(a1.sub(a0)));
    }
    memo_.emplace(f.key(), result);
    return result;
  }

 private:
  std::unordered_map<std::string, Poly> memo_;
};

}  // namespace

Poly arithmetize(const CnfFormula& f, std::size_t var_cap) {
  if (f.vars().size() > var_cap)
    throw std::invalid_argument("arithmetize: formula exceeds variable cap " + std::to_string(var_cap));
  Arithmetizer a;
  return a.run(subsume_reduce(f));
}

Poly arithmetize(const CnfFormula& f) { return arithmetize(f, max_vars_cap(18)); }

Poly small_matrix_det(const CnfFormula& f, const VarId& r, const VarId& t) {
  Poly y[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      y[a][b] = arithmetize(substitute(f, {{r, a == 1}, {t, b == 1}}));
  return y[0][0].mul(y[1][1]).sub(y[0][1].mul(y[1][0]));
}

ProbMap find_nonroot(const Poly& p, const std::array<Rational, 3>& consts) {
  if (consts[0] == consts[1] || consts[0] == consts[2] || consts[1] == consts[2])
    throw std::invalid_argument("find_nonroot needs three distinct constants");
  if (p.is_zero()) throw std::domain_error("identically zero");
  // Invariant: cur = p[theta] is not identically zero.
  ProbMap theta;
  Poly cur = p;
  while (!cur.vars().empty()) {
    VarId x = *cur.vars().begin();
    std::vector<Poly> cs = poly_coeffs_in(cur, x);
    if (cs.size() > 3) throw std::invalid_argument("find_nonroot: degree above 2 in " + x);
    std::size_t e = cs.size() - 1;
    while (cs[e].is_zero()) --e;  // e >= 1 since x occurs in cur
    if (!cs[e].vars().empty()) {
      // Pin the leading coefficient to a nonzero constant first.
      ProbMap inner = find_nonroot(cs[e], consts);
      for (const auto& [v, val] : inner) theta[v] = val;
      cur = poly_eval(cur, inner);
      continue;
    }
    // Leading coefficient is a nonzero constant: the polynomial in x stays
    // nonzero whatever the remaining variables get.
    ProbMap fill;
    for (const auto& y : cur.vars())
      if (y != x) fill[y] = consts[0];
    if (!fill.empty()) {
      for (const auto& [v, val] : fill) theta[v] = val;
      cur = poly_eval(cur, fill);
    }
    // Univariate of degree <= 2: at most 2 roots among 3 distinct candidates.
    bool found = false;
    for (const auto& cval : consts) {
      Poly at = poly_eval(cur, {{x, cval}});
      if (!at.is_zero()) {
        theta[x] = cval;
        cur = at;
        found = true;
        break;
      }
    }
    if (!found) throw std::logic_error("find_nonroot: no candidate constant worked");
  }
  // Terms containing a variable can cancel during substitution before that
  // variable is ever pinned; the value is then free, so fix it anyway.
  for (const auto& v : p.vars())
    if (!theta.count(v)) theta[v] = consts[0];
  return theta;
}

ProbMap find_nonroot(const Poly& p) {
  return find_nonroot(p, {Rational(0), Rational(1, 2), Rational(1)});
}

DisconnectReport var_disconnects(const CnfFormula& f, const VarId& x,
                                 const std::set<VarId>& u, const std::set<VarId>& v) {
  auto separated = [&](const std::set<VarId>& us, const std::set<VarId>& vs) {
    for (bool val : {false, true}) {
      for (const CnfFormula& comp : connectivity(substitute(f, {{x, val}}))) {
        std::set<VarId> cv = comp.vars();
        bool has_u = false, has_v = false;
        for (const auto& w : cv) {
          has_u = has_u || us.count(w) > 0;
          has_v = has_v || vs.count(w) > 0;
        }
        if (has_u && has_v) return false;
      }
    }
    return true;
  };
  DisconnectReport rep;
  rep.disconnects = separated(u, v);
  for (const auto& y : f.vars()) {
    if (y == x || u.count(y) || v.count(y)) continue;
    std::set<VarId> uy = u; uy.insert(y);
    std::set<VarId> vy = v; vy.insert(y);
    if (!separated(uy, v) && !separated(u, vy)) rep.migrating.insert(y);
  }
  return rep;
}

namespace {

// Pr(f AND theta_s) under the product measure: weight of the assignment times
// the count of f restricted by it.
Rational event_prob(const CnfFormula& f, const ProbMap& p, const std::map<VarId, bool>& assign) {
  Rational w(1);
  for (const auto& [v, val] : assign) {
    auto it = p.find(v);
    if (it == p.end()) throw std::invalid_argument("probability missing for " + v);
    w *= val ? it->second : Rational(1) - it->second;
  }
  if (w == 0) return Rational(0);
  return w * weighted_count(substitute(f, assign), p);
}

void all_assignments(const std::vector<VarId>& vs, std::size_t i, std::map<VarId, bool>& cur,
                     const std::function<void(const std::map<VarId, bool>&)>& fn) {
  if (i == vs.size()) { fn(cur); return; }
  for (bool b : {false, true}) {
    cur[vs[i]] = b;
    all_assignments(vs, i + 1, cur, fn);
  }
  cur.erase(vs[i]);
}

}  // namespace

bool ci_sets(const CnfFormula& f, const ProbMap& p, const std::set<VarId>& a,
             const std::set<VarId>& b, const std::set<VarId>& c) {
  if (weighted_count(f, p) == 0) throw std::domain_error("conditioning on null event");
  if (a.empty() || b.empty()) return true;
  for (const auto& v : a) if (b.count(v)) throw std::invalid_argument("ci_sets: overlapping sets");
  std::vector<VarId> av(a.begin(), a.end()), bv(b.begin(), b.end()), cv(c.begin(), c.end());
  bool ok = true;
  std::map<VarId, bool> ca, cb, cc;
  all_assignments(cv, 0, cc, [&](const std::map<VarId, bool>& gc) {
    all_assignments(av, 0, ca, [&](const std::map<VarId, bool>& ga) {
      all_assignments(bv, 0, cb, [&](const std::map<VarId, bool>& gb) {
        if (!ok) return;
        std::map<VarId, bool> sc = gc, sac = gc, sbc = gc, sabc = gc;
        for (const auto& kv : ga) { sac.insert(kv); sabc.insert(kv); }
        for (const auto& kv : gb) { sbc.insert(kv); sabc.insert(kv); }
        Rational lhs = event_prob(f, p, sabc) * event_prob(f, p, sc);
        Rational rhs = event_prob(f, p, sac) * event_prob(f, p, sbc);
        if (lhs != rhs) ok = false;
      });
    });
  });
  return ok;
}

bool cond_independent(const CnfFormula& f, const std::set<VarId>& u,
                      const std::set<VarId>& v, const VarId& x, const ProbMap& p) {
  return ci_sets(f, p, u, v, {x});
}

}  // namespace gfomc
