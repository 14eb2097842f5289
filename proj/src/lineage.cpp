#include "gfomc/lineage.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace gfomc {

namespace {

// Disjunction of monotone CNFs by clause cross product. The identity is a
// single empty clause (false).
CnfFormula cnf_or(const std::vector<CnfFormula>& parts) {
  std::vector<const CnfFormula*> live;
  for (const auto& p : parts) {
    if (p.is_true()) return CnfFormula::constant(true);
    if (!p.is_false()) live.push_back(&p);
  }
  if (live.empty()) return CnfFormula::constant(false);
  std::vector<std::vector<VarId>> acc = {{}};
  for (const CnfFormula* part : live) {
    std::vector<std::vector<VarId>> next;
    for (const auto& base : acc)
      for (const auto& cl : part->clauses()) {
        std::vector<VarId> merged = base;
        merged.insert(merged.end(), cl.begin(), cl.end());
        next.push_back(std::move(merged));
      }
    acc = std::move(next);
  }
  return CnfFormula::from_clauses(std::move(acc));
}

// Resolves one ground atom into a disjunction under d: probability 1
// satisfies it, probability 0 drops it, anything else keeps the variable.
struct LitSink {
  const Tid& d;
  std::vector<VarId> lits;
  bool sat = false;

  void add(const std::string& atom) {
    Rational p = d.prob(atom);
    if (p == 1)
      sat = true;
    else if (p != 0)
      lits.push_back(atom);
  }
};

// Grounding of one subclause (a conjunction over the inner variable) at the
// fixed head constant. head_left: the clause head binds the left variable.
CnfFormula ground_subclause(const std::set<Symbol>& sub, const std::string& head_const,
                            bool head_left, const Tid& d) {
  std::vector<std::vector<VarId>> conj;
  const auto& inner = head_left ? d.right_domain : d.left_domain;
  for (const auto& b : inner) {
    LitSink sink{d};
    for (const auto& s : sub) {
      if (s == "R")
        sink.add(atom_r(head_left ? head_const : b));
      else if (s == "T")
        sink.add(atom_t(head_left ? b : head_const));
      else
        sink.add(atom_s(s, head_left ? head_const : b, head_left ? b : head_const));
    }
    if (sink.sat) continue;
    if (sink.lits.empty()) return CnfFormula::constant(false);
    conj.push_back(std::move(sink.lits));
  }
  return CnfFormula::from_clauses(std::move(conj));
}

CnfFormula ground_clause(const Clause& c, const Tid& d) {
  static const std::set<Symbol> kNoBins;
  std::vector<std::vector<VarId>> acc;
  if (c.head == 'b') {
    const std::set<Symbol>& bins = c.subclauses.empty() ? kNoBins : c.subclauses[0];
    for (const auto& u : d.left_domain)
      for (const auto& v : d.right_domain) {
        LitSink sink{d};
        if (c.has_R) sink.add(atom_r(u));
        if (c.has_T) sink.add(atom_t(v));
        for (const auto& s : bins) sink.add(atom_s(s, u, v));
        if (sink.sat) continue;
        if (sink.lits.empty()) return CnfFormula::constant(false);
        acc.push_back(std::move(sink.lits));
      }
    return CnfFormula::from_clauses(std::move(acc));
  }

  bool head_left = c.head == 'x';
  const auto& heads = head_left ? d.left_domain : d.right_domain;
  CnfFormula result = CnfFormula::constant(true);
  for (const auto& a : heads) {
    std::vector<CnfFormula> parts;
    if (c.has_R || c.has_T) {
      // A factored head-side unary is one more disjunct.
      LitSink sink{d};
      sink.add(head_left ? atom_r(a) : atom_t(a));
      if (sink.sat) continue;
      if (!sink.lits.empty()) parts.push_back(CnfFormula::from_clauses({sink.lits}));
    }
    for (const auto& sub : c.subclauses) parts.push_back(ground_subclause(sub, a, head_left, d));
    CnfFormula at_a = cnf_or(parts);
    if (at_a.is_false()) return at_a;
    result = result.conjoin(at_a);
  }
  return result;
}

}  // namespace

CnfFormula ground_lineage(const Query& q, const Tid& d) {
  if (q.constant_true) return CnfFormula::constant(true);
  if (q.constant_false) return CnfFormula::constant(false);
  CnfFormula out = CnfFormula::constant(true);
  for (const Clause& c : q.clauses) {
    CnfFormula g = ground_clause(c, d);
    if (g.is_false()) return g;
    out = out.conjoin(g);
  }
  return subsume_reduce(out);
}

ProbMap lineage_probs(const CnfFormula& f, const Tid& d) {
  ProbMap p;
  for (const auto& v : f.vars()) p[v] = d.prob(v);
  return p;
}

Rational pr_exact(const Query& q, const Tid& d) {
  CnfFormula f = ground_lineage(q, d);
  return weighted_count(f, lineage_probs(f, d));
}

CnfFormula restricted_lineage(const Query& q, const Tid& block, const std::string& u,
                              int a, const std::string& v, int b) {
  if (!block.has_left(u) || !block.has_left(v))
    throw std::invalid_argument("endpoint not in block");
  CnfFormula f = ground_lineage(q, block);
  return subsume_reduce(substitute(f, {{atom_r(u), a == 1}, {atom_r(v), b == 1}}));
}

namespace {

// Grounds a lattice-element formula (clauses over binary symbols) at one
// anchored constant, the inner variable running over the opposite side.
CnfFormula ground_anchored(const CnfFormula& formula, const std::string& anchor,
                           bool anchor_left, const Tid& d) {
  if (formula.is_constant()) return formula;
  std::vector<std::vector<VarId>> acc;
  const auto& inner = anchor_left ? d.right_domain : d.left_domain;
  for (const auto& cl : formula.clauses())
    for (const auto& b : inner) {
      LitSink sink{d};
      for (const auto& s : cl)
        sink.add(anchor_left ? atom_s(s, anchor, b) : atom_s(s, b, anchor));
      if (sink.sat) continue;
      if (sink.lits.empty()) return CnfFormula::constant(false);
      acc.push_back(std::move(sink.lits));
    }
  return CnfFormula::from_clauses(std::move(acc));
}

}  // namespace

CnfFormula restricted_lineage(const Query& q, const Tid& block, const std::string& u,
                              const std::set<std::size_t>& alpha, const std::string& v,
                              const std::set<std::size_t>& beta, const Lattice& left,
                              const Lattice& right) {
  if (!block.has_left(u) || !block.has_right(v))
    throw std::invalid_argument("endpoint not in block");
  CnfFormula f = ground_lineage(q, block);
  CnfFormula ga = ground_anchored(left.formulas[left.index_of(alpha)], u, true, block);
  CnfFormula hb = ground_anchored(right.formulas[right.index_of(beta)], v, false, block);
  return subsume_reduce(f.conjoin(ga).conjoin(hb));
}

Rational block_prob(const CnfFormula& y, const Tid& block) {
  return weighted_count(y, lineage_probs(y, block));
}

std::array<Rational, 2> pendant_values(const std::array<std::array<Rational, 2>, 2>& z,
                                       const Rational& c, PendantMode mode) {
  std::array<Rational, 2> y;
  for (int a = 0; a < 2; ++a) {
    if (mode == PendantMode::PaperSum)
      y[a] = z[a][0] + z[a][1];
    else
      y[a] = (1 - c) * z[a][0] + c * z[a][1];
  }
  return y;
}

BlockValues compute_block_values(const Query& q, std::pair<int, int> edge_params,
                                 int pendant_param, const Rational& c, PendantMode mode) {
  auto zmat = [&](int p) {
    BlockSpec spec;
    spec.u = "u";
    spec.v = "v";
    spec.length = p;
    spec.c = c;
    spec.binary_symbols = q.binary_symbols();
    Tid block = build_zigzag_block(spec);
    std::array<std::array<Rational, 2>, 2> z;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        z[a][b] = block_prob(restricted_lineage(q, block, "u", a, "v", b), block);
    return z;
  };
  auto z1 = zmat(edge_params.first);
  auto z2 = zmat(edge_params.second);
  BlockValues bv;
  bv.mode = mode;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) bv.z[a][b] = z1[a][b] * z2[a][b];
  bv.y_pendant = pendant_values(zmat(pendant_param), c, mode);
  return bv;
}

Rational pr_structured(const Graph& g, const BlockValues& bv, const Rational& c) {
  if (g.nodes < 1 || g.nodes > 24) throw std::invalid_argument("node count out of range");
  for (auto [i, j] : g.edges)
    if (i < 1 || i > g.nodes || j < 1 || j > g.nodes)
      throw std::invalid_argument("edge endpoint outside the node range");
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b)
      if (bv.z[a][b] < 0 || bv.z[a][b] > 1)
        throw std::invalid_argument("block value outside [0,1]");
    if (bv.y_pendant[a] < 0)
      throw std::invalid_argument("pendant value negative");
  }
  Rational total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g.nodes); ++mask) {
    Rational term = 1;
    for (auto [i, j] : g.edges) term *= bv.z[(mask >> (i - 1)) & 1][(mask >> (j - 1)) & 1];
    for (int i = 0; i < g.nodes; ++i) {
      int a = (mask >> i) & 1;
      term *= (a ? c : 1 - c) * bv.y_pendant[a];
    }
    total += term;
  }
  return total;
}

Rational pr_mobius(const Query& q, const std::vector<BlockInstance>& edge_blocks,
                   const std::vector<BlockInstance>& left_pendants,
                   const std::vector<BlockInstance>& right_pendants) {
  GhDecomposition gh = gh_decomposition(q);
  Lattice lg = build_lattice(gh.g);
  Lattice lh = build_lattice(gh.h);

  std::vector<std::string> U, V;
  auto add_unique = [](std::vector<std::string>& xs, const std::string& x) {
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
  };
  for (const auto& e : edge_blocks) {
    add_unique(U, e.u);
    add_unique(V, e.v);
  }
  for (const auto& p : left_pendants) add_unique(U, p.u);
  for (const auto& p : right_pendants) add_unique(V, p.v);

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& e : edge_blocks)
    if (!pairs.insert({e.u, e.v}).second)
      throw std::invalid_argument("two blocks on the same pair");

  bool pendant_form = !left_pendants.empty() || !right_pendants.empty();
  if (pendant_form) {
    std::set<std::string> lcov, rcov;
    for (const auto& p : left_pendants) lcov.insert(p.u);
    for (const auto& p : right_pendants) rcov.insert(p.v);
    if (left_pendants.size() != U.size() || lcov.size() != U.size() ||
        right_pendants.size() != V.size() || rcov.size() != V.size())
      throw std::invalid_argument("pendant blocks must cover each node exactly once");
  } else if (pairs.size() != U.size() * V.size()) {
    throw std::invalid_argument("edge blocks must cover every left-right pair");
  }

  std::vector<std::size_t> lg0, lh0;
  for (std::size_t i : lg.support)
    if (i != 0) lg0.push_back(i);
  for (std::size_t i : lh.support)
    if (i != 0) lh0.push_back(i);

  std::map<std::string, std::size_t> ui, vi;
  for (std::size_t i = 0; i < U.size(); ++i) ui[U[i]] = i;
  for (std::size_t j = 0; j < V.size(); ++j) vi[V[j]] = j;

  std::map<std::tuple<const BlockInstance*, std::size_t, std::size_t>, Rational> memo;
  auto Y = [&](const BlockInstance& b, std::size_t ai, std::size_t bi) {
    auto key = std::make_tuple(&b, ai, bi);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    CnfFormula y = restricted_lineage(q, b.tid, b.u, lg.elements[ai], b.v,
                                      lh.elements[bi], lg, lh);
    Rational r = block_prob(y, b.tid);
    memo.emplace(key, r);
    return r;
  };

  // Odometer over sigma: U -> lg0, tau: V -> lh0.
  std::vector<std::size_t> si(U.size(), 0), ti(V.size(), 0);
  Rational total = 0;
  for (;;) {
    Rational term = 1;
    for (std::size_t i = 0; i < U.size(); ++i) term *= Rational(lg.mobius[lg0[si[i]]]);
    for (std::size_t j = 0; j < V.size(); ++j) term *= Rational(lh.mobius[lh0[ti[j]]]);
    for (const auto& e : edge_blocks) term *= Y(e, lg0[si[ui[e.u]]], lh0[ti[vi[e.v]]]);
    for (const auto& p : left_pendants) term *= Y(p, lg0[si[ui[p.u]]], 0);
    for (const auto& p : right_pendants) term *= Y(p, 0, lh0[ti[vi[p.v]]]);
    total += term;

    std::size_t k = 0;
    for (; k < si.size(); ++k) {
      if (++si[k] < lg0.size()) break;
      si[k] = 0;
    }
    if (k < si.size()) continue;
    for (k = 0; k < ti.size(); ++k) {
      if (++ti[k] < lh0.size()) break;
      ti[k] = 0;
    }
    if (k == ti.size()) break;
  }
  // One inversion step per original node, each contributing a factor -1;
  // the pendant blocks add factors but remove none of those steps.
  if ((U.size() + V.size()) % 2 != 0) total = -total;
  return total;
}

}  // namespace gfomc
