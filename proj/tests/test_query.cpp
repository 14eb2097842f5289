#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gfomc/formula.hpp"
#include "gfomc/query.hpp"

using namespace gfomc;

namespace {

// Ground-truth semantics: evaluate a query over an explicit nu x nv domain
// under one assignment of all ground atoms, encoded as a bitmask.
struct GroundCtx {
  int nu, nv;
  std::vector<Symbol> bins;

  static GroundCtx make(const std::set<Symbol>& syms, int nu, int nv) {
    GroundCtx g{nu, nv, {}};
    for (const auto& s : syms)
      if (s != "R" && s != "T") g.bins.push_back(s);
    return g;
  }
  int nvars() const { return nu + nv + (int)bins.size() * nu * nv; }
  int r_idx(int u) const { return u; }
  int t_idx(int v) const { return nu + v; }
  int b_idx(int k, int u, int v) const { return nu + nv + k * nu * nv + u * nv + v; }
  int bin_of(const Symbol& s) const {
    for (int k = 0; k < (int)bins.size(); ++k)
      if (bins[k] == s) return k;
    return -1;
  }
};

bool eval_clause(const Clause& c, const GroundCtx& g, std::uint64_t m) {
  auto bit = [&](int i) { return ((m >> i) & 1) != 0; };
  auto atom = [&](const Symbol& s, int u, int v) {
    if (s == "R") return bit(g.r_idx(u));
    if (s == "T") return bit(g.t_idx(v));
    return bit(g.b_idx(g.bin_of(s), u, v));
  };
  if (c.head == 'b') {
    const auto& sc = c.subclauses.empty() ? std::set<Symbol>{} : c.subclauses[0];
    for (int u = 0; u < g.nu; ++u)
      for (int v = 0; v < g.nv; ++v) {
        bool ok = (c.has_R && bit(g.r_idx(u))) || (c.has_T && bit(g.t_idx(v)));
        for (const auto& s : sc)
          if (ok) break; else ok = atom(s, u, v);
        if (!ok) return false;
      }
    return true;
  }
  bool xh = c.head == 'x';
  int no = xh ? g.nu : g.nv;
  int ni = xh ? g.nv : g.nu;
  for (int o = 0; o < no; ++o) {
    bool point = xh ? (c.has_R && bit(g.r_idx(o))) : (c.has_T && bit(g.t_idx(o)));
    for (const auto& sc : c.subclauses) {
      if (point) break;
      bool all = true;
      for (int i = 0; i < ni && all; ++i) {
        int u = xh ? o : i, v = xh ? i : o;
        bool ok = false;
        for (const auto& s : sc)
          if ((ok = atom(s, u, v))) break;
        all = ok;
      }
      point = all;
    }
    if (!point) return false;
  }
  return true;
}

bool eval_query(const Query& q, const GroundCtx& g, std::uint64_t m) {
  if (q.constant_true) return true;
  if (q.constant_false) return false;
  for (const auto& c : q.clauses)
    if (!eval_clause(c, g, m)) return false;
  return true;
}

// Logical equivalence over one finite domain, checked exhaustively.
bool equal_on(const Query& a, const Query& b, int nu, int nv) {
  auto syms = a.symbols();
  auto sb = b.symbols();
  syms.insert(sb.begin(), sb.end());
  GroundCtx g = GroundCtx::make(syms, nu, nv);
  REQUIRE(g.nvars() <= 20);
  for (std::uint64_t m = 0; m < (1ULL << g.nvars()); ++m)
    if (eval_query(a, g, m) != eval_query(b, g, m)) return false;
  return true;
}

bool clause_implies_on(const Clause& c, const Clause& d, int nu, int nv) {
  Query qa, qb;
  qa.clauses.push_back(c);
  qb.clauses.push_back(d);
  auto syms = qa.symbols();
  auto sb = qb.symbols();
  syms.insert(sb.begin(), sb.end());
  GroundCtx g = GroundCtx::make(syms, nu, nv);
  for (std::uint64_t m = 0; m < (1ULL << g.nvars()); ++m)
    if (eval_clause(c, g, m) && !eval_clause(d, g, m)) return false;
  return true;
}

std::set<Symbol> nonempty_subset(std::mt19937& rng, const std::vector<Symbol>& pool, int maxn) {
  std::set<Symbol> out;
  int n = 1 + (int)(rng() % (unsigned)maxn);
  for (int i = 0; i < n; ++i) out.insert(pool[rng() % pool.size()]);
  return out;
}

Clause random_clause(std::mt19937& rng, const std::vector<Symbol>& pool) {
  Clause c;
  unsigned shape = rng() % 10;
  if (shape < 4) {
    c.head = 'b';
    auto s = nonempty_subset(rng, pool, 3);
    unsigned un = rng() % 4;
    if (un == 1) s.insert("R");
    if (un == 2) s.insert("T");
    c.subclauses.push_back(std::move(s));
  } else {
    c.head = shape < 7 ? 'x' : 'y';
    int m = 2 + (int)(rng() % 2);
    for (int i = 0; i < m; ++i)
      c.subclauses.push_back(nonempty_subset(rng, pool, 2));
  }
  return normalize_clause(std::move(c));
}

Query random_query(std::mt19937& rng, const std::vector<Symbol>& pool, int max_clauses) {
  Query q;
  int n = 1 + (int)(rng() % (unsigned)max_clauses);
  for (int i = 0; i < n; ++i) q.clauses.push_back(random_clause(rng, pool));
  return q;
}

const char* kQStar = "forall x forall y (R(x) | S(x,y)) & forall x forall y (S(x,y) | T(y))";
const char* kQChain2 =
    "forall x forall y (R(x) | S1(x,y)) & forall x forall y (S1(x,y) | S2(x,y)) & "
    "forall x forall y (S2(x,y) | T(y))";
const char* kQChain3 =
    "forall x forall y (R(x) | S1(x,y)) & forall x forall y (S1(x,y) | S2(x,y)) & "
    "forall x forall y (S2(x,y) | S3(x,y)) & forall x forall y (S3(x,y) | T(y))";
const char* kQ8 =
    "forall x forall y (R(x) | S1(x,y) | S2(x,y)) & forall x forall y (S1(x,y) | T(y)) & "
    "forall x forall y (S2(x,y) | T(y))";
const char* kQNonFinal1 =
    "forall x forall y (R(x) | S1(x,y) | S2(x,y)) & forall x forall y (S1(x,y) | T(y))";
const char* kQNonFinal2 =
    "forall x forall y (R(x) | S1(x,y)) & forall x forall y (R(x) | S2(x,y)) & "
    "forall x forall y (S1(x,y) | T(y)) & forall x forall y (S2(x,y) | T(y))";
const char* kQForbidden =
    "forall x (forall y (U(x,y) | S1(x,y)) | forall y (U(x,y) | S2(x,y))) & "
    "forall x forall y (S1(x,y) | S2(x,y) | S3(x,y) | S4(x,y)) & "
    "forall y (forall x (V(x,y) | S3(x,y)) | forall x (V(x,y) | S4(x,y)))";
const char* kQManyUbiquitous =
    "forall x (forall y (U(x,y) | U2(x,y) | S1(x,y) | S2(x,y)) | "
    "forall y (U(x,y) | U2(x,y) | S2(x,y) | S3(x,y)) | "
    "forall y (U(x,y) | U2(x,y) | S1(x,y) | S3(x,y))) & "
    "forall x forall y (S1(x,y) | S2(x,y) | S3(x,y) | S4(x,y) | S5(x,y)) & "
    "forall y (forall x (V(x,y) | S4(x,y)) | forall x (V(x,y) | S5(x,y))) & "
    "forall x forall y (U(x,y) | S1(x,y) | S2(x,y) | S3(x,y)) & "
    "forall x forall y (U2(x,y) | S1(x,y) | S2(x,y) | S3(x,y))";
const char* kQForbiddenChain =
    "forall x (forall y (U(x,y) | S1(x,y)) | forall y (U(x,y) | S2(x,y))) & "
    "forall x forall y (S1(x,y) | S2(x,y) | S3(x,y)) & "
    "forall x forall y (S3(x,y) | S4(x,y) | S5(x,y)) & "
    "forall y (forall x (V(x,y) | S4(x,y)) | forall x (V(x,y) | S5(x,y)))";
const char* kQRunning =
    "forall x (forall y (S1(x,y)) | forall y (S2(x,y))) & "
    "forall x forall y (S1(x,y) | S3(x,y)) & "
    "forall y (forall x (S3(x,y)) | forall x (S4(x,y)))";
const char* kQNonForbiddenFinal =
    "forall x (forall y (W(x,y) | S1(x,y) | S2(x,y)) | forall y (U(x,y) | S1(x,y) | S2(x,y)) | "
    "forall y (U(x,y) | W(x,y) | S1(x,y))) & "
    "forall x forall y (S1(x,y) | S3(x,y) | S4(x,y)) & "
    "forall y (forall x (V(x,y) | S3(x,y)) | forall x (V(x,y) | S4(x,y)))";

}  // namespace

TEST_CASE("parser accepts the clause grammar") {
  Query q = parse_query(kQStar);
  REQUIRE(q.clauses.size() == 2);
  CHECK(q.clauses[0].kind == ClauseKind::LeftI);
  CHECK(q.clauses[0].has_R);
  CHECK(q.clauses[0].subclauses == std::vector<std::set<Symbol>>{{"S"}});
  CHECK(q.clauses[1].kind == ClauseKind::RightI);
  CHECK(q.symbols() == std::set<Symbol>{"R", "S", "T"});
  CHECK(q.binary_symbols() == std::set<Symbol>{"S"});

  Query l2 = parse_query("forall x (forall y (S1(x,y)) | forall y (S2(x,y) | S3(x,y)))");
  REQUIRE(l2.clauses.size() == 1);
  CHECK(l2.clauses[0].kind == ClauseKind::LeftII);
  CHECK(l2.clauses[0].head == 'x');
  CHECK(l2.clauses[0].subclauses ==
        std::vector<std::set<Symbol>>{{"S1"}, {"S2", "S3"}});

  Query r2 = parse_query("forall y (forall x (S1(x,y)) | forall x (S2(x,y)))");
  CHECK(r2.clauses[0].kind == ClauseKind::RightII);

  CHECK(parse_query("forall x forall y (R(x))").clauses[0].kind == ClauseKind::UnaryLeft);
  CHECK(parse_query("forall x forall y (T(y))").clauses[0].kind == ClauseKind::UnaryRight);
  CHECK(parse_query("forall x forall y (A(x,y))").clauses[0].kind == ClauseKind::Middle);
  CHECK(parse_query("forall x forall y (R(x) | T(y))").clauses[0].kind == ClauseKind::Invalid);

  // Whitespace is free-form.
  Query spread = parse_query("forall x forall y ( R(x)\n | S(x,y) )\n& forall x forall y (S(x,y)|T(y))");
  CHECK(spread == q);

  // str() output reparses to the same query.
  for (const char* text : {kQStar, kQChain2, kQ8, kQForbidden, kQRunning}) {
    Query orig = parse_query(text);
    CHECK(parse_query(orig.str()) == orig);
  }
}

TEST_CASE("parser reports line and column") {
  try {
    parse_query("forall x forall y (R(y))");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.col == 22);
  }
  // No flat y-then-x form.
  CHECK_THROWS_AS(parse_query("forall y forall x (S(x,y))"), ParseError);
  CHECK_THROWS_AS(parse_query("forall x forall y (T(x))"), ParseError);
  CHECK_THROWS_AS(parse_query("forall x (S(x,y))"), ParseError);
  CHECK_THROWS_AS(parse_query("forall x forall y (S(x))"), ParseError);
  CHECK_THROWS_AS(parse_query("forall x forall y (S(x,y)) extra"), ParseError);
  CHECK_THROWS_AS(parse_query("forall x forall y (S(x,y)) & "), ParseError);
  CHECK_THROWS_AS(parse_query("forall x forall y ()"), ParseError);
  CHECK_THROWS_AS(parse_query("forall x forall y (S(x,y) % T(y))"), ParseError);
  try {
    parse_query("forall x forall y (S(x,y))\n& forall q forall y (S(x,y))");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.col == 10);
  }
}

TEST_CASE("clause normalization computes kinds and factors unary atoms") {
  // A head-variable atom inside a forall-subclause factors out to the top.
  Query f = parse_query("forall x (forall y (R(x) | S(x,y)))");
  CHECK(f.clauses[0].kind == ClauseKind::LeftI);
  CHECK(f.clauses[0].head == 'b');
  CHECK(f.clauses[0].has_R);

  // With two subclauses the factored atom makes the clause fit no shape.
  Query bad = parse_query("forall x (forall y (R(x) | S1(x,y)) | forall y (S2(x,y)))");
  CHECK(bad.clauses[0].kind == ClauseKind::Invalid);

  // The other side's unary atom never belongs under this head.
  Query bad2 = parse_query("forall x (forall y (T(y) | S1(x,y)) | forall y (S2(x,y)))");
  CHECK(bad2.clauses[0].kind == ClauseKind::Invalid);

  // A subclause that is a subset of another is the stronger disjunct: keep
  // the superset and drop the subset, then a singleton flattens.
  Query ab = parse_query("forall x (forall y (S1(x,y)) | forall y (S1(x,y) | S2(x,y)))");
  CHECK(ab.clauses[0].kind == ClauseKind::Middle);
  CHECK(ab.clauses[0].subclauses == std::vector<std::set<Symbol>>{{"S1", "S2"}});
  CHECK(equal_on(ab, parse_query("forall x forall y (S1(x,y) | S2(x,y))"), 2, 2));

  // Normalization is idempotent.
  std::mt19937 rng(21);
  std::vector<Symbol> pool{"A", "B", "C"};
  for (int t = 0; t < 200; ++t) {
    Clause c = random_clause(rng, pool);
    CHECK(normalize_clause(c) == c);
  }
}

TEST_CASE("clause implication matches exhaustive semantics") {
  // Targeted pairs, one per rule direction.
  auto c1 = [](const char* s) { return parse_query(s).clauses[0]; };
  // Same-side x: every disjunct strengthens into one of the target's.
  CHECK(clause_implies(c1("forall x forall y (S1(x,y))"),
                       c1("forall x (forall y (S1(x,y)) | forall y (S2(x,y)))")));
  CHECK_FALSE(clause_implies(c1("forall x forall y (S1(x,y) | S2(x,y))"),
                             c1("forall x (forall y (S1(x,y)) | forall y (S2(x,y)))")));
  // Unary atom blocks implication into a clause without it.
  CHECK(clause_implies(c1("forall x forall y (R(x))"),
                       c1("forall x forall y (R(x) | S1(x,y))")));
  CHECK_FALSE(clause_implies(c1("forall x forall y (R(x))"),
                             c1("forall x forall y (S1(x,y))")));
  // Cross-side: all atoms of a forall-x disjunction inside one target subclause.
  CHECK(clause_implies(c1("forall x (forall y (S1(x,y)) | forall y (S2(x,y)))"),
                       c1("forall x forall y (S1(x,y) | S2(x,y) | S3(x,y))")));
  CHECK(clause_implies(c1("forall y (forall x (S3(x,y)) | forall x (S4(x,y)))"),
                       c1("forall x forall y (S1(x,y) | S3(x,y) | S4(x,y))")));
  CHECK_FALSE(clause_implies(c1("forall x (forall y (S1(x,y)) | forall y (S2(x,y)))"),
                             c1("forall y (forall x (S1(x,y)) | forall x (S2(x,y)))")));
  CHECK(clause_implies(c1("forall x forall y (S2(x,y))"),
                       c1("forall x forall y (S2(x,y) | T(y))")));
  // Clauses outside the grammar never take part in implications.
  Clause inv = c1("forall x forall y (R(x) | T(y))");
  REQUIRE(inv.kind == ClauseKind::Invalid);
  CHECK_FALSE(clause_implies(inv, inv));
  CHECK_FALSE(clause_implies(inv, c1("forall x forall y (R(x))")));
  CHECK_FALSE(clause_implies(c1("forall x forall y (R(x))"), inv));

  // Randomized completeness and soundness against model checking: the
  // syntactic test agrees with semantic implication, whose counterexamples
  // for these shapes always fit in a 3x1, 1x3, or 2x2 domain.
  std::mt19937 rng(22);
  std::vector<Symbol> pool{"A", "B"};
  for (int t = 0; t < 120; ++t) {
    Clause c = random_clause(rng, pool);
    Clause d = random_clause(rng, pool);
    bool sem = clause_implies_on(c, d, 1, 1) && clause_implies_on(c, d, 1, 3) &&
               clause_implies_on(c, d, 3, 1) && clause_implies_on(c, d, 2, 2);
    CAPTURE(c.str());
    CAPTURE(d.str());
    CHECK(clause_implies(c, d) == sem);
  }
}

TEST_CASE("minimization drops implied clauses, keeps first on ties") {
  Query q = parse_query("forall x forall y (S1(x,y)) & forall x forall y (S1(x,y) | S2(x,y))");
  Query m = minimize_query(q);
  REQUIRE(m.clauses.size() == 1);
  CHECK(m.clauses[0].subclauses[0] == std::set<Symbol>{"S1"});

  // Two incomparable left clauses survive.
  Query two = parse_query(
      "forall x (forall y (S1(x,y) | S2(x,y)) | forall y (S1(x,y) | S3(x,y))) & "
      "forall x (forall y (S1(x,y)) | forall y (S2(x,y) | S3(x,y)))");
  CHECK(minimize_query(two).clauses.size() == 2);

  // Cross-side: the forall-x disjunction makes the wide middle redundant.
  Query cross = parse_query(
      "forall x (forall y (S1(x,y)) | forall y (S2(x,y))) & "
      "forall x forall y (S1(x,y) | S2(x,y) | S3(x,y) | S4(x,y))");
  Query mc = minimize_query(cross);
  REQUIRE(mc.clauses.size() == 1);
  CHECK(mc.clauses[0].kind == ClauseKind::LeftII);

  // Duplicate clauses collapse to the first.
  Query dup = parse_query("forall x forall y (A(x,y) | B(x,y)) & forall x forall y (B(x,y) | A(x,y))");
  CHECK(minimize_query(dup).clauses.size() == 1);

  // All clauses implied away is impossible, but a single tautology-free
  // query minimizes to itself; idempotence and semantic equivalence hold
  // on random queries.
  std::mt19937 rng(23);
  std::vector<Symbol> pool{"A", "B", "C"};
  for (int t = 0; t < 60; ++t) {
    Query r = random_query(rng, pool, 3);
    Query mr = minimize_query(r);
    CHECK(minimize_query(mr) == mr);
    CHECK(equal_on(r, mr, 2, 2));
    CHECK(equal_on(r, mr, 1, 3));
    CHECK(equal_on(r, mr, 3, 1));
  }
}

TEST_CASE("rewrites pin one symbol and re-minimize") {
  Query qs = parse_query(kQStar);
  Query s0 = rewrite_symbol(qs, "S", 0);
  CHECK(s0 == minimize_query(parse_query("forall x forall y (R(x)) & forall x forall y (T(y))")));
  CHECK(rewrite_symbol(qs, "S", 1).constant_true);

  Query c2 = parse_query(kQChain2);
  Query c2s1 = rewrite_symbol(c2, "S1", 0);
  CHECK(c2s1 == minimize_query(parse_query("forall x forall y (R(x)) & forall x forall y (S2(x,y))")));

  // Setting a symbol true inside a forall-subclause satisfies the whole clause.
  Query l2 = parse_query("forall x (forall y (S1(x,y)) | forall y (S2(x,y))) & forall x forall y (S3(x,y))");
  Query l2s1 = rewrite_symbol(l2, "S1", 1);
  REQUIRE(l2s1.clauses.size() == 1);
  CHECK(l2s1.clauses[0].subclauses[0] == std::set<Symbol>{"S3"});

  // A middle clause falsified makes the query false.
  Query mid = parse_query("forall x forall y (A(x,y)) & forall x forall y (B(x,y))");
  CHECK(rewrite_symbol(mid, "A", 0).constant_false);

  CHECK_THROWS_AS(rewrite_symbol(qs, "NoSuch", 0), std::invalid_argument);
  CHECK_THROWS_AS(rewrite_symbol(qs, "S", 2), std::invalid_argument);

  // Semantic check: rewriting equals pinning every ground atom of the symbol.
  std::mt19937 rng(24);
  std::vector<Symbol> pool{"A", "B", "C"};
  for (int t = 0; t < 40; ++t) {
    Query r = random_query(rng, pool, 3);
    for (const auto& s : r.symbols()) {
      for (int val = 0; val < 2; ++val) {
        Query rw = rewrite_symbol(r, s, val);
        for (auto [nu, nv] : {std::pair{2, 2}, std::pair{1, 3}, std::pair{3, 1}}) {
          GroundCtx g = GroundCtx::make(r.symbols(), nu, nv);
          for (std::uint64_t m = 0; m < (1ULL << g.nvars()); ++m) {
            // Pin s's atoms inside m.
            std::uint64_t mm = m;
            auto set_bit = [&](int i) {
              if (val) mm |= (1ULL << i); else mm &= ~(1ULL << i);
            };
            if (s == "R") for (int u = 0; u < nu; ++u) set_bit(g.r_idx(u));
            else if (s == "T") for (int v = 0; v < nv; ++v) set_bit(g.t_idx(v));
            else
              for (int u = 0; u < nu; ++u)
                for (int v = 0; v < nv; ++v) set_bit(g.b_idx(g.bin_of(s), u, v));
            if (eval_query(r, g, mm) != eval_query(rw, g, mm)) {
              CAPTURE(r.str());
              CAPTURE(s);
              CAPTURE(val);
              REQUIRE(false);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("classification of the worked catalog") {
  ClassReport r = classify(parse_query(kQStar));
  CHECK(r.bipartite);
  CHECK(r.left_type == 'I');
  CHECK(r.right_type == 'I');
  CHECK(r.unsafe);
  CHECK(*r.length == 1);
  CHECK(*r.witness_path == std::vector<std::size_t>{0, 1});
  CHECK(r.final_query);
  CHECK_FALSE(r.forbidden);

  // Disconnected left and right parts are safe.
  ClassReport safe = classify(parse_query(
      "forall x forall y (R(x) | S1(x,y)) & forall x forall y (S2(x,y) | T(y))"));
  CHECK(safe.safe);
  CHECK_FALSE(safe.length.has_value());

  ClassReport c2 = classify(parse_query(kQChain2));
  CHECK(*c2.length == 2);
  CHECK(*c2.witness_path == std::vector<std::size_t>{0, 1, 2});
  CHECK(c2.final_query);

  ClassReport c3 = classify(parse_query(kQChain3));
  CHECK(*c3.length == 3);
  CHECK(c3.final_query);

  ClassReport q8 = classify(parse_query(kQ8));
  CHECK(*q8.length == 1);
  CHECK(*q8.witness_path == std::vector<std::size_t>{0, 1});  // lexicographic tie-break
  CHECK(q8.final_query);

  CHECK_FALSE(classify(parse_query(kQNonFinal1)).final_query);
  CHECK_FALSE(classify(parse_query(kQNonFinal2)).final_query);
  CHECK(classify(parse_query(kQNonFinal1)).unsafe);
  CHECK(classify(parse_query(kQNonFinal2)).unsafe);

  // Unary clauses cannot anchor a path.
  ClassReport un = classify(parse_query(
      "forall x forall y (R(x)) & forall x forall y (S(x,y) | T(y))"));
  CHECK(un.safe);

  // Invalid clause shape: not a bipartite query.
  ClassReport inv = classify(parse_query("forall x forall y (R(x) | T(y))"));
  CHECK_FALSE(inv.bipartite);

  // Constants are safe.
  Query t;
  t.constant_true = true;
  CHECK(classify(t).safe);

  // Mixed clause kinds report the type-II side.
  ClassReport mixed = classify(parse_query(
      "forall x (forall y (S1(x,y)) | forall y (S2(x,y))) & "
      "forall x forall y (R(x) | S1(x,y)) & forall x forall y (S1(x,y) | T(y))"));
  CHECK(mixed.left_type == '2');
  CHECK(mixed.right_type == 'I');
}

TEST_CASE("classification is invariant under symbol renaming") {
  auto rename = [](const Query& q, const std::map<Symbol, Symbol>& f) {
    Query out;
    for (const auto& c : q.clauses) {
      Clause nc = c;
      nc.subclauses.clear();
      for (const auto& sc : c.subclauses) {
        std::set<Symbol> ns;
        for (const auto& s : sc) ns.insert(f.count(s) ? f.at(s) : s);
        nc.subclauses.push_back(std::move(ns));
      }
      out.clauses.push_back(normalize_clause(std::move(nc)));
    }
    return out;
  };
  for (const char* text : {kQStar, kQChain2, kQ8, kQForbidden, kQRunning, kQNonFinal2}) {
    Query q = parse_query(text);
    std::map<Symbol, Symbol> f;
    for (const auto& s : q.binary_symbols()) f[s] = "Zz" + s;
    Query qr = rename(q, f);
    ClassReport a = classify(q), b = classify(qr);
    CHECK(a.bipartite == b.bipartite);
    CHECK(a.left_type == b.left_type);
    CHECK(a.right_type == b.right_type);
    CHECK(a.unsafe == b.unsafe);
    CHECK(a.length == b.length);
    CHECK(a.witness_path == b.witness_path);
    CHECK(a.final_query == b.final_query);
    CHECK(a.forbidden == b.forbidden);
  }
}

TEST_CASE("rewrites preserve side types and never shorten the path") {
  for (const char* text :
       {kQStar, kQChain2, kQChain3, kQ8, kQNonFinal1, kQNonFinal2, kQForbidden, kQRunning}) {
    Query q = minimize_query(parse_query(text));
    ClassReport r = classify(q);
    REQUIRE(r.unsafe);
    for (const auto& s : q.symbols()) {
      for (int v = 0; v < 2; ++v) {
        Query sub = rewrite_symbol(q, s, v);
        if (sub.is_constant()) continue;
        ClassReport rs = classify(sub);
        if (rs.left_type != '-') CHECK(rs.left_type == r.left_type);
        if (rs.right_type != '-') CHECK(rs.right_type == r.right_type);
        if (rs.unsafe) CHECK(*rs.length >= *r.length);
      }
    }
  }
}

TEST_CASE("finality of the type-II examples") {
  CHECK(classify(parse_query(kQForbidden)).final_query);
  CHECK(classify(parse_query(kQManyUbiquitous)).final_query);
  CHECK(classify(parse_query(kQForbiddenChain)).final_query);
  CHECK(classify(parse_query(kQRunning)).final_query);
  CHECK(classify(parse_query(kQNonForbiddenFinal)).final_query);

  ClassReport fc = classify(parse_query(kQForbiddenChain));
  CHECK(*fc.length == 3);
  CHECK(fc.left_type == '2');
  CHECK(fc.right_type == '2');
}

TEST_CASE("forbidden pattern detection") {
  ForbiddenReport f = forbidden_report(parse_query(kQForbidden));
  CHECK(f.applicable);
  CHECK(f.forbidden);
  CHECK(f.ubiquitous_left == std::set<Symbol>{"U"});
  CHECK(f.ubiquitous_right == std::set<Symbol>{"V"});
  CHECK(f.violations.empty());

  ForbiddenReport many = forbidden_report(parse_query(kQManyUbiquitous));
  CHECK(many.applicable);
  CHECK(many.forbidden);
  CHECK(many.ubiquitous_left == std::set<Symbol>{"U", "U2"});
  CHECK(many.ubiquitous_right == std::set<Symbol>{"V"});

  CHECK(forbidden_report(parse_query(kQForbiddenChain)).forbidden);

  // Final but not forbidden: an endpoint symbol that is neither ubiquitous
  // nor shared with the path neighbor.
  ForbiddenReport run = forbidden_report(parse_query(kQRunning));
  CHECK(run.applicable);
  CHECK_FALSE(run.forbidden);
  REQUIRE_FALSE(run.violations.empty());

  ForbiddenReport nff = forbidden_report(parse_query(kQNonForbiddenFinal));
  CHECK(nff.applicable);
  CHECK_FALSE(nff.forbidden);
  bool mentions_w = false;
  for (const auto& v : nff.violations) mentions_w |= v.find(" W ") != std::string::npos;
  CHECK(mentions_w);
  CHECK(nff.ubiquitous_left == std::set<Symbol>{"S1"});

  // Type-I and non-final queries are out of scope for the pattern.
  CHECK_FALSE(forbidden_report(parse_query(kQStar)).applicable);
  CHECK_FALSE(forbidden_report(parse_query(kQNonFinal1)).applicable);

  // classify agrees with the dedicated report.
  CHECK(classify(parse_query(kQForbidden)).forbidden);
  CHECK_FALSE(classify(parse_query(kQRunning)).forbidden);
}

TEST_CASE("zigzag transformation structure") {
  Query zg = zigzag_query(parse_query(kQStar));
  Query expect = minimize_query(parse_query(
      "forall x forall y (R(x) | Sc1(x,y)) & forall x forall y (T(y) | Sc2(x,y)) & "
      "forall x forall y (Sc1(x,y) | Tc12(x,y)) & forall x forall y (Sc2(x,y) | Tc12(x,y))"));
  CHECK(zg == expect);

  // Type-II right part forces at least three layers.
  Query zr = zigzag_query(parse_query(kQRunning));
  auto syms = zr.symbols();
  CHECK(syms.count("S1c3"));
  CHECK(syms.count("Tc12") == 0);  // no type-I right clause in the input
  CHECK(syms.count("R") == 0);     // interior layers only use copies

  CHECK_THROWS_AS(zigzag_query(parse_query(
                      "forall x forall y (R(x) | S1(x,y)) & forall x forall y (S2(x,y) | T(y))")),
                  std::invalid_argument);
  Query t;
  t.constant_true = true;
  CHECK_THROWS_AS(zigzag_query(t), std::invalid_argument);
}

TEST_CASE("zigzag output stays unsafe with matching types and a longer path") {
  for (const char* text : {kQStar, kQChain2, kQ8, kQForbidden, kQRunning}) {
    Query q = parse_query(text);
    ClassReport orig = classify(q);
    REQUIRE(orig.unsafe);
    Query zq = zigzag_query(q);
    ClassReport zr = classify(zq);
    CAPTURE(text);
    CHECK(zr.bipartite);
    CHECK(zr.unsafe);
    CHECK(zr.left_type == orig.left_type);
    CHECK(zr.right_type == orig.right_type);
    CHECK(*zr.length >= 2 * *orig.length);
  }
}

TEST_CASE("left and right products of subclauses") {
  // Two left clauses: the four products reduce to three distinct factors.
  Query q = parse_query(
      "forall x (forall y (S1(x,y) | S2(x,y)) | forall y (S1(x,y) | S3(x,y))) & "
      "forall x (forall y (S1(x,y)) | forall y (S2(x,y) | S3(x,y))) & "
      "forall y (forall x (S4(x,y)) | forall x (S5(x,y)))");
  GhDecomposition gh = gh_decomposition(q);
  REQUIRE(gh.g.size() == 3);
  CHECK(gh.g[0].key() == CnfFormula::from_clauses({{"S1"}}).key());
  CHECK(gh.g[1].key() == CnfFormula::from_clauses({{"S1", "S2"}, {"S2", "S3"}}).key());
  CHECK(gh.g[2].key() == CnfFormula::from_clauses({{"S1", "S3"}, {"S2", "S3"}}).key());
  REQUIRE(gh.h.size() == 2);
  CHECK(gh.h[0].key() == CnfFormula::from_clauses({{"S4"}}).key());
  CHECK(gh.h[1].key() == CnfFormula::from_clauses({{"S5"}}).key());
  CHECK(gh.c.is_true());

  Query qr = parse_query(kQRunning);
  GhDecomposition gr = gh_decomposition(qr);
  REQUIRE(gr.g.size() == 2);
  CHECK(gr.c.key() == CnfFormula::from_clauses({{"S1", "S3"}}).key());

  // Duplicate products collapse, keeping first occurrence order.
  Query dup = parse_query(
      "forall x (forall y (S1(x,y)) | forall y (S2(x,y))) & "
      "forall x (forall y (S1(x,y)) | forall y (S2(x,y))) & "
      "forall y (forall x (S3(x,y)) | forall x (S4(x,y)))");
  GhDecomposition gd = gh_decomposition(dup);
  REQUIRE(gd.g.size() == 3);
  CHECK(gd.g[0].key() == CnfFormula::from_clauses({{"S1"}}).key());
  CHECK(gd.g[1].key() == CnfFormula::from_clauses({{"S1"}, {"S2"}}).key());
  CHECK(gd.g[2].key() == CnfFormula::from_clauses({{"S2"}}).key());

  CHECK_THROWS_AS(gh_decomposition(parse_query(kQStar)), std::invalid_argument);
}

TEST_CASE("closure lattice and Moebius numbers") {
  auto F = [](std::vector<std::vector<VarId>> cl) { return CnfFormula::from_clauses(std::move(cl)); };

  // Pairwise conjunctions close up to the full set.
  Lattice l1 = build_lattice({F({{"Z1"}, {"Z2"}}), F({{"Z1"}, {"Z3"}}), F({{"Z2"}, {"Z3"}})});
  REQUIRE(l1.elements.size() == 5);
  CHECK(l1.elements[0] == std::set<std::size_t>{});
  CHECK(l1.elements[1] == std::set<std::size_t>{1});
  CHECK(l1.elements[2] == std::set<std::size_t>{2});
  CHECK(l1.elements[3] == std::set<std::size_t>{3});
  CHECK(l1.elements[4] == std::set<std::size_t>{1, 2, 3});
  CHECK(l1.mobius == std::vector<long>{1, -1, -1, -1, 2});
  CHECK(l1.support.size() == 5);

  Lattice l2 = build_lattice({F({{"Z1"}, {"Z2"}}), F({{"Z2"}, {"Z3"}}), F({{"Z3"}, {"Z4"}})});
  REQUIRE(l2.elements.size() == 7);
  CHECK(l2.elements[4] == std::set<std::size_t>{1, 2});
  CHECK(l2.elements[5] == std::set<std::size_t>{2, 3});
  CHECK(l2.elements[6] == std::set<std::size_t>{1, 2, 3});
  CHECK(l2.mobius == std::vector<long>{1, -1, -1, -1, 1, 1, 0});
  CHECK(l2.support == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

  // One implication collapses an element; its Moebius weight vanishes.
  Lattice l3 = build_lattice({F({{"Za"}}), F({{"Za"}, {"Zb"}})});
  REQUIRE(l3.elements.size() == 3);
  CHECK(l3.elements[2] == std::set<std::size_t>{1, 2});
  CHECK(l3.mobius == std::vector<long>{1, -1, 0});
  CHECK(l3.support == std::vector<std::size_t>{0, 1});

  Lattice single = build_lattice({F({{"Za"}})});
  CHECK(single.mobius == std::vector<long>{1, -1});

  CHECK(l1.contains({1, 2, 3}));
  CHECK_FALSE(l1.contains({1, 2}));
  CHECK_THROWS_AS(l1.index_of({1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(build_lattice({}), std::invalid_argument);
}

TEST_CASE("Moebius inversion recovers the probability of a disjunction") {
  std::mt19937 rng(25);
  std::vector<VarId> pool{"Z1", "Z2", "Z3", "Z4"};
  auto rnd_formula = [&]() {
    std::vector<std::vector<VarId>> cl;
    int n = 1 + (int)(rng() % 2);
    for (int i = 0; i < n; ++i) {
      std::set<VarId> s;
      int k = 1 + (int)(rng() % 3);
      for (int j = 0; j < k; ++j) s.insert(pool[rng() % pool.size()]);
      cl.emplace_back(s.begin(), s.end());
    }
    return CnfFormula::from_clauses(cl);
  };
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<CnfFormula> fs{rnd_formula(), rnd_formula(), rnd_formula()};
    ProbMap p;
    for (const auto& v : pool) p[v] = Rational((int)(rng() % 5), 7);
    // Brute force Pr(F1 or F2 or F3).
    Rational direct = 0;
    for (std::uint64_t m = 0; m < (1ULL << pool.size()); ++m) {
      std::map<VarId, bool> a;
      Rational w = 1;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        bool bit = (m >> i) & 1;
        a[pool[i]] = bit;
        w *= bit ? p[pool[i]] : 1 - p[pool[i]];
      }
      bool any = false;
      for (const auto& f : fs) any = any || substitute(f, a).is_true();
      if (any) direct += w;
    }
    Lattice lat = build_lattice(fs);
    Rational inv = 0;
    for (std::size_t i = 0; i < lat.elements.size(); ++i) {
      if (lat.elements[i].empty()) continue;  // skip the top
      if (lat.mobius[i] == 0) continue;
      inv += Rational(lat.mobius[i]) * weighted_count(lat.formulas[i], p);
    }
    CHECK(direct == -inv);
  }
}

TEST_CASE("grounded subqueries over lattice pairs") {
  Query q = parse_query(kQRunning);

  Query q11 = q_alpha_beta(q, {1}, {1});
  CHECK(q11 == minimize_query(parse_query(
                   "forall x forall y (S1(x,y)) & forall x forall y (S3(x,y))")));

  Query q12 = q_alpha_beta(q, {1}, {2});
  CHECK(q12 == minimize_query(parse_query(
                   "forall x forall y (S1(x,y)) & forall x forall y (S4(x,y))")));

  Query q1b = q_alpha_beta(q, {1}, {1, 2});
  CHECK(q1b == minimize_query(parse_query(
                   "forall x forall y (S1(x,y)) & forall x forall y (S3(x,y)) & "
                   "forall x forall y (S4(x,y))")));

  // Middle clauses come out in canonical formula order (lexicographic).
  Query q22 = q_alpha_beta(q, {2}, {2});
  CHECK(q22 == minimize_query(parse_query(
                   "forall x forall y (S1(x,y) | S3(x,y)) & forall x forall y (S2(x,y)) & "
                   "forall x forall y (S4(x,y))")));
  CHECK(equal_on(q22,
                 parse_query("forall x forall y (S2(x,y)) & forall x forall y (S1(x,y) | S3(x,y)) & "
                             "forall x forall y (S4(x,y))"),
                 2, 2));

  // Top in both coordinates gives back the query.
  CHECK(q_alpha_beta(q, {}, {}) == minimize_query(q));

  // Top on one side keeps the whole query plus the other side's formula.
  Query qtb = q_alpha_beta(q, {}, {1});
  CHECK(equal_on(qtb, minimize_query(parse_query(
                          "forall x (forall y (S1(x,y)) | forall y (S2(x,y))) & "
                          "forall x forall y (S3(x,y))")),
                 2, 2));

  CHECK_THROWS_AS(q_alpha_beta(q, {5}, {1}), std::invalid_argument);
}

TEST_CASE("lattice pairs of the forbidden example distinguish themselves on one point") {
  Query q = parse_query(kQForbidden);
  GhDecomposition gh = gh_decomposition(q);
  std::vector<CnfFormula> gg, hh;
  for (const auto& g : gh.g) gg.push_back(g.conjoin(gh.c));
  for (const auto& h : gh.h) hh.push_back(gh.c.conjoin(h));
  Lattice lg = build_lattice(gg);
  Lattice lh = build_lattice(hh);
  REQUIRE(lg.elements.size() == 4);   // {}, {1}, {2}, {1,2}
  CHECK(lg.support.size() == 4);
  CHECK(lg.mobius == std::vector<long>{1, -1, -1, 1});
  REQUIRE(lh.elements.size() == 4);

  // Ground every Q_alpha_beta on a 1x1 domain and compare truth tables.
  GroundCtx g1 = GroundCtx::make(q.symbols(), 1, 1);
  std::set<std::vector<bool>> tables;
  std::size_t count = 0;
  for (const auto& alpha : lg.elements) {
    for (const auto& beta : lh.elements) {
      Query qab = q_alpha_beta(q, alpha, beta);
      std::vector<bool> table;
      for (std::uint64_t m = 0; m < (1ULL << g1.nvars()); ++m)
        table.push_back(eval_query(qab, g1, m));
      tables.insert(table);
      ++count;
    }
  }
  CHECK(tables.size() == count);
}
