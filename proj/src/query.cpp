#include "gfomc/query.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>

namespace gfomc {

namespace {

std::string atom_str(const Symbol& s) {
  if (s == "R") return "R(x)";
  if (s == "T") return "T(y)";
  return s + "(x,y)";
}

bool subset(const std::set<Symbol>& a, const std::set<Symbol>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool subset_idx(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::set<Symbol> Clause::symbols() const {
  std::set<Symbol> out;
  if (has_R) out.insert("R");
  if (has_T) out.insert("T");
  for (const auto& sc : subclauses) out.insert(sc.begin(), sc.end());
  return out;
}

bool Clause::is_left() const {
  return kind == ClauseKind::LeftI || kind == ClauseKind::LeftII || kind == ClauseKind::UnaryLeft;
}

bool Clause::is_right() const {
  return kind == ClauseKind::RightI || kind == ClauseKind::RightII || kind == ClauseKind::UnaryRight;
}

bool Clause::is_proper_left() const {
  return kind == ClauseKind::LeftI || kind == ClauseKind::LeftII;
}

bool Clause::is_proper_right() const {
  return kind == ClauseKind::RightI || kind == ClauseKind::RightII;
}

std::string Clause::str() const {
  auto disj = [](const std::set<Symbol>& bins, bool r, bool t) {
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const std::string& a) {
      if (!first) os << " | ";
      os << a;
      first = false;
    };
    if (r) emit("R(x)");
    for (const auto& s : bins)
      if (s != "R" && s != "T") emit(atom_str(s));
    if (t || bins.count("T")) emit("T(y)");
    if (bins.count("R") && !r) emit("R(x)");
    return os.str();
  };
  std::ostringstream os;
  if (head == 'b') {
    os << "forall x forall y (" << disj(subclauses.empty() ? std::set<Symbol>{} : subclauses[0], has_R, has_T) << ")";
  } else {
    const char* outer = head == 'x' ? "forall x" : "forall y";
    const char* inner = head == 'x' ? "forall y" : "forall x";
    os << outer << " (";
    for (std::size_t i = 0; i < subclauses.size(); ++i) {
      if (i) os << " | ";
      // A factored unary atom rides inside the first subclause.
      bool r = has_R && i == 0 && head == 'x';
      bool t = has_T && i == 0 && head == 'y';
      os << inner << " (" << disj(subclauses[i], r, t) << ")";
    }
    os << ")";
  }
  return os.str();
}

bool Clause::operator==(const Clause& o) const {
  return kind == o.kind && head == o.head && has_R == o.has_R && has_T == o.has_T &&
         subclauses == o.subclauses;
}

std::set<Symbol> Query::symbols() const {
  std::set<Symbol> out;
  for (const auto& c : clauses) {
    auto s = c.symbols();
    out.insert(s.begin(), s.end());
  }
  return out;
}

std::set<Symbol> Query::binary_symbols() const {
  auto s = symbols();
  s.erase("R");
  s.erase("T");
  return s;
}

std::string Query::str() const {
  if (constant_true) return "true";
  if (constant_false) return "false";
  std::ostringstream os;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) os << " & ";
    os << clauses[i].str();
  }
  return os.str();
}

bool Query::operator==(const Query& o) const {
  return constant_true == o.constant_true && constant_false == o.constant_false &&
         clauses == o.clauses;
}

ParseError::ParseError(const std::string& msg, int line_, int col_)
    : std::runtime_error("line " + std::to_string(line_) + " col " + std::to_string(col_) + ": " + msg),
      line(line_),
      col(col_) {}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Tok {
  enum Type { Ident, LParen, RParen, Pipe, Amp, Comma, End } type;
  std::string text;
  int line, col;
};

std::vector<Tok> lex(const std::string& text) {
  std::vector<Tok> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace((unsigned char)c)) {
      ++col;
      ++i;
      continue;
    }
    int tl = line, tc = col;
    if (std::isalpha((unsigned char)c)) {
      std::string id;
      while (i < text.size() && std::isalnum((unsigned char)text[i])) {
        id += text[i];
        ++i;
        ++col;
      }
      out.push_back({Tok::Ident, id, tl, tc});
      continue;
    }
    Tok::Type t;
    switch (c) {
      case '(': t = Tok::LParen; break;
      case ')': t = Tok::RParen; break;
      case '|': t = Tok::Pipe; break;
      case '&': t = Tok::Amp; break;
      case ',': t = Tok::Comma; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back({t, std::string(1, c), tl, tc});
    ++i;
    ++col;
  }
  int el = line, ec = col;
  out.push_back({Tok::End, "", el, ec});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  Query run() {
    Query q;
    q.clauses.push_back(parse_clause());
    while (peek().type == Tok::Amp) {
      next();
      q.clauses.push_back(parse_clause());
    }
    if (peek().type != Tok::End) fail("expected '&' or end of input");
    for (auto& c : q.clauses) c = normalize_clause(std::move(c));
    return q;
  }

 private:
  const Tok& peek() const { return toks_[pos_]; }
  const Tok& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }

  void expect_ident(const std::string& word) {
    if (peek().type != Tok::Ident || peek().text != word) fail("expected '" + word + "'");
    next();
  }

  void expect(Tok::Type t, const std::string& what) {
    if (peek().type != t) fail("expected '" + what + "'");
    next();
  }

  // One disjunction of atoms. Unary atoms are recorded under their symbol
  // names "R"/"T" inside the set; the caller sorts out placement.
  std::set<Symbol> parse_disj() {
    std::set<Symbol> atoms;
    parse_atom(atoms);
    while (peek().type == Tok::Pipe) {
      next();
      parse_atom(atoms);
    }
    return atoms;
  }

  void parse_atom(std::set<Symbol>& atoms) {
    if (peek().type != Tok::Ident || peek().text == "forall")
      fail("expected atom");
    std::string sym = next().text;
    expect(Tok::LParen, "(");
    if (sym == "R") {
      expect_ident("x");
    } else if (sym == "T") {
      expect_ident("y");
    } else {
      expect_ident("x");
      expect(Tok::Comma, ",");
      expect_ident("y");
    }
    expect(Tok::RParen, ")");
    atoms.insert(sym);
  }

  Clause parse_clause() {
    expect_ident("forall");
    if (peek().type != Tok::Ident || (peek().text != "x" && peek().text != "y"))
      fail("expected 'x' or 'y'");
    std::string var = next().text;
    Clause c;
    if (var == "x" && peek().type == Tok::Ident && peek().text == "forall") {
      next();
      expect_ident("y");
      expect(Tok::LParen, "(");
      c.head = 'b';
      c.subclauses.push_back(parse_disj());
      expect(Tok::RParen, ")");
      return c;
    }
    c.head = var == "x" ? 'x' : 'y';
    const std::string inner = var == "x" ? "y" : "x";
    expect(Tok::LParen, "(");
    c.subclauses.push_back(parse_sub(inner));
    while (peek().type == Tok::Pipe) {
      next();
      c.subclauses.push_back(parse_sub(inner));
    }
    expect(Tok::RParen, ")");
    return c;
  }

  std::set<Symbol> parse_sub(const std::string& inner_var) {
    expect_ident("forall");
    expect_ident(inner_var);
    expect(Tok::LParen, "(");
    auto atoms = parse_disj();
    expect(Tok::RParen, ")");
    return atoms;
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

void sort_subclauses(std::vector<std::set<Symbol>>& subs) {
  std::sort(subs.begin(), subs.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
}

}  // namespace

Query parse_query(const std::string& text) { return Parser(text).run(); }

Clause normalize_clause(Clause c) {
  if (c.head == 'b') {
    if (c.subclauses.empty()) c.subclauses.push_back({});
    auto& j = c.subclauses[0];
    if (j.count("R")) {
      j.erase("R");
      c.has_R = true;
    }
    if (j.count("T")) {
      j.erase("T");
      c.has_T = true;
    }
    if (c.has_R && c.has_T) {
      c.kind = ClauseKind::Invalid;
    } else if (c.has_R) {
      c.kind = j.empty() ? ClauseKind::UnaryLeft : ClauseKind::LeftI;
    } else if (c.has_T) {
      c.kind = j.empty() ? ClauseKind::UnaryRight : ClauseKind::RightI;
    } else {
      c.kind = j.empty() ? ClauseKind::Invalid : ClauseKind::Middle;
    }
    return c;
  }

  // forall-x (or forall-y) head: a unary atom over the head variable does
  // not depend on the inner variable, so it factors out of its subclause.
  const char* own = c.head == 'x' ? "R" : "T";
  bool* own_flag = c.head == 'x' ? &c.has_R : &c.has_T;
  for (auto& sc : c.subclauses)
    if (sc.count(own)) {
      sc.erase(own);
      *own_flag = true;
    }
  // Empty subclauses are false disjuncts (an emptied forall drops out).
  c.subclauses.erase(
      std::remove_if(c.subclauses.begin(), c.subclauses.end(),
                     [](const std::set<Symbol>& s) { return s.empty(); }),
      c.subclauses.end());
  // Inside a disjunction the stronger member is redundant: drop any
  // subclause that is a subset of another one.
  sort_subclauses(c.subclauses);
  std::vector<std::set<Symbol>> kept;
  for (std::size_t i = 0; i < c.subclauses.size(); ++i) {
    bool dominated = false;
    for (std::size_t k = 0; k < c.subclauses.size() && !dominated; ++k)
      if (k != i && subset(c.subclauses[i], c.subclauses[k]))
        dominated = c.subclauses[i] != c.subclauses[k] || k < i;
    if (!dominated) kept.push_back(c.subclauses[i]);
  }
  c.subclauses = std::move(kept);

  if (c.subclauses.empty()) {
    // Only the factored unary atom is left (or nothing, which the rewrite
    // machinery intercepts as a false clause before reaching here).
    c.head = 'b';
    c.subclauses.push_back({});
    if (c.has_R && !c.has_T)
      c.kind = ClauseKind::UnaryLeft;
    else if (c.has_T && !c.has_R)
      c.kind = ClauseKind::UnaryRight;
    else
      c.kind = ClauseKind::Invalid;
    return c;
  }
  if (c.subclauses.size() == 1) {
    c.head = 'b';
    return normalize_clause(std::move(c));
  }
  bool misplaced = false;
  const char* other = c.head == 'x' ? "T" : "R";
  for (const auto& sc : c.subclauses)
    if (sc.count(other)) misplaced = true;
  if (misplaced || *own_flag) {
    c.kind = ClauseKind::Invalid;
  } else {
    c.kind = c.head == 'x' ? ClauseKind::LeftII : ClauseKind::RightII;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Implication between universally closed clauses

namespace {

struct ClauseForm {
  bool unary = false;                        // the R (x-form) or T (y-form) disjunct
  std::vector<std::set<Symbol>> subs;        // binary subclause sets
};

std::optional<ClauseForm> xform(const Clause& c) {
  if (c.head == 'b') {
    if (c.has_T) return std::nullopt;
    return ClauseForm{c.has_R, c.subclauses};
  }
  if (c.head == 'x') return ClauseForm{c.has_R, c.subclauses};
  return std::nullopt;
}

std::optional<ClauseForm> yform(const Clause& c) {
  if (c.head == 'b') {
    if (c.has_R) return std::nullopt;
    return ClauseForm{c.has_T, c.subclauses};
  }
  if (c.head == 'y') return ClauseForm{c.has_T, c.subclauses};
  return std::nullopt;
}

// Same-side rule: every disjunct of c must imply a disjunct of d.
bool same_side_implies(const ClauseForm& c, const ClauseForm& d) {
  if (c.unary && !d.unary) return false;
  for (const auto& j : c.subs) {
    bool ok = false;
    for (const auto& k : d.subs)
      if (subset(j, k)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

// Cross-side rule: a forall-x disjunction implies a forall-y disjunction
// exactly when all its atoms fit inside a single subclause of the target
// (then every satisfying grid makes that column-subclause full).
bool cross_side_implies(const ClauseForm& c, const ClauseForm& d) {
  if (c.unary || c.subs.empty()) return false;
  std::set<Symbol> all;
  for (const auto& j : c.subs) all.insert(j.begin(), j.end());
  for (const auto& k : d.subs)
    if (subset(all, k)) return true;
  return false;
}

}  // namespace

bool clause_implies(const Clause& c, const Clause& d) {
  if (c.kind == ClauseKind::Invalid || d.kind == ClauseKind::Invalid) return false;
  auto cx = xform(c), dx = xform(d);
  auto cy = yform(c), dy = yform(d);
  if (cx && dx && same_side_implies(*cx, *dx)) return true;
  if (cy && dy && same_side_implies(*cy, *dy)) return true;
  if (cx && dy && cross_side_implies(*cx, *dy)) return true;
  if (cy && dx && cross_side_implies(*cy, *dx)) return true;
  return false;
}

Query minimize_query(const Query& q) {
  if (q.is_constant()) return q;
  Query out;
  std::vector<Clause> cs;
  cs.reserve(q.clauses.size());
  for (const auto& c : q.clauses) cs.push_back(normalize_clause(c));
  std::vector<bool> drop(cs.size(), false);
  for (std::size_t j = 0; j < cs.size(); ++j) {
    for (std::size_t i = 0; i < cs.size() && !drop[j]; ++i) {
      if (i == j) continue;
      if (!clause_implies(cs[i], cs[j])) continue;
      // On mutual implication keep the earlier clause.
      if (clause_implies(cs[j], cs[i]) && j < i) continue;
      drop[j] = true;
    }
  }
  for (std::size_t j = 0; j < cs.size(); ++j)
    if (!drop[j]) out.clauses.push_back(cs[j]);
  if (out.clauses.empty()) out.constant_true = true;
  return out;
}

Query rewrite_symbol(const Query& q, const Symbol& s, int value) {
  if (value != 0 && value != 1) throw std::invalid_argument("rewrite value must be 0 or 1");
  if (!q.symbols().count(s)) throw std::invalid_argument("unknown symbol " + s);
  Query out;
  for (const Clause& c : q.clauses) {
    Clause nc = c;
    bool clause_true = false;
    if ((s == "R" && nc.has_R) || (s == "T" && nc.has_T)) {
      if (value == 1) clause_true = true;
      if (s == "R") nc.has_R = false;
      if (s == "T") nc.has_T = false;
    }
    if (!clause_true) {
      std::vector<std::set<Symbol>> subs;
      for (auto sc : nc.subclauses) {
        if (sc.count(s)) {
          if (value == 1) {
            // One disjunct of the clause became true (for a forall-subclause,
            // true at every inner point), so the whole clause is true.
            clause_true = true;
            break;
          }
          sc.erase(s);
        }
        subs.push_back(std::move(sc));
      }
      if (!clause_true) {
        if (nc.head == 'b') {
          // A flat clause with nothing left is false, and so is the query.
          if (!nc.has_R && !nc.has_T && (subs.empty() || subs[0].empty())) {
            Query f;
            f.constant_false = true;
            return f;
          }
        } else {
          // forall-subclauses that emptied out are false disjuncts.
          subs.erase(std::remove_if(subs.begin(), subs.end(),
                                    [](const std::set<Symbol>& x) { return x.empty(); }),
                     subs.end());
          if (subs.empty() && !nc.has_R && !nc.has_T) {
            Query f;
            f.constant_false = true;
            return f;
          }
        }
        nc.subclauses = std::move(subs);
        out.clauses.push_back(normalize_clause(std::move(nc)));
      }
    }
  }
  if (out.clauses.empty()) out.constant_true = true;
  return minimize_query(out);
}

// ---------------------------------------------------------------------------
// Classification

namespace {

struct PathInfo {
  bool unsafe = false;
  std::size_t length = 0;
  std::vector<std::size_t> witness;
};

std::vector<std::set<std::size_t>> adjacency(const Query& q) {
  std::size_t n = q.clauses.size();
  std::vector<std::set<Symbol>> syms(n);
  for (std::size_t i = 0; i < n; ++i) syms[i] = q.clauses[i].symbols();
  std::vector<std::set<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      bool share = false;
      for (const auto& s : syms[i])
        if (syms[j].count(s)) {
          share = true;
          break;
        }
      if (share) {
        adj[i].insert(j);
        adj[j].insert(i);
      }
    }
  return adj;
}

// Shortest left-to-right path; the witness is the lexicographically least
// index sequence among the shortest ones.
PathInfo find_path(const Query& q) {
  PathInfo info;
  std::size_t n = q.clauses.size();
  auto adj = adjacency(q);
  std::vector<std::size_t> dist_right(n, SIZE_MAX);
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i)
    if (q.clauses[i].is_proper_right()) {
      dist_right[i] = 0;
      frontier.push_back(i);
    }
  for (std::size_t h = 0; h < frontier.size(); ++h) {
    std::size_t u = frontier[h];
    for (std::size_t v : adj[u])
      if (dist_right[v] == SIZE_MAX) {
        dist_right[v] = dist_right[u] + 1;
        frontier.push_back(v);
      }
  }
  std::size_t best = SIZE_MAX;
  for (std::size_t i = 0; i < n; ++i)
    if (q.clauses[i].is_proper_left() && dist_right[i] < best) best = dist_right[i];
  if (best == SIZE_MAX) return info;
  info.unsafe = true;
  info.length = best;
  // Depth-first in ascending index order, pruned by distance-to-right.
  std::vector<std::size_t> path;
  std::function<bool(std::size_t, std::size_t)> dfs = [&](std::size_t u, std::size_t left) {
    path.push_back(u);
    if (left == 0) {
      if (q.clauses[u].is_proper_right()) return true;
      path.pop_back();
      return false;
    }
    for (std::size_t v : adj[u])
      if (dist_right[v] != SIZE_MAX && dist_right[v] <= left - 1 && dfs(v, left - 1)) return true;
    path.pop_back();
    return false;
  };
  for (std::size_t i = 0; i < n; ++i)
    if (q.clauses[i].is_proper_left() && dist_right[i] == best && dfs(i, best)) break;
  info.witness = path;
  return info;
}

// All minimal-length left-to-right paths, in lexicographic order.
std::vector<std::vector<std::size_t>> all_min_paths(const Query& q, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::size_t n = q.clauses.size();
  auto adj = adjacency(q);
  std::vector<std::size_t> path;
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t u, std::size_t left) {
    path.push_back(u);
    if (left == 0) {
      if (q.clauses[u].is_proper_right()) out.push_back(path);
    } else {
      for (std::size_t v : adj[u]) {
        bool seen = std::find(path.begin(), path.end(), v) != path.end();
        if (!seen) dfs(v, left - 1);
      }
    }
    path.pop_back();
  };
  for (std::size_t i = 0; i < n; ++i)
    if (q.clauses[i].is_proper_left()) dfs(i, k);
  return out;
}

std::set<Symbol> ubiquitous_side(const Query& q, bool left) {
  std::set<Symbol> u;
  bool first = true;
  for (const auto& c : q.clauses) {
    if (left ? !c.is_proper_left() : !c.is_proper_right()) continue;
    std::set<Symbol> inter;
    bool sub_first = true;
    for (const auto& sc : c.subclauses) {
      if (sub_first) {
        inter = sc;
        sub_first = false;
      } else {
        std::set<Symbol> tmp;
        std::set_intersection(inter.begin(), inter.end(), sc.begin(), sc.end(),
                              std::inserter(tmp, tmp.begin()));
        inter = std::move(tmp);
      }
    }
    if (first) {
      u = inter;
      first = false;
    } else {
      std::set<Symbol> tmp;
      std::set_intersection(u.begin(), u.end(), inter.begin(), inter.end(),
                            std::inserter(tmp, tmp.begin()));
      u = std::move(tmp);
    }
  }
  if (first) return {};
  return u;
}

bool pure_type2(const Query& q) {
  bool left = false, right = false;
  for (const auto& c : q.clauses) {
    switch (c.kind) {
      case ClauseKind::LeftII: left = true; break;
      case ClauseKind::RightII: right = true; break;
      case ClauseKind::Middle: break;
      default: return false;
    }
  }
  return left && right;
}

struct ForbiddenCore {
  bool forbidden = false;
  std::vector<std::string> violations;
};

ForbiddenCore forbidden_core(const Query& q, std::size_t k, const std::set<Symbol>& ul,
                             const std::set<Symbol>& ur) {
  ForbiddenCore out;
  std::set<Symbol> ubi;
  ubi.insert(ul.begin(), ul.end());
  ubi.insert(ur.begin(), ur.end());
  auto check_end = [&](const std::vector<std::size_t>& path, std::size_t endpos,
                       std::size_t neighborpos) {
    const Clause& end = q.clauses[path[endpos]];
    const std::set<Symbol> nb = q.clauses[path[neighborpos]].symbols();
    for (const auto& s : end.symbols()) {
      if (ubi.count(s) || nb.count(s)) continue;
      std::ostringstream os;
      os << "path";
      for (auto i : path) os << " " << i;
      os << ": symbol " << s << " of clause " << path[endpos]
         << " is neither ubiquitous nor in clause " << path[neighborpos];
      out.violations.push_back(os.str());
    }
  };
  for (const auto& path : all_min_paths(q, k)) {
    if (path.size() < 2) continue;
    check_end(path, 0, 1);
    check_end(path, path.size() - 1, path.size() - 2);
  }
  out.forbidden = out.violations.empty();
  return out;
}

}  // namespace

ClassReport classify(const Query& q) {
  ClassReport rep;
  if (q.is_constant()) {
    rep.bipartite = true;
    rep.diagnostics = q.constant_true ? "constant true" : "constant false";
    return rep;
  }
  for (std::size_t i = 0; i < q.clauses.size(); ++i)
    if (q.clauses[i].kind == ClauseKind::Invalid) {
      rep.bipartite = false;
      rep.diagnostics = "clause " + std::to_string(i) + " fits no clause shape";
      return rep;
    }
  rep.bipartite = true;
  bool l1 = false, l2 = false, r1 = false, r2 = false;
  for (const auto& c : q.clauses) {
    l1 |= c.kind == ClauseKind::LeftI;
    l2 |= c.kind == ClauseKind::LeftII;
    r1 |= c.kind == ClauseKind::RightI;
    r2 |= c.kind == ClauseKind::RightII;
  }
  rep.left_type = l2 ? '2' : (l1 ? 'I' : '-');
  rep.right_type = r2 ? '2' : (r1 ? 'I' : '-');

  PathInfo info = find_path(q);
  rep.unsafe = info.unsafe;
  rep.safe = !info.unsafe;
  if (info.unsafe) {
    rep.length = info.length;
    rep.witness_path = info.witness;
  }
  rep.ubiquitous_left = ubiquitous_side(q, true);
  rep.ubiquitous_right = ubiquitous_side(q, false);

  if (rep.unsafe) {
    bool final_q = true;
    for (const auto& s : q.symbols()) {
      for (int v = 0; v < 2 && final_q; ++v) {
        Query sub = rewrite_symbol(q, s, v);
        if (!sub.is_constant() && find_path(sub).unsafe) final_q = false;
      }
      if (!final_q) break;
    }
    rep.final_query = final_q;
  }

  if (rep.final_query && pure_type2(q)) {
    auto core = forbidden_core(q, *rep.length, rep.ubiquitous_left, rep.ubiquitous_right);
    rep.forbidden = core.forbidden;
  }

  std::ostringstream diag;
  if (rep.unsafe) {
    diag << "minimal left-right path:";
    for (auto i : *rep.witness_path) diag << " " << i;
  } else {
    diag << "no left-right path";
  }
  rep.diagnostics = diag.str();
  return rep;
}

ForbiddenReport forbidden_report(const Query& q) {
  ForbiddenReport rep;
  ClassReport cr = classify(q);
  rep.ubiquitous_left = cr.ubiquitous_left;
  rep.ubiquitous_right = cr.ubiquitous_right;
  if (!cr.bipartite || !cr.final_query || !pure_type2(q)) {
    rep.applicable = false;
    rep.violations.push_back("query is not a final query of type II-II");
    return rep;
  }
  rep.applicable = true;
  auto core = forbidden_core(q, *cr.length, cr.ubiquitous_left, cr.ubiquitous_right);
  rep.forbidden = core.forbidden;
  rep.violations = core.violations;
  return rep;
}

// ---------------------------------------------------------------------------
// Zig-zag transformation

namespace {

Symbol copy_name(const Symbol& s, std::size_t i) { return s + "c" + std::to_string(i); }

std::set<Symbol> copy_set(const std::set<Symbol>& j, std::size_t i) {
  std::set<Symbol> out;
  for (const auto& s : j) out.insert(copy_name(s, i));
  return out;
}

Clause flat_clause(std::set<Symbol> atoms) {
  Clause c;
  c.head = 'b';
  c.subclauses.push_back(std::move(atoms));
  return normalize_clause(std::move(c));
}

}  // namespace

std::size_t zigzag_layers(const Query& q) {
  std::size_t n = 2;
  bool right2 = false;
  for (const auto& c : q.clauses)
    if (c.kind == ClauseKind::RightII) {
      right2 = true;
      n = std::max<std::size_t>(n, c.subclauses.size());
    }
  if (right2) n = std::max<std::size_t>(n, 3);
  return n;
}

Query zigzag_query(const Query& q) {
  ClassReport rep = classify(q);
  if (!rep.bipartite) throw std::invalid_argument("zigzag needs a bipartite query");
  if (!rep.unsafe) throw std::invalid_argument("zigzag rejects safe queries");

  std::size_t n = zigzag_layers(q);

  auto rname = [&](std::size_t i) -> Symbol {
    if (i == 1) return "R";
    if (i == n) return "T";
    return "Rc" + std::to_string(i);
  };

  Query out;
  auto emit = [&](Clause c) { out.clauses.push_back(std::move(c)); };

  for (const Clause& c : q.clauses) {
    switch (c.kind) {
      case ClauseKind::LeftI:
      case ClauseKind::UnaryLeft: {
        const std::set<Symbol> j = c.subclauses.empty() ? std::set<Symbol>{} : c.subclauses[0];
        for (std::size_t i = 1; i <= n; ++i) {
          auto atoms = copy_set(j, i);
          atoms.insert(rname(i));
          emit(flat_clause(std::move(atoms)));
        }
        break;
      }
      case ClauseKind::LeftII: {
        Clause first;
        first.head = 'x';
        for (const auto& sc : c.subclauses) first.subclauses.push_back(copy_set(sc, 1));
        emit(normalize_clause(std::move(first)));
        for (std::size_t i = 2; i <= n - 1; ++i) {
          std::set<Symbol> mid;
          for (const auto& sc : c.subclauses) {
            auto cp = copy_set(sc, i);
            mid.insert(cp.begin(), cp.end());
          }
          emit(flat_clause(std::move(mid)));
        }
        Clause last;
        last.head = 'y';
        for (const auto& sc : c.subclauses) last.subclauses.push_back(copy_set(sc, n));
        emit(normalize_clause(std::move(last)));
        break;
      }
      case ClauseKind::Middle: {
        for (std::size_t i = 1; i <= n; ++i) emit(flat_clause(copy_set(c.subclauses[0], i)));
        break;
      }
      case ClauseKind::RightI:
      case ClauseKind::UnaryRight: {
        const std::set<Symbol> j = c.subclauses.empty() ? std::set<Symbol>{} : c.subclauses[0];
        for (std::size_t i = 1; i <= n; ++i) {
          auto atoms = copy_set(j, i);
          atoms.insert("Tc12");
          emit(flat_clause(std::move(atoms)));
        }
        break;
      }
      case ClauseKind::RightII: {
        std::size_t ell = c.subclauses.size();
        std::vector<std::size_t> phi(ell, 1);
        for (;;) {
          std::set<Symbol> mid;
          for (std::size_t t = 0; t < ell; ++t) {
            auto cp = copy_set(c.subclauses[t], phi[t]);
            mid.insert(cp.begin(), cp.end());
          }
          emit(flat_clause(std::move(mid)));
          std::size_t t = ell;
          while (t > 0 && phi[t - 1] == n) phi[--t] = 1;
          if (t == 0) break;
          ++phi[t - 1];
        }
        break;
      }
      case ClauseKind::Invalid:
        throw std::invalid_argument("zigzag needs a bipartite query");
    }
  }
  return minimize_query(out);
}

// ---------------------------------------------------------------------------
// G/H decomposition, lattices, Q_alpha_beta

GhDecomposition gh_decomposition(const Query& q) {
  GhDecomposition out;
  std::vector<const Clause*> left, right;
  std::vector<std::vector<VarId>> mids;
  for (const auto& c : q.clauses) {
    if (c.kind == ClauseKind::LeftII) left.push_back(&c);
    else if (c.kind == ClauseKind::RightII) right.push_back(&c);
    else if (c.kind == ClauseKind::Middle)
      mids.emplace_back(c.subclauses[0].begin(), c.subclauses[0].end());
    else
      throw std::invalid_argument("decomposition needs a query of type II-II");
  }
  if (left.empty() || right.empty())
    throw std::invalid_argument("decomposition needs a query of type II-II");
  out.c = mids.empty() ? CnfFormula::constant(true) : CnfFormula::from_clauses(mids);

  auto products = [](const std::vector<const Clause*>& side) {
    std::vector<CnfFormula> result;
    std::set<std::string> seen;
    if (side.empty()) return result;
    std::vector<std::size_t> pick(side.size(), 0);
    for (;;) {
      std::vector<std::vector<VarId>> clauses;
      for (std::size_t i = 0; i < side.size(); ++i) {
        const auto& sc = side[i]->subclauses[pick[i]];
        clauses.emplace_back(sc.begin(), sc.end());
      }
      CnfFormula f = subsume_reduce(CnfFormula::from_clauses(clauses));
      if (seen.insert(f.key()).second) result.push_back(f);
      std::size_t t = side.size();
      while (t > 0 && pick[t - 1] + 1 == side[t - 1]->subclauses.size()) pick[--t] = 0;
      if (t == 0) break;
      ++pick[t - 1];
    }
    return result;
  };
  out.g = products(left);
  out.h = products(right);
  return out;
}

namespace {

// Exact implication by model enumeration; inputs are small propositional CNFs.
bool cnf_implies(const CnfFormula& f, const CnfFormula& g) {
  std::set<VarId> vars = f.vars();
  auto gv = g.vars();
  vars.insert(gv.begin(), gv.end());
  std::vector<VarId> vs(vars.begin(), vars.end());
  if (vs.size() > 24) throw std::invalid_argument("implication check: too many variables");
  for (std::size_t mask = 0; mask < (1ULL << vs.size()); ++mask) {
    std::map<VarId, bool> a;
    for (std::size_t i = 0; i < vs.size(); ++i) a[vs[i]] = (mask >> i) & 1;
    if (substitute(f, a).is_true() && !substitute(g, a).is_true()) return false;
  }
  return true;
}

}  // namespace

Lattice build_lattice(const std::vector<CnfFormula>& formulas) {
  if (formulas.empty()) throw std::invalid_argument("lattice needs at least one formula");
  std::size_t m = formulas.size();
  if (m > 16) throw std::invalid_argument("lattice: too many formulas");

  auto conj = [&](std::size_t mask) {
    CnfFormula f = CnfFormula::constant(true);
    for (std::size_t i = 0; i < m; ++i)
      if ((mask >> i) & 1) f = f.conjoin(formulas[i]);
    return f;
  };
  Lattice lat;
  std::vector<std::pair<std::set<std::size_t>, CnfFormula>> closed;
  for (std::size_t mask = 0; mask < (1ULL << m); ++mask) {
    CnfFormula fa = conj(mask);
    std::size_t closure = 0;
    for (std::size_t i = 0; i < m; ++i)
      closure |= (std::size_t)cnf_implies(fa, formulas[i]) << i;
    if (closure != mask) continue;
    std::set<std::size_t> elem;
    for (std::size_t i = 0; i < m; ++i)
      if ((mask >> i) & 1) elem.insert(i + 1);
    closed.emplace_back(std::move(elem), std::move(fa));
  }
  std::sort(closed.begin(), closed.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });
  for (auto& [e, f] : closed) {
    lat.elements.push_back(e);
    lat.formulas.push_back(f);
  }
  lat.mobius.assign(lat.elements.size(), 0);
  for (std::size_t i = 0; i < lat.elements.size(); ++i) {
    if (lat.elements[i].empty()) {
      lat.mobius[i] = 1;
      continue;
    }
    long sum = 0;
    for (std::size_t k = 0; k < lat.elements.size(); ++k)
      if (k != i && subset_idx(lat.elements[k], lat.elements[i])) sum += lat.mobius[k];
    lat.mobius[i] = -sum;
  }
  for (std::size_t i = 0; i < lat.elements.size(); ++i)
    if (lat.mobius[i] != 0) lat.support.push_back(i);
  return lat;
}

std::size_t Lattice::index_of(const std::set<std::size_t>& alpha) const {
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (elements[i] == alpha) return i;
  throw std::invalid_argument("index outside lattice");
}

bool Lattice::contains(const std::set<std::size_t>& alpha) const {
  for (const auto& e : elements)
    if (e == alpha) return true;
  return false;
}

namespace {

std::vector<Clause> middles_of(const CnfFormula& f) {
  std::vector<Clause> out;
  CnfFormula reduced = subsume_reduce(f);
  for (const auto& cl : reduced.clauses()) {
    Clause c;
    c.head = 'b';
    c.subclauses.emplace_back(cl.begin(), cl.end());
    out.push_back(normalize_clause(std::move(c)));
  }
  return out;
}

}  // namespace

Query q_alpha_beta(const Query& q, const std::set<std::size_t>& alpha,
                   const std::set<std::size_t>& beta) {
  GhDecomposition gh = gh_decomposition(q);
  std::vector<CnfFormula> gg, hh;
  for (const auto& g : gh.g) gg.push_back(g.conjoin(gh.c));
  for (const auto& h : gh.h) hh.push_back(gh.c.conjoin(h));
  Lattice lg = build_lattice(gg);
  Lattice lh = build_lattice(hh);
  std::size_t ia = lg.index_of(alpha);
  std::size_t ib = lh.index_of(beta);

  if (alpha.empty() && beta.empty()) return minimize_query(q);
  Query out;
  if (alpha.empty()) {
    out.clauses = q.clauses;
    for (auto& c : middles_of(lh.formulas[ib])) out.clauses.push_back(c);
  } else if (beta.empty()) {
    out.clauses = q.clauses;
    for (auto& c : middles_of(lg.formulas[ia])) out.clauses.push_back(c);
  } else {
    CnfFormula f = lg.formulas[ia].conjoin(lh.formulas[ib]);
    for (auto& c : middles_of(f)) out.clauses.push_back(c);
  }
  return minimize_query(out);
}

}  // namespace gfomc
