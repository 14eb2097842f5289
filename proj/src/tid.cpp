#include "gfomc/tid.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace gfomc {

namespace {

bool valid_constant(const std::string& c) {
  if (c.empty()) return false;
  for (char ch : c)
    if (ch == '(' || ch == ')' || ch == ',' || ch == '#' || std::isspace((unsigned char)ch))
      return false;
  return true;
}

bool valid_symbol_name(const std::string& s) {
  if (s.empty() || !std::isalpha((unsigned char)s[0])) return false;
  for (char ch : s)
    if (!std::isalnum((unsigned char)ch)) return false;
  return true;
}

struct AtomParts {
  std::string name;
  std::vector<std::string> args;
};

AtomParts split_atom(const std::string& atom) {
  auto lp = atom.find('(');
  if (lp == std::string::npos || atom.back() != ')')
    throw std::invalid_argument("malformed atom: " + atom);
  AtomParts out;
  out.name = atom.substr(0, lp);
  if (!valid_symbol_name(out.name)) throw std::invalid_argument("malformed atom: " + atom);
  std::string inner = atom.substr(lp + 1, atom.size() - lp - 2);
  std::string cur;
  for (char ch : inner) {
    if (ch == ',') {
      out.args.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.args.push_back(cur);
  for (const auto& a : out.args)
    if (!valid_constant(a)) throw std::invalid_argument("malformed atom: " + atom);
  return out;
}

void add_left(Tid& t, const std::string& c) {
  if (!t.has_left(c)) t.left_domain.push_back(c);
}

void add_right(Tid& t, const std::string& c) {
  if (!t.has_right(c)) t.right_domain.push_back(c);
}

void check_base_prob(const Rational& c) {
  if (!(c > 0 && c < 1))
    throw std::invalid_argument("block probability must be strictly between 0 and 1");
}

// One path block u = r0 - t1 - ... - tp = v appended into t.  suffix
// disambiguates internal constants when several blocks share endpoints.
void add_path_block(Tid& t, const std::string& u, const std::string& v, int p,
                    const Rational& c, const std::set<Symbol>& syms, bool with_R,
                    bool with_T, const std::string& suffix) {
  if (p < 1) throw std::invalid_argument("zig-zag blocks need length >= 1");
  if (u == v) throw std::invalid_argument("block endpoints must be distinct");
  check_base_prob(c);
  std::string tag = "@" + u + ";" + v + suffix;
  std::vector<std::string> r(p + 1), tt(p + 1);
  r[0] = u;
  r[p] = v;
  add_left(t, u);
  add_left(t, v);
  for (int k = 1; k <= p - 1; ++k) {
    r[k] = "r" + std::to_string(k) + tag;
    add_left(t, r[k]);
  }
  for (int k = 1; k <= p; ++k) {
    tt[k] = "t" + std::to_string(k) + tag;
    add_right(t, tt[k]);
  }
  if (with_R)
    for (int k = 0; k <= p; ++k) t.probs[atom_r(r[k])] = c;
  if (with_T)
    for (int k = 1; k <= p; ++k) t.probs[atom_t(tt[k])] = c;
  for (const auto& s : syms) {
    t.probs[atom_s(s, r[0], tt[1])] = c;
    t.probs[atom_s(s, r[p], tt[p])] = c;
    for (int k = 1; k <= p - 1; ++k) {
      t.probs[atom_s(s, r[k], tt[k])] = c;
      t.probs[atom_s(s, r[k], tt[k + 1])] = c;
    }
  }
}

}  // namespace

bool Tid::has_left(const std::string& c) const {
  return std::find(left_domain.begin(), left_domain.end(), c) != left_domain.end();
}

bool Tid::has_right(const std::string& c) const {
  return std::find(right_domain.begin(), right_domain.end(), c) != right_domain.end();
}

Rational Tid::prob(const std::string& atom) const {
  auto it = probs.find(atom);
  return it == probs.end() ? Rational(default_prob) : it->second;
}

std::string atom_r(const std::string& u) { return "R(" + u + ")"; }
std::string atom_t(const std::string& v) { return "T(" + v + ")"; }
std::string atom_s(const Symbol& s, const std::string& u, const std::string& v) {
  return s + "(" + u + "," + v + ")";
}

Tid build_zigzag_block(const BlockSpec& spec) {
  Tid out;
  add_path_block(out, spec.u, spec.v, spec.length, spec.c, spec.binary_symbols,
                 spec.with_R, spec.with_T, "");
  return out;
}

Tid build_parallel_block(const std::string& u, const std::string& v,
                         const std::vector<int>& params, const Rational& c,
                         const std::set<Symbol>& binary_symbols) {
  if (params.empty()) throw std::invalid_argument("parallel block needs at least one branch");
  Tid out;
  for (std::size_t j = 0; j < params.size(); ++j)
    add_path_block(out, u, v, params[j], c, binary_symbols, true, true,
                   ";" + std::to_string(j + 1));
  return out;
}

Tid build_graph_tid(const Graph& g, const std::set<Symbol>& binary_symbols,
                    std::pair<int, int> edge_params, int pendant_param,
                    const Rational& c) {
  if (g.nodes < 1) throw std::invalid_argument("graph needs at least one node");
  std::set<std::pair<int, int>> seen;
  for (auto [i, j] : g.edges) {
    if (i < 1 || i > g.nodes || j < 1 || j > g.nodes)
      throw std::invalid_argument("edge endpoint outside the node range");
    if (i == j) throw std::invalid_argument("self loops are not allowed");
    if (seen.count({i, j}) || seen.count({j, i}))
      throw std::invalid_argument("at most one of (i,j),(j,i) may be listed");
    seen.insert({i, j});
  }
  auto node = [](int i) { return "u" + std::to_string(i); };
  Tid out;
  for (int i = 1; i <= g.nodes; ++i) add_left(out, node(i));
  for (int i = 1; i <= g.nodes; ++i) add_left(out, node(i) + "'");
  for (auto [i, j] : g.edges) {
    add_path_block(out, node(i), node(j), edge_params.first, c, binary_symbols, true, true, ";1");
    add_path_block(out, node(i), node(j), edge_params.second, c, binary_symbols, true, true, ";2");
  }
  for (int i = 1; i <= g.nodes; ++i)
    add_path_block(out, node(i), node(i) + "'", pendant_param, c, binary_symbols, true, true, "");
  return out;
}

Tid build_type2_block(const BlockSpec& spec) {
  int p = spec.length;
  if (p < 0) throw std::invalid_argument("zig-zag portions need length >= 0");
  if (spec.u == spec.v) throw std::invalid_argument("block endpoints must be distinct");
  if (spec.dead_ends < 0) throw std::invalid_argument("dead-end count must be >= 0");
  if (spec.prefix_branches < 1 || spec.suffix_branches < 1)
    throw std::invalid_argument("prefix and suffix need at least one branch");
  if (spec.binary_symbols.empty())
    throw std::invalid_argument("type-2 blocks need binary symbols");
  check_base_prob(spec.c);

  Tid out;
  std::string tag = "@" + spec.u + ";" + spec.v;
  add_left(out, spec.u);
  add_right(out, spec.v);
  std::vector<std::string> r(p + 1), t(p + 1);
  for (int i = 0; i <= p; ++i) {
    r[i] = "r" + std::to_string(i) + tag;
    add_left(out, r[i]);
  }
  for (int i = 0; i <= p; ++i) {
    t[i] = "t" + std::to_string(i) + tag;
    add_right(out, t[i]);
  }
  std::vector<std::string> pref(spec.prefix_branches), suff(spec.suffix_branches);
  for (int i = 0; i < spec.prefix_branches; ++i) {
    pref[i] = "tp" + std::to_string(i + 1) + tag;
    add_right(out, pref[i]);
  }
  for (int i = 0; i < spec.suffix_branches; ++i) {
    suff[i] = "rs" + std::to_string(i + 1) + tag;
    add_left(out, suff[i]);
  }

  auto elem = [&](const std::string& a, const std::string& b) {
    for (const auto& s : spec.binary_symbols) out.probs[atom_s(s, a, b)] = spec.c;
  };
  for (const auto& tp : pref) {
    elem(spec.u, tp);
    elem(r[0], tp);
  }
  elem(r[0], t[0]);
  for (int i = 1; i <= p; ++i) {
    elem(r[i], t[i - 1]);
    elem(r[i], t[i]);
  }
  for (const auto& rs : suff) {
    elem(rs, t[p]);
    elem(rs, spec.v);
  }
  // Dead-end branches hang off every internal r- and t-node, never off the
  // endpoints u,v.
  std::vector<std::string> left_nodes = r;
  left_nodes.insert(left_nodes.end(), suff.begin(), suff.end());
  std::vector<std::string> right_nodes = t;
  right_nodes.insert(right_nodes.end(), pref.begin(), pref.end());
  for (const auto& a : left_nodes)
    for (int j = 1; j <= spec.dead_ends; ++j) {
      std::string e = "e" + std::to_string(j) + "@" + a;
      add_right(out, e);
      elem(a, e);
    }
  for (const auto& b : right_nodes)
    for (int j = 1; j <= spec.dead_ends; ++j) {
      std::string f = "f" + std::to_string(j) + "@" + b;
      add_left(out, f);
      elem(f, b);
    }
  return out;
}

Tid zg_database(const Tid& dprime, const Query& q) {
  if (q.is_constant())
    throw std::invalid_argument("zg database needs a non-constant query");
  for (std::size_t i = 0; i < q.clauses.size(); ++i)
    if (q.clauses[i].kind == ClauseKind::Invalid)
      throw std::invalid_argument("zg database needs a bipartite query");

  int n = (int)zigzag_layers(q);
  bool has_R = false, has_T = false;
  for (const auto& c : q.clauses) {
    has_R = has_R || c.has_R;
    has_T = has_T || c.has_T;
  }
  std::set<Symbol> bins = q.binary_symbols();

  std::set<Symbol> zg_binary;
  for (const auto& s : bins)
    for (int i = 1; i <= n; ++i) zg_binary.insert(s + "c" + std::to_string(i));
  if (has_R)
    for (int i = 2; i <= n - 1; ++i) zg_binary.insert("Rc" + std::to_string(i));
  if (has_T) zg_binary.insert("Tc12");

  for (const auto& [atom, prob] : dprime.probs) {
    (void)prob;
    AtomParts parts = split_atom(atom);
    bool ok = false;
    if (parts.args.size() == 1) {
      // The layer-1 and layer-n copies of R are the unary symbols here.
      if (parts.name == "R") ok = has_R && dprime.has_left(parts.args[0]);
      if (parts.name == "T") ok = has_R && dprime.has_right(parts.args[0]);
    } else if (parts.args.size() == 2) {
      ok = zg_binary.count(parts.name) && dprime.has_left(parts.args[0]) &&
           dprime.has_right(parts.args[1]);
    }
    if (!ok) throw std::invalid_argument("vocabulary mismatch: " + atom);
  }

  Tid out;
  out.default_prob = 1;
  for (const auto& u : dprime.left_domain) add_left(out, u);
  for (const auto& v : dprime.right_domain) add_left(out, v);
  auto fname = [](int i, const std::string& u, const std::string& v) {
    return "f" + std::to_string(i) + "@" + u + ";" + v;
  };
  auto ename = [](const std::string& u, const std::string& v) {
    return "e@" + u + ";" + v;
  };
  for (const auto& u : dprime.left_domain)
    for (const auto& v : dprime.right_domain) {
      for (int i = 2; i <= n - 1; ++i) add_left(out, fname(i, u, v));
      add_right(out, ename(u, v));
    }

  if (has_R) {
    for (const auto& u : dprime.left_domain) out.probs[atom_r(u)] = dprime.prob(atom_r(u));
    for (const auto& v : dprime.right_domain) out.probs[atom_r(v)] = dprime.prob(atom_t(v));
  }
  for (const auto& u : dprime.left_domain)
    for (const auto& v : dprime.right_domain) {
      std::string e = ename(u, v);
      for (const auto& s : bins) {
        out.probs[atom_s(s, u, e)] = dprime.prob(atom_s(s + "c1", u, v));
        for (int i = 2; i <= n - 1; ++i)
          out.probs[atom_s(s, fname(i, u, v), e)] =
              dprime.prob(atom_s(s + "c" + std::to_string(i), u, v));
        out.probs[atom_s(s, v, e)] = dprime.prob(atom_s(s + "c" + std::to_string(n), u, v));
      }
      if (has_R)
        for (int i = 2; i <= n - 1; ++i)
          out.probs[atom_r(fname(i, u, v))] =
              dprime.prob(atom_s("Rc" + std::to_string(i), u, v));
      if (has_T) out.probs[atom_t(e)] = dprime.prob(atom_s("Tc12", u, v));
    }
  return out;
}

Tid build_elementary_block(const std::string& u, const std::string& v,
                           const std::set<Symbol>& binary_symbols, const Rational& c) {
  if (binary_symbols.empty())
    throw std::invalid_argument("elementary blocks need binary symbols");
  check_base_prob(c);
  Tid out;
  add_left(out, u);
  add_right(out, v);
  for (const auto& s : binary_symbols) out.probs[atom_s(s, u, v)] = c;
  return out;
}

Tid tid_union(const Tid& a, const Tid& b) {
  if (a.default_prob != b.default_prob)
    throw std::invalid_argument("cannot merge databases with different defaults");
  Tid out = a;
  for (const auto& c : b.left_domain) {
    if (out.has_right(c)) throw std::invalid_argument("constant '" + c + "' switches sides");
    add_left(out, c);
  }
  for (const auto& c : b.right_domain) {
    if (out.has_left(c)) throw std::invalid_argument("constant '" + c + "' switches sides");
    add_right(out, c);
  }
  for (const auto& [atom, p] : b.probs) {
    auto it = out.probs.find(atom);
    if (it != out.probs.end() && it->second != p)
      throw std::invalid_argument("conflicting probabilities for " + atom);
    out.probs[atom] = p;
  }
  return out;
}

TidError::TidError(const std::string& msg, int line_)
    : std::runtime_error("tid line " + std::to_string(line_) + ": " + msg), line(line_) {}

Tid read_tid(const std::string& text) {
  Tid out;
  bool saw_default = false;
  std::set<std::string> lefts, rights;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    std::string w;
    while (ls >> w) tok.push_back(w);
    if (tok.empty()) continue;

    if (tok[0] == "domain") {
      if (tok.size() < 2 || (tok[1] != "left:" && tok[1] != "right:"))
        throw TidError("expected 'domain left:' or 'domain right:'", lineno);
      bool left = tok[1] == "left:";
      for (std::size_t i = 2; i < tok.size(); ++i) {
        const std::string& c = tok[i];
        if (!valid_constant(c)) throw TidError("bad constant '" + c + "'", lineno);
        if (lefts.count(c) || rights.count(c))
          throw TidError("constant '" + c + "' declared twice", lineno);
        (left ? lefts : rights).insert(c);
        (left ? out.left_domain : out.right_domain).push_back(c);
      }
    } else if (tok[0] == "default") {
      if (tok.size() != 2 || (tok[1] != "0" && tok[1] != "1"))
        throw TidError("default must be 0 or 1", lineno);
      if (saw_default) throw TidError("duplicate default declaration", lineno);
      out.default_prob = tok[1] == "1" ? 1 : 0;
      saw_default = true;
    } else if (tok[0] == "tuple") {
      if (tok.size() != 3) throw TidError("expected 'tuple ATOM PROB'", lineno);
      AtomParts parts;
      try {
        parts = split_atom(tok[1]);
      } catch (const std::invalid_argument& e) {
        throw TidError(e.what(), lineno);
      }
      if (parts.name == "R" || parts.name == "T") {
        if (parts.args.size() != 1) throw TidError("unary atom needs one argument", lineno);
        const auto& side = parts.name == "R" ? lefts : rights;
        if (!side.count(parts.args[0]))
          throw TidError("undeclared constant '" + parts.args[0] + "'", lineno);
      } else {
        if (parts.args.size() != 2) throw TidError("binary atom needs two arguments", lineno);
        if (!lefts.count(parts.args[0]))
          throw TidError("undeclared constant '" + parts.args[0] + "'", lineno);
        if (!rights.count(parts.args[1]))
          throw TidError("undeclared constant '" + parts.args[1] + "'", lineno);
      }
      Rational p;
      try {
        p = rat_parse(tok[2]);
      } catch (const std::invalid_argument& e) {
        throw TidError(e.what(), lineno);
      }
      if (p < 0 || p > 1) throw TidError("probability outside [0,1]", lineno);
      if (out.probs.count(tok[1])) throw TidError("duplicate tuple " + tok[1], lineno);
      out.probs[tok[1]] = p;
    } else {
      throw TidError("unrecognized declaration '" + tok[0] + "'", lineno);
    }
  }
  if (!saw_default) throw TidError("missing default declaration", 0);
  return out;
}

std::string write_tid(const Tid& t) {
  std::string out = "domain left:";
  for (const auto& c : t.left_domain) out += " " + c;
  out += "\ndomain right:";
  for (const auto& c : t.right_domain) out += " " + c;
  out += "\ndefault " + std::to_string(t.default_prob) + "\n";
  for (const auto& [atom, p] : t.probs) out += "tuple " + atom + " " + rat_str(p) + "\n";
  return out;
}

}  // namespace gfomc
