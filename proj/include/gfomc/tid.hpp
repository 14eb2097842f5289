#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfomc/query.hpp"
#include "gfomc/rational.hpp"

namespace gfomc {

// Bipartite tuple-independent database: an ordered left and right constant
// list, explicitly listed ground tuples with exact probabilities, and a
// default (0 or 1) for every unlisted tuple.  Ground atoms are kept in text
// form — R(u), T(v), S(u,v) — with u on the left and v on the right.
struct Tid {
  std::vector<std::string> left_domain, right_domain;
  std::map<std::string, Rational> probs;
  int default_prob = 1;

  bool has_left(const std::string& c) const;
  bool has_right(const std::string& c) const;
  // Listed probability, or the default for unlisted tuples.
  Rational prob(const std::string& atom) const;

  bool operator==(const Tid&) const = default;
};

std::string atom_r(const std::string& u);
std::string atom_t(const std::string& v);
std::string atom_s(const Symbol& s, const std::string& u, const std::string& v);

// Parameters shared by the block builders.  u,v are the endpoints; length is
// the path parameter p; c the base probability of every non-trivial tuple.
// dead_ends and the branch counts only apply to build_type2_block.
struct BlockSpec {
  std::string u, v;
  int length = 1;
  Rational c = Rational(1, 2);
  std::set<Symbol> binary_symbols;
  bool with_R = true, with_T = true;
  int dead_ends = 0;
  int prefix_branches = 1, suffix_branches = 1;
};

// Path block u = r0 - t1 - r1 - ... - r_{p-1} - tp = v with both endpoints on
// the left.  Every path edge carries one tuple per binary symbol at c; every
// left constant has R and every right constant has T at c (when enabled).
Tid build_zigzag_block(const BlockSpec& spec);

// Disjoint union of one path block per entry of params, all sharing exactly
// the endpoints u,v (and hence only the tuples R(u), R(v)).
Tid build_parallel_block(const std::string& u, const std::string& v,
                         const std::vector<int>& params, const Rational& c,
                         const std::set<Symbol>& binary_symbols);

// Undirected graph given as directed edge picks: at most one of (i,j),(j,i)
// may be listed.  Nodes are named u1..u{n}.
struct Graph {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;  // 1-based node indices
};

// Block-disjoint TID for a graph: one parallel block with parameters
// edge_params per edge, plus one pendant path block of length pendant_param
// from every node u to a fresh copy u'.  Non-edges stay trivial (default 1).
Tid build_graph_tid(const Graph& g, const std::set<Symbol>& binary_symbols,
                    std::pair<int, int> edge_params, int pendant_param,
                    const Rational& c);

// Prefix/zig-zag/suffix block for queries without unary symbols: u on the
// left, v on the right, prefix branches u - t_pref,i - r0, a zig-zag
// r0..t_p, suffix branches t_p - r_suff,i - v, and dead_ends dead-end
// branches on every internal r- and t-node.
Tid build_type2_block(const BlockSpec& spec);

// Transport of a database over the zig-zag vocabulary of q back to q's own
// vocabulary: fresh e and f constants per left-right constant pair carry the
// layered tuples, everything else is trivial.
Tid zg_database(const Tid& dprime, const Query& q);

// One tuple per binary symbol on the single pair (u,v).
Tid build_elementary_block(const std::string& u, const std::string& v,
                           const std::set<Symbol>& binary_symbols, const Rational& c);

// Merge of two databases that may share constants (kept on their original
// sides) but must agree on defaults and on any atom listed in both.
Tid tid_union(const Tid& a, const Tid& b);

struct TidError : std::runtime_error {
  int line;
  TidError(const std::string& msg, int line_);
};

Tid read_tid(const std::string& text);
std::string write_tid(const Tid& t);

}  // namespace gfomc
