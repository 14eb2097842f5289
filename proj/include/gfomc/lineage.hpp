#pragma once

#include <array>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gfomc/formula.hpp"
#include "gfomc/query.hpp"
#include "gfomc/tid.hpp"

namespace gfomc {

// Lineage of q on d: each clause grounds over left x right; tuples with
// probability 0 or 1 substitute away immediately; the result is
// subsumption-reduced. Type-II clauses distribute their subclause
// disjunction into CNF, so keep domains small.
CnfFormula ground_lineage(const Query& q, const Tid& d);

// Probabilities of the formula's variables, read off d (with its default).
ProbMap lineage_probs(const CnfFormula& f, const Tid& d);

Rational pr_exact(const Query& q, const Tid& d);

// Y_ab(u,v): lineage over the block with R(u) := a and R(v) := b. Both
// endpoints sit on the left side, as in the zig-zag blocks.
CnfFormula restricted_lineage(const Query& q, const Tid& block,
                              const std::string& u, int a,
                              const std::string& v, int b);

// Y_{alpha,beta}(u,v): lineage over the block conjoined with the left
// lattice element alpha anchored at u and the right element beta anchored
// at v. The empty set is the top (true) on either side.
CnfFormula restricted_lineage(const Query& q, const Tid& block,
                              const std::string& u, const std::set<std::size_t>& alpha,
                              const std::string& v, const std::set<std::size_t>& beta,
                              const Lattice& left, const Lattice& right);

// weighted_count of y under the block's tuple probabilities.
Rational block_prob(const CnfFormula& y, const Tid& block);

enum class PendantMode { PaperSum, SemanticWeighted };

struct BlockValues {
  std::array<std::array<Rational, 2>, 2> z{};  // edge-block Pr(Y_ab)
  std::array<Rational, 2> y_pendant{};         // per endpoint value, mode-combined
  PendantMode mode = PendantMode::SemanticWeighted;
};

// Folds a pendant block's z-matrix into per-endpoint factors: paper-sum is
// z_a0 + z_a1, semantic-weighted is (1-c) z_a0 + c z_a1.
std::array<Rational, 2> pendant_values(const std::array<std::array<Rational, 2>, 2>& z,
                                       const Rational& c, PendantMode mode);

// z for a parallel edge block with the given branch lengths (entrywise
// product of the two branch matrices) plus the folded pendant factors.
BlockValues compute_block_values(const Query& q, std::pair<int, int> edge_params,
                                 int pendant_param, const Rational& c, PendantMode mode);

// Sum over theta: nodes -> {0,1} of prod_edges z[theta_i][theta_j] times
// prod_nodes (theta ? c : 1-c) * y_pendant[theta].
Rational pr_structured(const Graph& g, const BlockValues& bv, const Rational& c);

struct BlockInstance {
  std::string u, v;  // u on the block's left side, v on its right
  Tid tid;
};

// Mobius-inverted probability of a pure type II-II query on a disjoint
// union of blocks. With no pendant blocks the edge blocks must cover all
// left-right node pairs; with pendant blocks (one per node on each side,
// partner constants fresh) only listed edges contribute factors. Either
// way the sum carries the (-1)^{|U|+|V|} sign, one inversion per node.
Rational pr_mobius(const Query& q, const std::vector<BlockInstance>& edge_blocks,
                   const std::vector<BlockInstance>& left_pendants,
                   const std::vector<BlockInstance>& right_pendants);

}  // namespace gfomc
