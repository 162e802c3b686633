#pragma once

// Internal exact-rational machinery shared by the hierarchy and the
// exactness/cohomology checks.  Only included by core/src/*.cpp.

#include <array>
#include <vector>

#include "rational.hpp"
#include "sclab/hierarchy.hpp"

namespace sclab::detail {

/// Rational knot family of all levels of a stack.  Level 0 is the exact
/// rationalization of the base knots; finer levels are refined rationally so
/// that every two-scale relation along the chain is exact (the per-level
/// double knots are used for evaluation only).
struct ExactFamily {
  explicit ExactFamily(const LevelStack& stack);
  const RatKnots& factor(int level, int dir, bool derived) const {
    return derived ? kvd[level][dir] : kv[level][dir];
  }
  std::vector<std::array<RatKnots, 2>> kv;
  std::vector<std::array<RatKnots, 2>> kvd;
};

/// Two-scale chain from level l to the finest level (identity when l is the
/// finest); rows: finest dim, cols: level-l dim.
RatMat exact_chain(const ExactFamily& fam, int l, int dir, bool derived);

/// Exact columns of the embedding W^k -> BC-masked finest X^k, in the global
/// numbering of `w`.  Throws NumericalError if a column were to hit a
/// boundary-removed finest function with a nonzero coefficient.
std::vector<RatVec> exact_embedding_cols(const HierarchicalSpace& w);

/// Exact columns of D_H^k : W^k -> W^{k+1} (recursive two-scale descent on
/// deactivated stencil terms).
std::vector<RatVec> exact_hierarchical_incidence_cols(const HierarchicalSpace& wk,
                                                      const HierarchicalSpace& wk1);

}  // namespace sclab::detail
