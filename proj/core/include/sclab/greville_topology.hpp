#pragma once

#include <array>
#include <string>
#include <vector>

#include "sclab/common.hpp"
#include "sclab/hierarchy.hpp"

namespace sclab {

/// Topology of a set of cells on a Cartesian grid: connected components by
/// 4-connectivity, holes = bounded components of the complement, and the
/// manifold-with-boundary check (no two cells meeting only in a corner).
struct RegionTopology {
  int components = 0;
  int holes = 0;
  bool manifold = true;
  std::vector<int> labels;  // per cell (x fastest), component id or -1 outside

  bool same_invariants(const RegionTopology& o) const {
    return components == o.components && holes == o.holes;
  }
};

RegionTopology region_topology(const BoolGrid& cells);

/// Greville subgrid G_{l,lp}: entities of the level-l Greville grid whose
/// associated basis functions have support inside Omega_{lp}.  Cells pair
/// with 2-forms, vertices with (BC-kept) 0-forms, edges with the two 1-form
/// components.
struct GrevilleSubgrid {
  int level = 0;
  int target = 0;
  BoolGrid cells;
  BoolGrid vertices;
  std::array<BoolGrid, 2> edges;
};

GrevilleSubgrid greville_subgrid(const LevelStack& stack, int l, int lp);

/// T(Omega_{l+1}) on level-l Bezier cells vs T(G_{l,l+1}) vs T(G_{l+1,l+1})
/// on Greville cells; match compares component and hole counts.
struct TopologyCompare {
  int level = 0;
  RegionTopology omega;
  RegionTopology coarse;
  RegionTopology fine;
  bool match = false;
};

TopologyCompare topology_compare(const LevelStack& stack, int l);

/// Cohomology dimensions of the hierarchical complex, from ranks of the
/// hierarchical incidence matrices.  Ranks are exact rational when the
/// matrices stay under the nnz threshold, otherwise a floating SVD fallback
/// is used and flagged.
struct CohomologyResult {
  std::array<long, 3> h{};      // dim H^k
  std::array<long, 3> dims{};   // dim W^k
  std::array<long, 2> ranks{};  // rank d^0, rank d^1
  std::string rank_method;      // "exact", "svd_fallback", or "mixed"
};

inline constexpr long kExactRankNnzLimit = 50000;

CohomologyResult cohomology_dims_rank(const LevelStack& stack, bool rotated = false);

/// Exactness of 0 -> W^0 -> W^1 -> W^2 -> R -> 0: the rank-based cohomology
/// dims are the verdict; per-level topology comparison and the dimension
/// identity dim W^0 + dim W^2 = dim W^1 + 1 are reported as diagnostics.
struct ExactnessReport {
  std::vector<TopologyCompare> levels;  // l = 0..N-2
  bool topology_ok = true;
  bool dim_identity = false;
  CohomologyResult cohomology;
  bool exact = false;
};

ExactnessReport exactness_check(const LevelStack& stack, bool rotated = false);

}  // namespace sclab
