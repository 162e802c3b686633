#pragma once

#include <array>
#include <optional>
#include <vector>

#include "sclab/greville_topology.hpp"
#include "sclab/hierarchy.hpp"

namespace sclab {

/// Assumption 1 at level l: Omega_{l+1} is a union of supports of level-l
/// 2-form basis functions contained in it.  `uncovered` is the first element
/// of Omega_{l+1} (x fastest) no contained support covers.
struct SupportCheck {
  bool ok = true;
  std::optional<std::array<int, 2>> uncovered;
};

SupportCheck check_assumption_support(const LevelStack& stack, int l);

/// overlap(beta) = supp(beta) setminus Omega_{l+1} as level-l elements, with
/// its region topology.
struct OverlapRegion {
  int level = 0;
  int k = 0;
  int comp = 0;
  int i1 = 0;
  int i2 = 0;
  BoolGrid cells;
  RegionTopology topology;
};

OverlapRegion overlap(const LevelStack& stack, int l, int k, int comp, int i1, int i2);

/// Assumption 2 at level l: overlap(beta) is connected and simply connected
/// (empty overlaps pass) for every beta of every form degree k = 0, 1, 2.
/// The quantifier runs over the full basis by default; include_boundary =
/// false restricts it to the boundary-condition-kept functions.
struct OverlapCheck {
  bool ok = true;
  std::vector<OverlapRegion> violations;
};

OverlapCheck check_assumption_overlap(const LevelStack& stack, int l,
                                      bool include_boundary = true);

/// Extended support of a level-l element Q: the union M of supports of
/// 0-form functions not vanishing on Q (a (2p+1)-element block in the
/// interior), the Greville cells G of the 2-form functions not vanishing on
/// Q (a p-cell block), and the one-cell dilation G' clipped to the grid.
struct ExtendedSupport {
  BoolGrid elements;
  BoolGrid greville_cells;
  BoolGrid greville_cells_ext;
};

ExtendedSupport extended_support(const LevelStack& stack, int l, int ex, int ey);

}  // namespace sclab
