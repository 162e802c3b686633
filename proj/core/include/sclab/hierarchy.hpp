#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "sclab/common.hpp"
#include "sclab/tensor_complex.hpp"
#include "sclab/univariate.hpp"

namespace sclab {

/// Nested dyadic levels of a 2D tensor complex together with the refinement
/// subdomains Omega_0 (whole domain) > Omega_1 > ... > Omega_N = empty.
///
/// `refinements[l]` describes Omega_{l+1} as a set of level-l Bezier elements
/// (the subdomain closure is a union of element closures of the parent
/// level).  refinements.size() + 1 levels are built, each from the previous
/// by dyadic refinement (interior midpoints at multiplicity 1).
class LevelStack {
 public:
  LevelStack(std::array<int, 2> degrees, std::array<int, 2> base_elements,
             std::vector<BoolGrid> refinements);
  LevelStack(KnotVector base_x, KnotVector base_y, std::vector<BoolGrid> refinements);

  int num_levels() const { return num_levels_; }
  const TensorComplex& level(int l) const { return levels_.at(l); }
  const TensorComplex& level_rot(int l) const { return levels_rot_.at(l); }
  const TensorComplex& level_c(int l, bool rotated) const {
    return rotated ? levels_rot_.at(l) : levels_.at(l);
  }
  const KnotVector& kv(int l, int dir) const { return levels_.at(l).base(dir); }
  std::array<int, 2> elements(int l) const {
    return {kv(l, 0).num_elements(), kv(l, 1).num_elements()};
  }

  /// Mask of Omega_l over the elements of mesh `mesh_level` (>= l-1; Omega_0
  /// is the whole domain and Omega_l for l >= num_levels is empty).
  BoolGrid omega_mask(int l, int mesh_level) const;

  /// Is the open support of the tensor function (i1, i2) of the level-l
  /// factor pair (kv1, kv2) contained in Omega_{lprime}?
  bool supp_in_omega(int l, const KnotVector& kv1, const KnotVector& kv2, int i1, int i2,
                     int lprime) const;

 private:
  void build(std::vector<BoolGrid> refinements);
  int num_levels_ = 1;
  std::vector<TensorComplex> levels_;
  std::vector<TensorComplex> levels_rot_;
  // omega_[l] for l = 1..N-1: mask of Omega_l per mesh level l-1..N-1
  std::vector<std::map<int, BoolGrid>> omega_;
};

struct HierFunc {
  int level = 0;
  int comp = 0;
  int i1 = 0;
  int i2 = 0;
};

/// Hierarchical k-form space: Kraft's selection applied per component, with
/// homogeneous boundary conditions removed before selection (when bc is set)
/// and open supports throughout.  Global numbering is level-major, then
/// component-major, then direction-1-fastest.  Holds a reference to `stack`,
/// which must outlive the space.
class HierarchicalSpace {
 public:
  HierarchicalSpace(const LevelStack& stack, int k, bool rotated = false, bool bc = true);

  int k() const { return k_; }
  bool rotated() const { return rotated_; }
  bool bc() const { return bc_; }
  long dim() const { return static_cast<long>(funcs_.size()); }
  const LevelStack& stack() const { return *stack_; }
  int num_components() const;

  const std::vector<HierFunc>& functions() const { return funcs_; }
  /// Active (i1, i2) pairs of one level/component, sorted (i2 major, i1 minor).
  const std::vector<std::pair<int, int>>& active(int level, int comp) const {
    return active_.at(level).at(comp);
  }
  /// Global index, or -1 when the function is not active.
  long index_of(int level, int comp, int i1, int i2) const;

  /// Global ids (ascending) of active functions not vanishing on the level-l
  /// element (ex, ey); functions of levels j <= l contribute via ancestors.
  std::vector<long> contributing(int level, int ex, int ey) const;

  const KnotVector& comp_kv(int level, int comp, int dir) const;
  std::array<bool, 2> derived_flags(int comp) const;

 private:
  const LevelStack* stack_;
  int k_;
  bool rotated_, bc_;
  std::vector<std::vector<std::vector<std::pair<int, int>>>> active_;  // [level][comp]
  std::vector<HierFunc> funcs_;
  std::map<std::array<int, 4>, long> index_;
  // per level: (ex, ey) -> ids of level-l active functions supported there
  std::vector<std::map<std::pair<int, int>, std::vector<long>>> supp_map_;
};

struct HierElem {
  int level = 0;
  int ex = 0;
  int ey = 0;
};

/// Active elements: level-l elements inside Omega_l but not inside Omega_{l+1}.
std::vector<HierElem> hierarchical_bezier_mesh(const LevelStack& stack);

/// dim W^k for k = 0, 1, 2 (boundary conditions applied).
std::array<long, 3> hierarchical_dims(const LevelStack& stack, bool rotated = false);

/// Level-l functions of one component (BC-kept when bc) whose open support
/// lies inside Omega_{lp}, sorted (i2 major, i1 minor).
std::vector<std::pair<int, int>> basis_subset(const LevelStack& stack, int k, int comp, int l,
                                              int lp, bool rotated = false, bool bc = true);

/// Embedding of the hierarchical basis into the BC-masked finest-level tensor
/// basis (rows: masked finest X^k, cols: W^k), via exact two-scale chains.
SpMat embedding_to_fine(const LevelStack& stack, int k, bool rotated = false);

/// The exterior derivative on the active hierarchical basis, expanded by
/// recursive descent through the levels (exact rationals internally, rounded
/// on return).  Rows: W^{k+1}, cols: W^k.
SpMat hierarchical_incidence(const LevelStack& stack, int k, bool rotated = false);

/// Verify d o d = 0 on the hierarchical complex in exact rational arithmetic.
bool hierarchical_dd_zero_exact(const LevelStack& stack, bool rotated = false);

}  // namespace sclab
