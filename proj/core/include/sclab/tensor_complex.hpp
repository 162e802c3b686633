#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Sparse>

#include "sclab/common.hpp"
#include "sclab/univariate.hpp"

namespace sclab {

using SpMat = Eigen::SparseMatrix<double>;
using IntSpMat = Eigen::SparseMatrix<std::int64_t>;

/// Ordered multi-indices alpha = (a_1 < ... < a_k), 0-based directions,
/// lexicographically sorted.  |result| = C(n, k).
std::vector<std::vector<int>> multi_indices(int n, int k);

/// Tensor-product spline complex of discrete differential forms on the unit
/// n-cube.  The k-form space has one component per alpha in I_k; in direction
/// d the component uses the Curry-Schoenberg (derivative) factor when d is in
/// alpha and the plain B-spline factor otherwise.
///
/// Basis ordering is component-major (alpha lexicographic), direction-1
/// fastest inside a component.  Homogeneous boundary conditions drop the
/// first/last function of every plain factor and keep derivative factors
/// whole; this is vanishing trace for 0-forms, vanishing tangential trace for
/// 1-forms, vanishing normal trace for (n-1)-forms, and no condition on
/// n-forms.
///
/// For n = 2 a rotated variant turns the 1-form proxy (u1, u2) into
/// (u2, -u1): components become [(B x D), (D x B)], d^0 the rotated gradient
/// and d^1 the divergence, and the 1-form mask becomes vanishing normal trace.
class TensorComplex {
 public:
  explicit TensorComplex(std::vector<KnotVector> factors, bool rotated = false);

  int n() const { return static_cast<int>(factors_.size()); }
  bool rotated() const { return rotated_; }
  int num_components(int k) const;
  /// The multi-index alpha of a component (directions with derivative factor).
  const std::vector<int>& component_alpha(int k, int comp) const;
  bool derived(int k, int comp, int dir) const;
  /// Univariate factor of component `comp` of the k-form space in direction `dir`.
  const KnotVector& space(int k, int comp, int dir) const;
  const KnotVector& base(int dir) const { return factors_[dir]; }
  const KnotVector& dbase(int dir) const { return dfactors_[dir]; }

  /// Per-direction dimensions of a component.
  std::vector<int> comp_dims(int k, int comp) const;
  long dim(int k, bool bc) const;

  /// Kept univariate indices under the boundary-condition mask.
  std::vector<int> bc_kept(int k, int comp, int dir) const;

  /// Flat pre-BC index (component-major, direction-1 fastest).
  long flat_index(int k, int comp, const std::vector<int>& idx) const;
  /// Flat pre-BC indices of the functions kept by the BC mask, in masked order.
  std::vector<long> kept_flat(int k) const;

  /// n = 2 only: the rotated (div-conforming) complex over the same factors.
  TensorComplex rotated_copy() const;

 private:
  std::vector<KnotVector> factors_;
  std::vector<KnotVector> dfactors_;
  bool rotated_;
  std::vector<std::vector<std::vector<int>>> alphas_;  // [k][comp] -> alpha
};

/// Integer incidence matrix of d^k: rows indexed by the (k+1)-form basis,
/// columns by the k-form basis (both masked when bc is true).  Entries are
/// -1/0/+1; the per-direction stencil is (value at i+1) - (value at i)
/// composed with the wedge sign (-1)^{| { a in alpha : a < l } |}.
IntSpMat incidence_matrix(const TensorComplex& tc, int k, bool bc);

/// Exact rank of an integer sparse matrix (rational elimination).
long integer_rank_exact(const IntSpMat& m);

/// Greville grid of the complex: 0-form sites per direction plus entity
/// counters; the k-form basis functions are in bijection with the k-entities.
struct GrevilleGrid {
  int n = 0;
  std::vector<int> m;                            // 0-form dims per direction
  std::vector<std::vector<double>> vertex_sites; // Greville sites of the 0-form space
  std::vector<std::vector<double>> cell_sites;   // Greville sites of the derivative spaces
  std::vector<std::vector<std::vector<int>>> alphas;  // [k][comp]

  /// Number of k-entities of component alpha (edges along alpha, faces, ...).
  long entity_count(int k, int comp) const;
  long total_entities(int k) const;
};

GrevilleGrid greville_grid(const TensorComplex& tc);

struct DimensionReport {
  int n = 0;
  std::vector<long> pre_bc;    // per k
  std::vector<long> post_bc;   // per k
  std::vector<std::vector<long>> per_component_pre;   // [k][comp]
  std::vector<std::vector<long>> per_component_post;  // [k][comp]
};

DimensionReport dimension_report(const TensorComplex& tc);

}  // namespace sclab
