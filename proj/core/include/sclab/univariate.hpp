#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sclab/common.hpp"

namespace sclab {

/// A p-open knot vector on [0,1] and its univariate B-spline space.
///
/// Knots are stored as doubles; all mesh constructions used by the library
/// are built from exact dyadic/rational breakpoints so refinement is
/// reproducible bit for bit.  Supports are treated as open intervals.
class KnotVector {
 public:
  KnotVector(int degree, std::vector<double> knots);

  /// Uniform p-open vector with `elements` equal elements and maximal continuity.
  static KnotVector open_uniform(int degree, int elements);

  /// General open vector: interior breakpoint b_j repeated (p - continuity_j)
  /// times.  `continuity` has one entry per interior breakpoint; pass an empty
  /// vector for maximal continuity (p-1 everywhere).
  static KnotVector open_knot_vector(int degree, const std::vector<double>& breakpoints,
                                     const std::vector<int>& continuity = {});

  int degree() const { return p_; }
  int dim() const { return m_; }
  int num_elements() const { return static_cast<int>(breaks_.size()) - 1; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& breakpoints() const { return breaks_; }

  /// Degree p-1 space on the interior knots (first and last knot removed).
  KnotVector derivative_space() const;

  /// Greville sites gamma_i = (xi_{i+1} + ... + xi_{i+p}) / p, i = 0..m-1.
  std::vector<double> greville_sites() const;

  /// Index s with knots[s] <= x < knots[s+1]; x at the right end maps to the
  /// last nonempty span.
  int find_span(double x) const;

  /// Values of all m basis functions at x (only p+1 of them are nonzero).
  void evaluate_basis(double x, std::vector<double>& out) const;
  std::vector<double> evaluate_basis(double x) const;

  /// Values and first derivatives of all m basis functions at x.
  void evaluate_basis_der(double x, std::vector<double>& val, std::vector<double>& der) const;

  /// Open support (xi_i, xi_{i+p+1}) of basis function i.
  std::pair<double, double> support_interval(int i) const;

  /// Element indices whose interior meets the open support of basis i.
  std::vector<int> support_elements(int i) const;

  /// Same mesh with every element halved (interior midpoints at multiplicity 1).
  KnotVector dyadic_refine() const;

  /// Curry-Schoenberg weights w_j = p / (xi_{j+1+p} - xi_{j+1}), j = 0..m-2,
  /// turning the B-splines of the derivative space into the normalized basis
  /// D_j = w_j * B_{j,p-1}.
  std::vector<double> curry_schoenberg_weights() const;

 private:
  int p_;
  int m_;
  std::vector<double> knots_;
  std::vector<double> breaks_;
};

/// Values of the normalized Curry-Schoenberg basis D_{j,p-1}, j = 0..m-2, of
/// the derivative space of `kv` at x.  The boundary convention D_{-1} = D_{m-1}
/// = 0 is implicit in the indexing.
std::vector<double> evaluate_curry_schoenberg(const KnotVector& kv, double x);

/// Two-scale (knot insertion) matrix R of shape (fine.dim() x coarse.dim()):
/// column i holds the coefficients of coarse basis function i in the fine
/// basis.  Requires equal degrees and nested knots.  Entries are computed in
/// exact rational arithmetic and rounded once on return.
Eigen::MatrixXd twoscale_matrix(const KnotVector& coarse, const KnotVector& fine);

/// Two-scale matrix between the normalized Curry-Schoenberg bases of the
/// derivative spaces of `coarse` and `fine`.
Eigen::MatrixXd twoscale_matrix_cs(const KnotVector& coarse, const KnotVector& fine);

}  // namespace sclab
