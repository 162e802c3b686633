#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sclab/hierarchy.hpp"

namespace sclab {

/// Gauss-Legendre rule on [0,1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  static QuadratureRule gauss(int n);
};

/// Parametric geometry map F : [0,1]^2 -> Omega.  Supported kinds: identity,
/// axis-aligned scaling, and a tensor-product B-spline map given by a control
/// net (open uniform knots per direction).
class GeometryMap {
 public:
  enum class Kind { Identity, Scaling, ControlNet };

  static GeometryMap identity();
  static GeometryMap scaling(double sx, double sy);
  static GeometryMap control_net(std::array<int, 2> degrees, int nx, int ny,
                                 std::vector<std::array<double, 2>> points);

  Kind kind() const { return kind_; }
  /// True when DF is constant diagonal (identity or scaling).
  bool affine_diagonal() const { return kind_ != Kind::ControlNet; }
  std::array<double, 2> scale_factors() const;

  struct Frame {
    std::array<double, 2> f;
    Eigen::Matrix2d df;
    double det = 1;
  };
  /// Map value, Jacobian and its determinant; throws NumericalError when the
  /// determinant is not positive.
  Frame frame(double x, double y) const;

 private:
  GeometryMap() = default;
  Kind kind_ = Kind::Identity;
  std::array<double, 2> s_{1.0, 1.0};
  std::array<int, 2> deg_{1, 1};
  int nx_ = 0, ny_ = 0;
  std::vector<std::array<double, 2>> pts_;
  std::optional<KnotVector> kvx_, kvy_;
};

/// Precomputed univariate basis values at the Gauss points of every 1D
/// element of every level: read-only during the (parallel) element loop.
/// Derived factors carry the Curry-Schoenberg normalization.
class BasisCache {
 public:
  BasisCache(const LevelStack& stack, const QuadratureRule& rule);

  struct View {
    const double* val;
    const double* der;
    int m;
  };
  /// Level-j factor (dir, derived) evaluated at Gauss point ig of the level-l
  /// 1D element e (j <= l).
  View view(int dir, int l, int e, int j, bool derived, int ig) const;
  double point(int dir, int l, int e, int ig) const;
  int ng() const { return ng_; }

 private:
  struct Block {
    int m = 0;
    std::vector<double> val, der;  // (e*ng + ig)*m + i
  };
  int nlev_, ng_;
  std::vector<Block> blocks_;  // ((dir*nlev + l)*nlev + j)*2 + derived
  std::vector<std::vector<double>> pts_;  // [dir*nlev + l][e*ng + ig]
};

/// Number of assembly threads: SCLAB_THREADS when set (>=1), otherwise the
/// hardware concurrency.
int assembly_thread_count();

/// Mass matrix of a hierarchical k-form space with the k-dependent pullback
/// (0-forms: composition; 1-forms: covariant; rotated 1-forms: Piola;
/// 2-forms: 1/det).  gauss_n = 0 picks max(p1, p2) + 1 points per direction.
SpMat assemble_mass(const HierarchicalSpace& w, const GeometryMap& geom, int gauss_n = 0);

/// (curl u, curl v) on W^1 (standard orientation), scalar curl in 2D.
SpMat assemble_curl_curl(const HierarchicalSpace& w1, const GeometryMap& geom, int gauss_n = 0);

/// Rectangular (grad q, v): rows W^0, cols W^1.
SpMat assemble_mixed_grad(const HierarchicalSpace& w0, const HierarchicalSpace& w1,
                          const GeometryMap& geom, int gauss_n = 0);

/// Rectangular (psi, curl v): rows W^2, cols W^1.
SpMat assemble_mixed_curl(const HierarchicalSpace& w2, const HierarchicalSpace& w1,
                          const GeometryMap& geom, int gauss_n = 0);

/// Moments (1, psi_i) of the physical 2-forms; independent of the geometry.
Eigen::VectorXd assemble_moments(const HierarchicalSpace& w2, int gauss_n = 0);

/// Stokes matrices on velocity = rotated W^1 (strong normal BC) and pressure
/// = W^2:
///   a  = 2 nu (sym grad, sym grad) with Nitsche consistency + penalty terms
///        for the tangential boundary condition,
///   b  = (q, div v),
///   v  = norm matrix: full gradient + sum_F (cpen / h_F) boundary penalty,
///   mp = pressure mass; pressure_moments deflates the constant mode.
struct StokesSystem {
  SpMat a;
  SpMat b;
  SpMat v;
  SpMat mp;
  Eigen::VectorXd pressure_moments;
  double nu = 1;
  double cpen = 0;
  long dim_velocity = 0;
  long dim_pressure = 0;
};

/// cpen omitted -> 5 * max degree.  Restricted to affine-diagonal geometry.
StokesSystem assemble_stokes(const LevelStack& stack, const GeometryMap& geom, double nu = 1.0,
                             std::optional<double> cpen = std::nullopt, int gauss_n = 0);

}  // namespace sclab
