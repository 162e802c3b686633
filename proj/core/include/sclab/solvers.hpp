#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sclab/geometry_assembly.hpp"
#include "sclab/hierarchy.hpp"

namespace sclab {

/// Result of a generalized symmetric eigensolve K x = lambda M x.
struct EigResult {
  Eigen::VectorXd values;   ///< all eigenvalues, ascending
  int zero_count = 0;       ///< eigenvalues with |lambda| <= lambda_tol
  double lambda_tol = 0;    ///< threshold used for zero_count
  double max_residual = 0;  ///< worst relative backward error over all pairs
  std::string method;       ///< "primal", "mixed1" or "mixed2"
};

/// Number of entries with |lambda| <= lambda_tol; a negative tolerance selects
/// the default 1e-8 * max|lambda|.
int count_zeros(const Eigen::VectorXd& values, double lambda_tol = -1);

/// Curl-curl eigenproblem on the hierarchical 1-form space with vanishing
/// tangential trace: (curl u, curl v) = lambda (u, v).
EigResult maxwell_primal(const LevelStack& stack, const GeometryMap& geom, int gauss_n = 0,
                         double lambda_tol = -1);

/// Same pencil restricted to the kernel of the 0-form gradient coupling.
/// zero_count reports the dimension of the harmonic 1-form space.
EigResult maxwell_mixed_1(const LevelStack& stack, const GeometryMap& geom, int gauss_n = 0,
                          double lambda_tol = -1);

/// Schur complement pencil C M1^{-1} C^T q = lambda M2 q on 2-forms, deflated
/// of the constant via the moment vector. zero_count reports dim H^2 - 1.
EigResult maxwell_mixed_2(const LevelStack& stack, const GeometryMap& geom, int gauss_n = 0,
                          double lambda_tol = -1);

struct InfSupResult {
  double beta = 0;          ///< inf-sup constant
  Eigen::VectorXd values;   ///< eigenvalues of the deflated Schur pencil
  double lambda_tol = 0;    ///< threshold below which eigenvalues count as zero
  std::string method;
};

/// Discrete inf-sup constant of the velocity/pressure pair: beta is the square
/// root of the smallest nonzero eigenvalue of B V^{-1} B^T q = lambda M_p q
/// with the constant pressure deflated.
InfSupResult infsup_constant(const StokesSystem& sys);

/// First `count` eigenvalues m^2 + n^2 (m, n >= 0, not both zero, each ordered
/// pair counted) of the Maxwell cavity on the unit-pi square.
std::vector<double> analytic_square_spectrum(int count);

/// Indices of computed nonzero eigenvalues that cannot be matched greedily to
/// an unused analytic eigenvalue within rel_tol.
std::vector<int> detect_spurious(const Eigen::VectorXd& computed,
                                 const std::vector<double>& analytic, double rel_tol = 0.01,
                                 double zero_tol = -1);

}  // namespace sclab
