#include "sclab/solvers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "sclab/common.hpp"

namespace sclab {

namespace {

struct DenseEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

DenseEig sym_gen_eig(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m, const char* what) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m,
                                                               Eigen::ComputeEigenvectors |
                                                                   Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": generalized eigensolve failed (mass factor "
                                             "not positive definite?)");
  return {es.eigenvalues(), es.eigenvectors()};
}

double backward_residual(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m,
                         const DenseEig& eig) {
  const double nk = k.cwiseAbs().rowwise().sum().maxCoeff();
  const double nm = m.cwiseAbs().rowwise().sum().maxCoeff();
  double worst = 0;
  for (int i = 0; i < eig.values.size(); ++i) {
    const Eigen::VectorXd x = eig.vectors.col(i);
    const double lam = eig.values[i];
    const double r = (k * x - lam * (m * x)).norm();
    const double scale = (nk + std::abs(lam) * nm) * x.norm();
    worst = std::max(worst, r / scale);
  }
  return worst;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

EigResult finish(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m, double lambda_tol,
                 const char* method) {
  const DenseEig eig = sym_gen_eig(k, m, method);
  EigResult r;
  r.values = eig.values;
  r.lambda_tol = lambda_tol >= 0
                     ? lambda_tol
                     : 1e-8 * std::max(1e-300, eig.values.cwiseAbs().maxCoeff());
  r.zero_count = count_zeros(eig.values, r.lambda_tol);
  r.max_residual = backward_residual(k, m, eig);
  r.method = method;
  return r;
}

}  // namespace

int count_zeros(const Eigen::VectorXd& values, double lambda_tol) {
  if (values.size() == 0) return 0;
  const double tol =
      lambda_tol >= 0 ? lambda_tol : 1e-8 * std::max(1e-300, values.cwiseAbs().maxCoeff());
  int n = 0;
  for (int i = 0; i < values.size(); ++i)
    if (std::abs(values[i]) <= tol) ++n;
  return n;
}

EigResult maxwell_primal(const LevelStack& stack, const GeometryMap& geom, int gauss_n,
                         double lambda_tol) {
  const HierarchicalSpace w1(stack, 1);
  const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_curl_curl(w1, geom, gauss_n));
  const Eigen::MatrixXd m = Eigen::MatrixXd(assemble_mass(w1, geom, gauss_n));
  return finish(symmetrized(k), symmetrized(m), lambda_tol, "primal");
}

EigResult maxwell_mixed_1(const LevelStack& stack, const GeometryMap& geom, int gauss_n,
                          double lambda_tol) {
  const HierarchicalSpace w0(stack, 0);
  const HierarchicalSpace w1(stack, 1);
  const Eigen::MatrixXd g = Eigen::MatrixXd(assemble_mixed_grad(w0, w1, geom, gauss_n));
  const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_curl_curl(w1, geom, gauss_n));
  const Eigen::MatrixXd m = Eigen::MatrixXd(assemble_mass(w1, geom, gauss_n));
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  const Eigen::MatrixXd z = lu.kernel();
  if (z.cols() == 0) throw NumericalError("mixed1: gradient coupling has a trivial kernel");
  return finish(symmetrized(z.transpose() * k * z), symmetrized(z.transpose() * m * z),
                lambda_tol, "mixed1");
}

EigResult maxwell_mixed_2(const LevelStack& stack, const GeometryMap& geom, int gauss_n,
                          double lambda_tol) {
  const HierarchicalSpace w1(stack, 1);
  const HierarchicalSpace w2(stack, 2);
  const Eigen::MatrixXd c = Eigen::MatrixXd(assemble_mixed_curl(w2, w1, geom, gauss_n));
  const Eigen::MatrixXd m1 = Eigen::MatrixXd(assemble_mass(w1, geom, gauss_n));
  const Eigen::MatrixXd m2 = Eigen::MatrixXd(assemble_mass(w2, geom, gauss_n));
  const Eigen::VectorXd b = assemble_moments(w2, gauss_n);

  const Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(m1));
  if (llt.info() != Eigen::Success)
    throw NumericalError("mixed2: 1-form mass matrix is not positive definite");
  const Eigen::MatrixXd s = c * llt.solve(c.transpose());

  // deflate the constant 2-form direction spanned by the moment vector
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd z = q.rightCols(q.cols() - 1);
  return finish(symmetrized(z.transpose() * s * z), symmetrized(z.transpose() * m2 * z),
                lambda_tol, "mixed2");
}

InfSupResult infsup_constant(const StokesSystem& sys) {
  Eigen::SimplicialLDLT<SpMat> ldlt(sys.v);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("infsup: velocity norm matrix factorization failed");
  const Eigen::MatrixXd bt = Eigen::MatrixXd(sys.b).transpose();
  const Eigen::MatrixXd s = Eigen::MatrixXd(sys.b) * ldlt.solve(bt);

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(sys.pressure_moments);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd z = q.rightCols(q.cols() - 1);
  const DenseEig eig = sym_gen_eig(symmetrized(z.transpose() * s * z),
                                   symmetrized(z.transpose() * Eigen::MatrixXd(sys.mp) * z),
                                   "infsup");

  InfSupResult r;
  r.values = eig.values;
  r.method = "infsup";
  const double lmax = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0;
  r.lambda_tol = 1e-10 * lmax;
  for (int i = 0; i < eig.values.size(); ++i)
    if (eig.values[i] > r.lambda_tol) {
      r.beta = std::sqrt(eig.values[i]);
      return r;
    }
  throw NumericalError("infsup: no eigenvalue above the deflation threshold");
}

std::vector<double> analytic_square_spectrum(int count) {
  if (count < 1) throw SpecError("analytic spectrum: count must be positive");
  std::vector<double> vals;
  constexpr int kMax = 64;
  for (int m = 0; m <= kMax; ++m)
    for (int n = 0; n <= kMax; ++n) {
      if (m == 0 && n == 0) continue;
      vals.push_back(static_cast<double>(m * m + n * n));
    }
  std::sort(vals.begin(), vals.end());
  if (static_cast<int>(vals.size()) < count)
    throw SpecError("analytic spectrum: count too large");
  vals.resize(count);
  return vals;
}

std::vector<int> detect_spurious(const Eigen::VectorXd& computed,
                                 const std::vector<double>& analytic, double rel_tol,
                                 double zero_tol) {
  const double ztol = zero_tol >= 0
                          ? zero_tol
                          : (computed.size() ? 1e-8 * std::max(1e-300,
                                                               computed.cwiseAbs().maxCoeff())
                                             : 0.0);
  std::vector<bool> used(analytic.size(), false);
  std::vector<int> spurious;
  for (int i = 0; i < computed.size(); ++i) {
    const double lam = computed[i];
    if (std::abs(lam) <= ztol) continue;
    bool matched = false;
    for (std::size_t j = 0; j < analytic.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(lam - analytic[j]) <= rel_tol * analytic[j]) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) spurious.push_back(i);
  }
  return spurious;
}

}  // namespace sclab
