#include "sclab/univariate.hpp"

#include <algorithm>
#include <cmath>

#include "rational.hpp"

namespace sclab {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : p_(degree), knots_(std::move(knots)) {
  if (p_ < 0) throw SpecError("knot vector: negative degree");
  m_ = static_cast<int>(knots_.size()) - p_ - 1;
  if (m_ < 1) throw SpecError("knot vector: too few knots for degree");
  if (!std::is_sorted(knots_.begin(), knots_.end()))
    throw SpecError("knot vector: knots not non-decreasing");
  for (int i = 0; i <= p_; ++i) {
    if (knots_[i] != knots_.front() || knots_[knots_.size() - 1 - i] != knots_.back())
      throw SpecError("knot vector: boundary multiplicity must be exactly p+1");
  }
  if (knots_.size() > static_cast<std::size_t>(p_ + 1) && knots_[p_ + 1] == knots_.front())
    throw SpecError("knot vector: boundary multiplicity must be exactly p+1");
  breaks_.push_back(knots_.front());
  for (double k : knots_)
    if (k != breaks_.back()) breaks_.push_back(k);
  // interior multiplicities <= p+1 (p+1 allows a jump, needed by derivative
  // spaces of low-degree factors)
  for (std::size_t b = 1; b + 1 < breaks_.size(); ++b) {
    int mult = static_cast<int>(std::count(knots_.begin(), knots_.end(), breaks_[b]));
    if (mult > p_ + 1) throw SpecError("knot vector: interior multiplicity exceeds degree+1");
  }
}

KnotVector KnotVector::open_uniform(int degree, int elements) {
  if (elements < 1) throw SpecError("open_uniform: need at least one element");
  std::vector<double> breakpoints(elements + 1);
  for (int i = 0; i <= elements; ++i) breakpoints[i] = static_cast<double>(i) / elements;
  return open_knot_vector(degree, breakpoints);
}

KnotVector KnotVector::open_knot_vector(int degree, const std::vector<double>& breakpoints,
                                        const std::vector<int>& continuity) {
  if (breakpoints.size() < 2) throw SpecError("open_knot_vector: need at least two breakpoints");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i - 1] < breakpoints[i]))
      throw SpecError("open_knot_vector: breakpoints not strictly increasing");
  const std::size_t interior = breakpoints.size() - 2;
  if (!continuity.empty() && continuity.size() != interior)
    throw SpecError("open_knot_vector: continuity list length mismatch");
  std::vector<double> knots(degree + 1, breakpoints.front());
  for (std::size_t j = 0; j < interior; ++j) {
    int cont = continuity.empty() ? degree - 1 : continuity[j];
    if (cont < 0 || cont > degree - 1)
      throw SpecError("open_knot_vector: continuity out of range [0, p-1]");
    for (int r = 0; r < degree - cont; ++r) knots.push_back(breakpoints[j + 1]);
  }
  for (int i = 0; i <= degree; ++i) knots.push_back(breakpoints.back());
  return KnotVector(degree, std::move(knots));
}

KnotVector KnotVector::derivative_space() const {
  if (p_ == 0) throw SpecError("derivative_space: degree is already zero");
  return KnotVector(p_ - 1, std::vector<double>(knots_.begin() + 1, knots_.end() - 1));
}

std::vector<double> KnotVector::greville_sites() const {
  if (p_ < 1) throw SpecError("greville_sites: degree must be >= 1");
  std::vector<double> g(m_);
  for (int i = 0; i < m_; ++i) {
    double s = 0.0;
    for (int j = 1; j <= p_; ++j) s += knots_[i + j];
    g[i] = s / p_;
  }
  return g;
}

int KnotVector::find_span(double x) const {
  if (x < knots_.front() || x > knots_.back())
    throw SpecError("evaluate: point outside knot range");
  if (x >= knots_[m_]) {
    int i = m_ - 1;
    while (knots_[i + 1] <= knots_[i]) --i;
    return i;
  }
  int lo = p_, hi = m_;
  while (true) {
    int mid = (lo + hi) / 2;
    if (x < knots_[mid])
      hi = mid;
    else if (x >= knots_[mid + 1])
      lo = mid + 1;
    else
      return mid;
  }
}

void KnotVector::evaluate_basis(double x, std::vector<double>& out) const {
  out.assign(m_, 0.0);
  const int s = find_span(x);
  std::vector<double> N(p_ + 1, 0.0), left(p_ + 1, 0.0), right(p_ + 1, 0.0);
  N[0] = 1.0;
  for (int j = 1; j <= p_; ++j) {
    left[j] = x - knots_[s + 1 - j];
    right[j] = knots_[s + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double tmp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    N[j] = saved;
  }
  for (int j = 0; j <= p_; ++j) out[s - p_ + j] = N[j];
}

std::vector<double> KnotVector::evaluate_basis(double x) const {
  std::vector<double> out;
  evaluate_basis(x, out);
  return out;
}

void KnotVector::evaluate_basis_der(double x, std::vector<double>& val,
                                    std::vector<double>& der) const {
  evaluate_basis(x, val);
  der.assign(m_, 0.0);
  if (p_ == 0) return;
  const KnotVector dsp = derivative_space();
  std::vector<double> dv;
  dsp.evaluate_basis(x, dv);
  std::vector<double> D(m_ - 1, 0.0);
  for (int j = 0; j < m_ - 1; ++j) {
    double den = knots_[j + 1 + p_] - knots_[j + 1];
    D[j] = den > 0.0 ? p_ / den * dv[j] : 0.0;
  }
  for (int i = 0; i < m_; ++i) {
    double a = (i - 1 >= 0) ? D[i - 1] : 0.0;
    double b = (i < m_ - 1) ? D[i] : 0.0;
    der[i] = a - b;
  }
}

std::pair<double, double> KnotVector::support_interval(int i) const {
  if (i < 0 || i >= m_) throw SpecError("support_interval: index out of range");
  return {knots_[i], knots_[i + p_ + 1]};
}

std::vector<int> KnotVector::support_elements(int i) const {
  auto [lo, hi] = support_interval(i);
  std::vector<int> out;
  for (int e = 0; e + 1 < static_cast<int>(breaks_.size()); ++e)
    if (breaks_[e] < hi && breaks_[e + 1] > lo) out.push_back(e);
  return out;
}

KnotVector KnotVector::dyadic_refine() const {
  std::vector<double> kn = knots_;
  for (std::size_t e = 0; e + 1 < breaks_.size(); ++e)
    kn.push_back(0.5 * (breaks_[e] + breaks_[e + 1]));
  std::sort(kn.begin(), kn.end());
  return KnotVector(p_, std::move(kn));
}

std::vector<double> KnotVector::curry_schoenberg_weights() const {
  if (p_ == 0) throw SpecError("curry_schoenberg_weights: degree zero space");
  std::vector<double> w(m_ - 1);
  for (int j = 0; j < m_ - 1; ++j) {
    double den = knots_[j + 1 + p_] - knots_[j + 1];
    if (den <= 0.0) throw NumericalError("curry_schoenberg_weights: zero-width window");
    w[j] = p_ / den;
  }
  return w;
}

std::vector<double> evaluate_curry_schoenberg(const KnotVector& kv, double x) {
  const KnotVector dsp = kv.derivative_space();
  std::vector<double> b;
  dsp.evaluate_basis(x, b);
  const std::vector<double> w = kv.curry_schoenberg_weights();
  for (std::size_t j = 0; j < b.size(); ++j) b[j] *= w[j];
  return b;
}

Eigen::MatrixXd twoscale_matrix(const KnotVector& coarse, const KnotVector& fine) {
  detail::RatKnots rc = detail::rat_knots(coarse);
  detail::RatKnots rf = detail::rat_knots(fine);
  return detail::to_double(detail::rat_twoscale(rc, rf));
}

Eigen::MatrixXd twoscale_matrix_cs(const KnotVector& coarse, const KnotVector& fine) {
  detail::RatKnots rc = detail::rat_knots(coarse);
  detail::RatKnots rf = detail::rat_knots(fine);
  return detail::to_double(detail::rat_twoscale_cs(rc, rf));
}

}  // namespace sclab
