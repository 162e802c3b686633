#include "rational.hpp"

#include <algorithm>

namespace sclab::detail {

RatKnots rat_knots(const KnotVector& kv) {
  RatKnots out;
  out.p = kv.degree();
  out.knots.reserve(kv.knots().size());
  for (double k : kv.knots()) out.knots.emplace_back(k);  // mpq from double is exact
  return out;
}

RatKnots rat_derivative(const RatKnots& kv) {
  RatKnots out;
  out.p = kv.p - 1;
  out.knots.assign(kv.knots.begin() + 1, kv.knots.end() - 1);
  return out;
}

RatKnots rat_dyadic_refine(const RatKnots& kv) {
  RatKnots out;
  out.p = kv.p;
  std::vector<Rat> kn = kv.knots;
  std::vector<Rat> breaks;
  breaks.push_back(kn.front());
  for (const Rat& k : kn)
    if (k != breaks.back()) breaks.push_back(k);
  for (std::size_t e = 0; e + 1 < breaks.size(); ++e)
    kn.push_back((breaks[e] + breaks[e + 1]) / 2);
  std::sort(kn.begin(), kn.end());
  out.knots = std::move(kn);
  return out;
}

RatMat rat_twoscale(const RatKnots& coarse, const RatKnots& fine) {
  const int p = coarse.p;
  std::vector<Rat> kn = coarse.knots;
  const int m0 = coarse.dim();
  RatMat M(m0, std::vector<Rat>(m0, 0));
  for (int i = 0; i < m0; ++i) M[i][i] = 1;

  // multiset difference of knots to insert
  std::map<Rat, int> want;
  for (const Rat& k : fine.knots) ++want[k];
  for (const Rat& k : kn) --want[k];
  std::vector<Rat> to_insert;
  for (const auto& [k, c] : want)
    for (int r = 0; r < c; ++r) to_insert.push_back(k);
  std::sort(to_insert.begin(), to_insert.end());

  for (const Rat& x : to_insert) {
    const int m = static_cast<int>(kn.size()) - p - 1;
    int s = 0;
    for (int i = 0; i + 1 < static_cast<int>(kn.size()); ++i)
      if (kn[i] <= x && x < kn[i + 1]) s = i;
    if (x >= kn.back()) s = static_cast<int>(kn.size()) - p - 2;
    RatMat A(m + 1, std::vector<Rat>(m, 0));
    for (int i = 0; i <= m; ++i) {
      Rat al;
      if (i <= s - p)
        al = 1;
      else if (i >= s + 1)
        al = 0;
      else
        al = (x - kn[i]) / (kn[i + p] - kn[i]);
      if (al != 0) A[i][i] = al;
      if (i - 1 >= 0 && al != 1) A[i][i - 1] = 1 - al;
    }
    RatMat next(m + 1, std::vector<Rat>(m0, 0));
    for (int i = 0; i <= m; ++i) {
      for (int jmid = std::max(0, i - 1); jmid <= std::min(m - 1, i); ++jmid) {
        if (A[i][jmid] == 0) continue;
        for (int j = 0; j < m0; ++j)
          if (M[jmid][j] != 0) next[i][j] += A[i][jmid] * M[jmid][j];
      }
    }
    M = std::move(next);
    kn.insert(std::upper_bound(kn.begin(), kn.end(), x), x);
  }
  if (kn != fine.knots) throw NumericalError("twoscale: knot vectors are not nested");
  return M;
}

std::vector<Rat> rat_cs_weights(const RatKnots& kv) {
  const int p = kv.p;
  const int m = kv.dim();
  std::vector<Rat> w(m - 1);
  for (int j = 0; j < m - 1; ++j) w[j] = Rat(p) / (kv.knots[j + 1 + p] - kv.knots[j + 1]);
  return w;
}

RatMat rat_twoscale_cs(const RatKnots& coarse, const RatKnots& fine) {
  RatMat R = rat_twoscale(rat_derivative(coarse), rat_derivative(fine));
  const std::vector<Rat> wo = rat_cs_weights(coarse);
  const std::vector<Rat> wn = rat_cs_weights(fine);
  for (std::size_t i = 0; i < R.size(); ++i)
    for (std::size_t j = 0; j < R[i].size(); ++j)
      if (R[i][j] != 0) R[i][j] = R[i][j] * wo[j] / wn[i];
  return R;
}

Eigen::MatrixXd to_double(const RatMat& m) {
  Eigen::MatrixXd out(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) out(i, j) = m[i][j].get_d();
  return out;
}

void axpy(RatVec& y, const Rat& c, const RatVec& x) {
  RatVec out;
  out.reserve(y.size() + x.size());
  std::size_t a = 0, b = 0;
  while (a < y.size() || b < x.size()) {
    if (b == x.size() || (a < y.size() && y[a].first < x[b].first)) {
      out.push_back(y[a++]);
    } else if (a == y.size() || x[b].first < y[a].first) {
      out.emplace_back(x[b].first, c * x[b].second);
      ++b;
    } else {
      Rat v = y[a].second + c * x[b].second;
      if (v != 0) out.emplace_back(y[a].first, std::move(v));
      ++a;
      ++b;
    }
  }
  y = std::move(out);
}

long exact_rank(std::vector<RatVec> rows) {
  // pivot column -> reduced row with that leading column
  std::map<long, RatVec> pivots;
  std::sort(rows.begin(), rows.end(),
            [](const RatVec& a, const RatVec& b) { return a.size() < b.size(); });
  for (RatVec& row : rows) {
    while (!row.empty()) {
      const long lead = row.front().first;
      auto it = pivots.find(lead);
      if (it == pivots.end()) {
        pivots.emplace(lead, std::move(row));
        break;
      }
      Rat c = -row.front().second / it->second.front().second;
      axpy(row, c, it->second);
    }
  }
  return static_cast<long>(pivots.size());
}

long nnz(const std::vector<RatVec>& rows) {
  long n = 0;
  for (const auto& r : rows) n += static_cast<long>(r.size());
  return n;
}

}  // namespace sclab::detail
