#include "sclab/greville_topology.hpp"

#include <algorithm>
#include <deque>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "hier_exact.hpp"

namespace sclab {

namespace {

/// Flood fill of `grid` from (x0, y0) over cells with value `target` in
/// `labels` (-2 = unvisited target), writing `label`.
void flood(const BoolGrid& grid, std::vector<int>& labels, int x0, int y0, int label) {
  const int nx = grid.nx(), ny = grid.ny();
  std::deque<std::pair<int, int>> q;
  q.emplace_back(x0, y0);
  labels[static_cast<std::size_t>(y0) * nx + x0] = label;
  constexpr int dx[4] = {1, -1, 0, 0};
  constexpr int dy[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    auto [cx, cy] = q.front();
    q.pop_front();
    for (int d = 0; d < 4; ++d) {
      const int tx = cx + dx[d], ty = cy + dy[d];
      if (tx < 0 || tx >= nx || ty < 0 || ty >= ny) continue;
      std::size_t i = static_cast<std::size_t>(ty) * nx + tx;
      if (grid.at(tx, ty) && labels[i] == -2) {
        labels[i] = label;
        q.emplace_back(tx, ty);
      }
    }
  }
}

}  // namespace

RegionTopology region_topology(const BoolGrid& cells) {
  RegionTopology out;
  const int nx = cells.nx(), ny = cells.ny();
  out.labels.assign(static_cast<std::size_t>(nx) * ny, -1);
  for (std::size_t i = 0; i < out.labels.size(); ++i)
    if (cells.at(static_cast<int>(i) % nx, static_cast<int>(i) / nx)) out.labels[i] = -2;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      if (out.labels[static_cast<std::size_t>(y) * nx + x] == -2)
        flood(cells, out.labels, x, y, out.components++);

  // holes: complement components of the one-cell padded grid not connected
  // to the outside
  BoolGrid pad(nx + 2, ny + 2, false);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      if (!cells.at(x, y)) pad.set(x + 1, y + 1);
  for (int x = 0; x < nx + 2; ++x) {
    pad.set(x, 0);
    pad.set(x, ny + 1);
  }
  for (int y = 0; y < ny + 2; ++y) {
    pad.set(0, y);
    pad.set(nx + 1, y);
  }
  std::vector<int> clab(static_cast<std::size_t>(nx + 2) * (ny + 2), -1);
  for (std::size_t i = 0; i < clab.size(); ++i)
    if (pad.at(static_cast<int>(i) % (nx + 2), static_cast<int>(i) / (nx + 2))) clab[i] = -2;
  flood(pad, clab, 0, 0, 0);  // the outside
  int next = 1;
  for (int y = 0; y < ny + 2; ++y)
    for (int x = 0; x < nx + 2; ++x)
      if (clab[static_cast<std::size_t>(y) * (nx + 2) + x] == -2) flood(pad, clab, x, y, next++);
  out.holes = next - 1;

  out.manifold = true;
  for (int y = 0; y + 1 < ny; ++y)
    for (int x = 0; x + 1 < nx; ++x) {
      const bool a = cells.at(x, y), b = cells.at(x + 1, y);
      const bool c = cells.at(x, y + 1), d = cells.at(x + 1, y + 1);
      if ((a && d && !b && !c) || (b && c && !a && !d)) out.manifold = false;
    }
  return out;
}

GrevilleSubgrid greville_subgrid(const LevelStack& stack, int l, int lp) {
  if (l < 0 || l > lp || lp > stack.num_levels())
    throw SpecError("greville_subgrid: need 0 <= l <= l' <= number of levels");
  if (l == stack.num_levels()) throw SpecError("greville_subgrid: level out of range");
  GrevilleSubgrid out;
  out.level = l;
  out.target = lp;
  const TensorComplex& tc = stack.level(l);

  auto fill = [&](int k, int comp) {
    const KnotVector& a = tc.space(k, comp, 0);
    const KnotVector& b = tc.space(k, comp, 1);
    BoolGrid g(a.dim(), b.dim(), false);
    const auto r1 = tc.bc_kept(k, comp, 0);
    const auto r2 = tc.bc_kept(k, comp, 1);
    for (int i2 : r2)
      for (int i1 : r1)
        if (stack.supp_in_omega(l, a, b, i1, i2, lp)) g.set(i1, i2);
    return g;
  };
  out.cells = fill(2, 0);
  out.vertices = fill(0, 0);
  out.edges = {fill(1, 0), fill(1, 1)};
  return out;
}

TopologyCompare topology_compare(const LevelStack& stack, int l) {
  if (l < 0 || l + 1 >= stack.num_levels())
    throw SpecError("topology_compare: level out of range");
  TopologyCompare out;
  out.level = l;
  out.omega = region_topology(stack.omega_mask(l + 1, l));
  out.coarse = region_topology(greville_subgrid(stack, l, l + 1).cells);
  out.fine = region_topology(greville_subgrid(stack, l + 1, l + 1).cells);
  out.match = out.omega.same_invariants(out.coarse) && out.omega.same_invariants(out.fine);
  return out;
}

namespace {

long svd_rank(const std::vector<detail::RatVec>& cols, long rows) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, static_cast<long>(cols.size()));
  double amax = 0;
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (const auto& [i, v] : cols[j]) {
      m(i, static_cast<long>(j)) = v.get_d();
      amax = std::max(amax, std::abs(v.get_d()));
    }
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const double tol = 1e-9 * std::max(1.0, amax);
  long r = 0;
  for (long i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

std::pair<long, bool> incidence_rank(const std::vector<detail::RatVec>& cols, long rows) {
  if (detail::nnz(cols) <= kExactRankNnzLimit) return {detail::exact_rank(cols), true};
  return {svd_rank(cols, rows), false};
}

}  // namespace

CohomologyResult cohomology_dims_rank(const LevelStack& stack, bool rotated) {
  const HierarchicalSpace w0(stack, 0, rotated, true);
  const HierarchicalSpace w1(stack, 1, rotated, true);
  const HierarchicalSpace w2(stack, 2, rotated, true);
  const auto d0 = detail::exact_hierarchical_incidence_cols(w0, w1);
  const auto d1 = detail::exact_hierarchical_incidence_cols(w1, w2);
  const auto [r0, exact0] = incidence_rank(d0, w1.dim());
  const auto [r1, exact1] = incidence_rank(d1, w2.dim());

  CohomologyResult out;
  out.dims = {w0.dim(), w1.dim(), w2.dim()};
  out.ranks = {r0, r1};
  out.h = {out.dims[0] - r0, out.dims[1] - r1 - r0, out.dims[2] - r1};
  out.rank_method = exact0 && exact1 ? "exact" : (!exact0 && !exact1 ? "svd_fallback" : "mixed");
  return out;
}

ExactnessReport exactness_check(const LevelStack& stack, bool rotated) {
  ExactnessReport out;
  for (int l = 0; l + 1 < stack.num_levels(); ++l) {
    out.levels.push_back(topology_compare(stack, l));
    out.topology_ok = out.topology_ok && out.levels.back().match;
  }
  out.cohomology = cohomology_dims_rank(stack, rotated);
  const auto& d = out.cohomology.dims;
  out.dim_identity = d[0] + d[2] == d[1] + 1;
  out.exact = out.cohomology.h == std::array<long, 3>{0, 0, 1};
  return out;
}

}  // namespace sclab
