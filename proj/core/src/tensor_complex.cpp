#include "sclab/tensor_complex.hpp"

#include <algorithm>
#include <numeric>

#include "rational.hpp"

namespace sclab {

std::vector<std::vector<int>> multi_indices(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  if (k == 0) out.assign(1, {});
  return out;
}

TensorComplex::TensorComplex(std::vector<KnotVector> factors, bool rotated)
    : factors_(std::move(factors)), rotated_(rotated) {
  const int n = static_cast<int>(factors_.size());
  if (n < 1) throw SpecError("tensor complex: need at least one direction");
  if (rotated_ && n != 2) throw SpecError("rotated complex: only defined for n = 2");
  dfactors_.reserve(n);
  for (const KnotVector& kv : factors_) {
    if (kv.degree() < 1) throw SpecError("tensor complex: degree must be >= 1 in every direction");
    dfactors_.push_back(kv.derivative_space());
  }
  alphas_.resize(n + 1);
  for (int k = 0; k <= n; ++k) alphas_[k] = multi_indices(n, k);
  if (rotated_) {
    // 1-form components in rotated order: [(B x D), (D x B)] = alphas {1}, {0}
    alphas_[1] = {{1}, {0}};
  }
}

int TensorComplex::num_components(int k) const {
  if (k < 0 || k > n()) throw SpecError("form degree out of range");
  return static_cast<int>(alphas_[k].size());
}

const std::vector<int>& TensorComplex::component_alpha(int k, int comp) const {
  return alphas_.at(k).at(comp);
}

bool TensorComplex::derived(int k, int comp, int dir) const {
  const auto& a = component_alpha(k, comp);
  return std::find(a.begin(), a.end(), dir) != a.end();
}

const KnotVector& TensorComplex::space(int k, int comp, int dir) const {
  return derived(k, comp, dir) ? dfactors_[dir] : factors_[dir];
}

std::vector<int> TensorComplex::comp_dims(int k, int comp) const {
  std::vector<int> d(n());
  for (int dir = 0; dir < n(); ++dir) d[dir] = space(k, comp, dir).dim();
  return d;
}

std::vector<int> TensorComplex::bc_kept(int k, int comp, int dir) const {
  const int m = space(k, comp, dir).dim();
  std::vector<int> kept;
  if (derived(k, comp, dir)) {
    kept.resize(m);
    std::iota(kept.begin(), kept.end(), 0);
  } else {
    for (int i = 1; i + 1 < m; ++i) kept.push_back(i);
  }
  return kept;
}

long TensorComplex::dim(int k, bool bc) const {
  long total = 0;
  for (int c = 0; c < num_components(k); ++c) {
    long prod = 1;
    for (int dir = 0; dir < n(); ++dir)
      prod *= bc ? static_cast<long>(bc_kept(k, c, dir).size()) : space(k, c, dir).dim();
    total += prod;
  }
  return total;
}

long TensorComplex::flat_index(int k, int comp, const std::vector<int>& idx) const {
  long off = 0;
  for (int c = 0; c < comp; ++c) {
    long prod = 1;
    for (int dir = 0; dir < n(); ++dir) prod *= space(k, c, dir).dim();
    off += prod;
  }
  long flat = 0;
  for (int dir = n() - 1; dir >= 0; --dir) flat = flat * space(k, comp, dir).dim() + idx[dir];
  return off + flat;
}

std::vector<long> TensorComplex::kept_flat(int k) const {
  std::vector<long> out;
  for (int c = 0; c < num_components(k); ++c) {
    std::vector<std::vector<int>> kept(n());
    for (int dir = 0; dir < n(); ++dir) kept[dir] = bc_kept(k, c, dir);
    std::vector<std::size_t> cursor(n(), 0);
    bool nonempty = true;
    for (int dir = 0; dir < n(); ++dir) nonempty = nonempty && !kept[dir].empty();
    while (nonempty) {
      std::vector<int> idx(n());
      for (int dir = 0; dir < n(); ++dir) idx[dir] = kept[dir][cursor[dir]];
      out.push_back(flat_index(k, c, idx));
      int dir = 0;
      while (dir < n()) {
        if (++cursor[dir] < kept[dir].size()) break;
        cursor[dir] = 0;
        ++dir;
      }
      if (dir == n()) break;
    }
  }
  return out;
}

TensorComplex TensorComplex::rotated_copy() const {
  if (n() != 2) throw SpecError("rotate_complex_2d: only defined for n = 2");
  return TensorComplex(factors_, !rotated_);
}

namespace {

// Triplet list for one Kronecker-structured block: factor in direction `gdir`
// is the difference stencil G (m-1 x m), all others identity.
void append_block(std::vector<Eigen::Triplet<std::int64_t>>& trips, long row_off, long col_off,
                  const std::vector<int>& src_dims, int gdir, std::int64_t sign) {
  const int n = static_cast<int>(src_dims.size());
  std::vector<int> tgt_dims = src_dims;
  tgt_dims[gdir] -= 1;
  for (int d : tgt_dims)
    if (d <= 0) return;
  std::vector<int> idx(n, 0);
  while (true) {
    // idx indexes the target (row) multi-index
    long row = 0;
    for (int dir = n - 1; dir >= 0; --dir) row = row * tgt_dims[dir] + idx[dir];
    // two source terms: src[gdir] = idx[gdir] (coef -sign) and idx[gdir]+1 (coef +sign)
    for (int t = 0; t < 2; ++t) {
      std::vector<int> src = idx;
      src[gdir] += t;
      long col = 0;
      for (int dir = n - 1; dir >= 0; --dir) col = col * src_dims[dir] + src[dir];
      trips.emplace_back(static_cast<int>(row_off + row), static_cast<int>(col_off + col),
                         t == 0 ? -sign : sign);
    }
    int dir = 0;
    while (dir < n) {
      if (++idx[dir] < tgt_dims[dir]) break;
      idx[dir] = 0;
      ++dir;
    }
    if (dir == n) break;
  }
}

IntSpMat restrict_rows_cols(const IntSpMat& m, const std::vector<long>& rows,
                            const std::vector<long>& cols) {
  std::vector<long> rmap(m.rows(), -1), cmap(m.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<long>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) cmap[cols[j]] = static_cast<long>(j);
  std::vector<Eigen::Triplet<std::int64_t>> trips;
  for (int c = 0; c < m.outerSize(); ++c)
    for (IntSpMat::InnerIterator it(m, c); it; ++it) {
      long r2 = rmap[it.row()], c2 = cmap[it.col()];
      if (r2 >= 0 && c2 >= 0) trips.emplace_back(static_cast<int>(r2), static_cast<int>(c2), it.value());
    }
  IntSpMat out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

IntSpMat incidence_matrix(const TensorComplex& tc, int k, bool bc) {
  const int n = tc.n();
  if (k < 0 || k >= n) throw SpecError("incidence_matrix: k out of range");
  const int nsrc = tc.num_components(k);
  const int ntgt = tc.num_components(k + 1);

  std::vector<long> src_off(nsrc + 1, 0), tgt_off(ntgt + 1, 0);
  for (int c = 0; c < nsrc; ++c) {
    long prod = 1;
    for (int dir = 0; dir < n; ++dir) prod *= tc.space(k, c, dir).dim();
    src_off[c + 1] = src_off[c] + prod;
  }
  for (int c = 0; c < ntgt; ++c) {
    long prod = 1;
    for (int dir = 0; dir < n; ++dir) prod *= tc.space(k + 1, c, dir).dim();
    tgt_off[c + 1] = tgt_off[c] + prod;
  }

  std::vector<Eigen::Triplet<std::int64_t>> trips;
  for (int cs = 0; cs < nsrc; ++cs) {
    const std::vector<int>& as = tc.component_alpha(k, cs);
    std::vector<int> src_dims(n);
    for (int dir = 0; dir < n; ++dir) src_dims[dir] = tc.space(k, cs, dir).dim();
    for (int ct = 0; ct < ntgt; ++ct) {
      const std::vector<int>& at = tc.component_alpha(k + 1, ct);
      // at must be as with one extra direction l
      std::vector<int> extra;
      std::set_difference(at.begin(), at.end(), as.begin(), as.end(), std::back_inserter(extra));
      if (extra.size() != 1) continue;
      std::vector<int> check;
      std::set_difference(as.begin(), as.end(), at.begin(), at.end(), std::back_inserter(check));
      if (!check.empty()) continue;
      const int l = extra[0];
      const int below = static_cast<int>(std::count_if(as.begin(), as.end(), [l](int a) { return a < l; }));
      std::int64_t sign = (below % 2 == 0) ? 1 : -1;
      if (tc.rotated() && tc.n() == 2) {
        // rotated proxy (u2, -u1): d^0 columns pick up the rotation sign on the
        // second slot, and d^1 (the divergence) drops the curl's minus sign.
        if (k == 0) sign = (ct == 1) ? -1 : 1;
        if (k == 1) sign = 1;
      }
      append_block(trips, tgt_off[ct], src_off[cs], src_dims, l, sign);
    }
  }

  IntSpMat full(static_cast<int>(tgt_off[ntgt]), static_cast<int>(src_off[nsrc]));
  full.setFromTriplets(trips.begin(), trips.end());
  if (!bc) return full;
  return restrict_rows_cols(full, tc.kept_flat(k + 1), tc.kept_flat(k));
}

long integer_rank_exact(const IntSpMat& m) {
  std::vector<detail::RatVec> rows(m.rows());
  for (int c = 0; c < m.outerSize(); ++c)
    for (IntSpMat::InnerIterator it(m, c); it; ++it)
      rows[it.row()].emplace_back(it.col(), detail::Rat(static_cast<long>(it.value())));
  for (auto& r : rows)
    std::sort(r.begin(), r.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  return detail::exact_rank(std::move(rows));
}

long GrevilleGrid::entity_count(int k, int comp) const {
  const auto& alpha = alphas.at(k).at(comp);
  long prod = 1;
  for (int dir = 0; dir < n; ++dir) {
    bool d = std::find(alpha.begin(), alpha.end(), dir) != alpha.end();
    prod *= d ? (m[dir] - 1) : m[dir];
  }
  return prod;
}

long GrevilleGrid::total_entities(int k) const {
  long total = 0;
  for (std::size_t c = 0; c < alphas.at(k).size(); ++c) total += entity_count(k, static_cast<int>(c));
  return total;
}

GrevilleGrid greville_grid(const TensorComplex& tc) {
  GrevilleGrid g;
  g.n = tc.n();
  g.m.resize(g.n);
  g.vertex_sites.resize(g.n);
  g.cell_sites.resize(g.n);
  for (int dir = 0; dir < g.n; ++dir) {
    g.m[dir] = tc.base(dir).dim();
    g.vertex_sites[dir] = tc.base(dir).greville_sites();
    g.cell_sites[dir] = tc.dbase(dir).degree() >= 1 ? tc.dbase(dir).greville_sites()
                                                    : std::vector<double>();
    if (tc.dbase(dir).degree() == 0) {
      // degree-0 derivative space: Greville formula degenerates; use midpoints
      const auto& b = tc.dbase(dir).breakpoints();
      for (std::size_t e = 0; e + 1 < b.size(); ++e)
        g.cell_sites[dir].push_back(0.5 * (b[e] + b[e + 1]));
    }
  }
  g.alphas.resize(g.n + 1);
  for (int k = 0; k <= g.n; ++k) {
    for (int c = 0; c < tc.num_components(k); ++c) g.alphas[k].push_back(tc.component_alpha(k, c));
  }
  return g;
}

DimensionReport dimension_report(const TensorComplex& tc) {
  DimensionReport r;
  r.n = tc.n();
  r.pre_bc.resize(tc.n() + 1);
  r.post_bc.resize(tc.n() + 1);
  r.per_component_pre.resize(tc.n() + 1);
  r.per_component_post.resize(tc.n() + 1);
  for (int k = 0; k <= tc.n(); ++k) {
    r.pre_bc[k] = tc.dim(k, false);
    r.post_bc[k] = tc.dim(k, true);
    for (int c = 0; c < tc.num_components(k); ++c) {
      long pre = 1, post = 1;
      for (int dir = 0; dir < tc.n(); ++dir) {
        pre *= tc.space(k, c, dir).dim();
        post *= static_cast<long>(tc.bc_kept(k, c, dir).size());
      }
      r.per_component_pre[k].push_back(pre);
      r.per_component_post[k].push_back(post);
    }
  }
  return r;
}

}  // namespace sclab
