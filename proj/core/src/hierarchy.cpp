#include "sclab/hierarchy.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "hier_exact.hpp"

namespace sclab {

// ---------------------------------------------------------------------------
// LevelStack

LevelStack::LevelStack(std::array<int, 2> degrees, std::array<int, 2> base_elements,
                       std::vector<BoolGrid> refinements)
    : LevelStack(KnotVector::open_uniform(degrees[0], base_elements[0]),
                 KnotVector::open_uniform(degrees[1], base_elements[1]),
                 std::move(refinements)) {}

LevelStack::LevelStack(KnotVector base_x, KnotVector base_y, std::vector<BoolGrid> refinements) {
  num_levels_ = static_cast<int>(refinements.size()) + 1;
  KnotVector k1 = std::move(base_x);
  KnotVector k2 = std::move(base_y);
  levels_.reserve(num_levels_);
  levels_rot_.reserve(num_levels_);
  for (int l = 0; l < num_levels_; ++l) {
    levels_.emplace_back(std::vector<KnotVector>{k1, k2}, false);
    levels_rot_.emplace_back(std::vector<KnotVector>{k1, k2}, true);
    if (l + 1 < num_levels_) {
      k1 = k1.dyadic_refine();
      k2 = k2.dyadic_refine();
    }
  }
  build(std::move(refinements));
}

void LevelStack::build(std::vector<BoolGrid> refinements) {
  omega_.resize(num_levels_);
  for (int l = 1; l < num_levels_; ++l) {
    BoolGrid base = std::move(refinements[l - 1]);
    const auto el = elements(l - 1);
    if (base.nx() != el[0] || base.ny() != el[1])
      throw SpecError("refinement level " + std::to_string(l) + ": mask is " +
                      std::to_string(base.nx()) + "x" + std::to_string(base.ny()) +
                      " but the parent mesh has " + std::to_string(el[0]) + "x" +
                      std::to_string(el[1]) + " elements");
    omega_[l][l - 1] = std::move(base);
    for (int mesh = l; mesh < num_levels_; ++mesh)
      omega_[l][mesh] = omega_[l][mesh - 1].upsample2();
  }
  for (int l = 1; l + 1 < num_levels_; ++l)
    if (!omega_[l + 1].at(l).subset_of(omega_[l].at(l)))
      throw SpecError("refinement domains are not nested: Omega_" + std::to_string(l + 2) +
                      " is not contained in Omega_" + std::to_string(l + 1));
}

BoolGrid LevelStack::omega_mask(int l, int mesh_level) const {
  if (mesh_level < 0 || mesh_level >= num_levels_)
    throw SpecError("omega_mask: mesh level out of range");
  const auto el = elements(mesh_level);
  if (l <= 0) return BoolGrid(el[0], el[1], true);
  if (l >= num_levels_) return BoolGrid(el[0], el[1], false);
  auto it = omega_[l].find(mesh_level);
  if (it == omega_[l].end())
    throw SpecError("omega_mask: Omega_" + std::to_string(l) +
                    " is not representable on mesh level " + std::to_string(mesh_level));
  return it->second;
}

bool LevelStack::supp_in_omega(int l, const KnotVector& kv1, const KnotVector& kv2, int i1,
                               int i2, int lprime) const {
  if (lprime <= 0) return true;
  if (lprime >= num_levels_) return false;
  int q = std::min(std::max(l, lprime - 1), num_levels_ - 1);
  const int r = 1 << (q - l);
  const BoolGrid mask = omega_mask(lprime, q);
  const std::vector<int> ex = kv1.support_elements(i1);
  const std::vector<int> ey = kv2.support_elements(i2);
  for (int y : ey)
    for (int x : ex)
      for (int dy = 0; dy < r; ++dy)
        for (int dx = 0; dx < r; ++dx)
          if (!mask.at(x * r + dx, y * r + dy)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// HierarchicalSpace

namespace {

std::vector<int> universe_indices(const TensorComplex& tc, int k, int comp, int dir, bool bc) {
  if (bc) return tc.bc_kept(k, comp, dir);
  std::vector<int> all(tc.space(k, comp, dir).dim());
  for (int i = 0; i < static_cast<int>(all.size()); ++i) all[i] = i;
  return all;
}

}  // namespace

HierarchicalSpace::HierarchicalSpace(const LevelStack& stack, int k, bool rotated, bool bc)
    : stack_(&stack), k_(k), rotated_(rotated), bc_(bc) {
  if (k < 0 || k > 2) throw SpecError("hierarchical space: form degree out of range");
  const int nlev = stack.num_levels();
  const int nc = stack.level_c(0, rotated).num_components(k);

  using PairSet = std::set<std::pair<int, int>>;
  std::vector<std::vector<PairSet>> act;

  {  // level 0: every function (Omega_0 is the whole domain)
    const TensorComplex& tc = stack.level_c(0, rotated);
    std::vector<PairSet> cur(nc);
    for (int ci = 0; ci < nc; ++ci) {
      const auto r1 = universe_indices(tc, k, ci, 0, bc);
      const auto r2 = universe_indices(tc, k, ci, 1, bc);
      for (int i2 : r2)
        for (int i1 : r1) cur[ci].insert({i1, i2});
    }
    act.push_back(std::move(cur));
  }

  for (int l = 1; l < nlev; ++l) {
    std::vector<std::vector<PairSet>> next;
    // re-filter coarser levels: drop functions fully inside Omega_l
    for (int lsrc = 0; lsrc < l; ++lsrc) {
      const TensorComplex& tc = stack.level_c(lsrc, rotated);
      std::vector<PairSet> cur(nc);
      for (int ci = 0; ci < nc; ++ci) {
        const KnotVector& a = tc.space(k, ci, 0);
        const KnotVector& b = tc.space(k, ci, 1);
        for (const auto& [i1, i2] : act[lsrc][ci])
          if (!stack.supp_in_omega(lsrc, a, b, i1, i2, l)) cur[ci].insert({i1, i2});
      }
      next.push_back(std::move(cur));
    }
    // add level-l functions supported inside Omega_l
    {
      const TensorComplex& tc = stack.level_c(l, rotated);
      std::vector<PairSet> cur(nc);
      for (int ci = 0; ci < nc; ++ci) {
        const KnotVector& a = tc.space(k, ci, 0);
        const KnotVector& b = tc.space(k, ci, 1);
        const auto r1 = universe_indices(tc, k, ci, 0, bc);
        const auto r2 = universe_indices(tc, k, ci, 1, bc);
        for (int i2 : r2)
          for (int i1 : r1)
            if (stack.supp_in_omega(l, a, b, i1, i2, l)) cur[ci].insert({i1, i2});
      }
      next.push_back(std::move(cur));
    }
    act = std::move(next);
  }

  active_.resize(nlev);
  supp_map_.resize(nlev);
  for (int l = 0; l < nlev; ++l) {
    active_[l].resize(nc);
    for (int ci = 0; ci < nc; ++ci) {
      std::vector<std::pair<int, int>> v(act[l][ci].begin(), act[l][ci].end());
      std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
      });
      active_[l][ci] = std::move(v);
    }
  }
  for (int l = 0; l < nlev; ++l)
    for (int ci = 0; ci < nc; ++ci) {
      const KnotVector& a = comp_kv(l, ci, 0);
      const KnotVector& b = comp_kv(l, ci, 1);
      for (const auto& [i1, i2] : active_[l][ci]) {
        const long id = static_cast<long>(funcs_.size());
        funcs_.push_back({l, ci, i1, i2});
        index_[{l, ci, i1, i2}] = id;
        for (int e2 : b.support_elements(i2))
          for (int e1 : a.support_elements(i1)) supp_map_[l][{e1, e2}].push_back(id);
      }
    }
}

int HierarchicalSpace::num_components() const {
  return stack_->level_c(0, rotated_).num_components(k_);
}

long HierarchicalSpace::index_of(int level, int comp, int i1, int i2) const {
  auto it = index_.find({level, comp, i1, i2});
  return it == index_.end() ? -1 : it->second;
}

std::vector<long> HierarchicalSpace::contributing(int level, int ex, int ey) const {
  std::vector<long> ids;
  for (int j = 0; j <= level; ++j) {
    const int shift = level - j;
    auto it = supp_map_[j].find({ex >> shift, ey >> shift});
    if (it != supp_map_[j].end()) ids.insert(ids.end(), it->second.begin(), it->second.end());
  }
  return ids;
}

const KnotVector& HierarchicalSpace::comp_kv(int level, int comp, int dir) const {
  return stack_->level_c(level, rotated_).space(k_, comp, dir);
}

std::array<bool, 2> HierarchicalSpace::derived_flags(int comp) const {
  const TensorComplex& tc = stack_->level_c(0, rotated_);
  return {tc.derived(k_, comp, 0), tc.derived(k_, comp, 1)};
}

// ---------------------------------------------------------------------------
// free functions

std::vector<HierElem> hierarchical_bezier_mesh(const LevelStack& stack) {
  std::vector<HierElem> out;
  for (int l = 0; l < stack.num_levels(); ++l) {
    const BoolGrid oml = stack.omega_mask(l, l);
    const BoolGrid omn = stack.omega_mask(l + 1, l);
    for (int ey = 0; ey < oml.ny(); ++ey)
      for (int ex = 0; ex < oml.nx(); ++ex)
        if (oml.at(ex, ey) && !omn.at(ex, ey)) out.push_back({l, ex, ey});
  }
  return out;
}

std::array<long, 3> hierarchical_dims(const LevelStack& stack, bool rotated) {
  std::array<long, 3> out{};
  for (int k = 0; k <= 2; ++k) out[k] = HierarchicalSpace(stack, k, rotated, true).dim();
  return out;
}

std::vector<std::pair<int, int>> basis_subset(const LevelStack& stack, int k, int comp, int l,
                                              int lp, bool rotated, bool bc) {
  const TensorComplex& tc = stack.level_c(l, rotated);
  const KnotVector& a = tc.space(k, comp, 0);
  const KnotVector& b = tc.space(k, comp, 1);
  const auto r1 = universe_indices(tc, k, comp, 0, bc);
  const auto r2 = universe_indices(tc, k, comp, 1, bc);
  std::vector<std::pair<int, int>> out;
  for (int i2 : r2)
    for (int i1 : r1)
      if (stack.supp_in_omega(l, a, b, i1, i2, lp)) out.push_back({i1, i2});
  return out;
}

// ---------------------------------------------------------------------------
// exact machinery

namespace detail {

ExactFamily::ExactFamily(const LevelStack& stack) {
  const int nlev = stack.num_levels();
  kv.resize(nlev);
  kvd.resize(nlev);
  for (int dir = 0; dir < 2; ++dir) {
    kv[0][dir] = rat_knots(stack.kv(0, dir));
    for (int l = 1; l < nlev; ++l) kv[l][dir] = rat_dyadic_refine(kv[l - 1][dir]);
    for (int l = 0; l < nlev; ++l) kvd[l][dir] = rat_derivative(kv[l][dir]);
  }
}

namespace {

RatMat rat_identity(int m) {
  RatMat out(m, std::vector<Rat>(m, 0));
  for (int i = 0; i < m; ++i) out[i][i] = 1;
  return out;
}

RatMat rat_matmul(const RatMat& a, const RatMat& b) {
  const std::size_t rows = a.size(), mid = b.size(), cols = b.empty() ? 0 : b[0].size();
  RatMat out(rows, std::vector<Rat>(cols, 0));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < mid; ++j) {
      if (a[i][j] == 0) continue;
      for (std::size_t c = 0; c < cols; ++c)
        if (b[j][c] != 0) out[i][c] += a[i][j] * b[j][c];
    }
  return out;
}

RatMat level_twoscale(const ExactFamily& fam, int l, int dir, bool derived) {
  return derived ? rat_twoscale_cs(fam.kv[l][dir], fam.kv[l + 1][dir])
                 : rat_twoscale(fam.kv[l][dir], fam.kv[l + 1][dir]);
}

}  // namespace

RatMat exact_chain(const ExactFamily& fam, int l, int dir, bool derived) {
  const int nlev = static_cast<int>(fam.kv.size());
  RatMat m = rat_identity(fam.factor(l, dir, derived).dim());
  for (int j = l; j + 1 < nlev; ++j) m = rat_matmul(level_twoscale(fam, j, dir, derived), m);
  return m;
}

std::vector<RatVec> exact_embedding_cols(const HierarchicalSpace& w) {
  const LevelStack& stack = w.stack();
  const int k = w.k();
  const int nlev = stack.num_levels();
  const TensorComplex& fine = stack.level_c(nlev - 1, w.rotated());
  const int nc = fine.num_components(k);
  const ExactFamily fam(stack);

  // kept index window (lo, width) per finest component and direction
  std::vector<std::array<int, 2>> lo(nc), width(nc);
  std::vector<long> off(nc + 1, 0);
  for (int ci = 0; ci < nc; ++ci) {
    for (int dir = 0; dir < 2; ++dir) {
      const int m = fine.space(k, ci, dir).dim();
      const bool full = !w.bc() || fine.derived(k, ci, dir);
      lo[ci][dir] = full ? 0 : 1;
      width[ci][dir] = full ? m : m - 2;
    }
    off[ci + 1] = off[ci] + static_cast<long>(width[ci][0]) * width[ci][1];
  }

  std::map<std::array<int, 3>, RatMat> chains;
  auto chain = [&](int l, int dir, bool derived) -> const RatMat& {
    const std::array<int, 3> key{l, dir, derived ? 1 : 0};
    auto it = chains.find(key);
    if (it == chains.end()) it = chains.emplace(key, exact_chain(fam, l, dir, derived)).first;
    return it->second;
  };

  std::vector<RatVec> cols;
  cols.reserve(w.dim());
  for (const HierFunc& f : w.functions()) {
    const auto df = w.derived_flags(f.comp);
    const RatMat& c1 = chain(f.level, 0, df[0]);
    const RatMat& c2 = chain(f.level, 1, df[1]);
    RatVec col;
    for (int f2 = 0; f2 < static_cast<int>(c2.size()); ++f2) {
      if (c2[f2][f.i2] == 0) continue;
      for (int f1 = 0; f1 < static_cast<int>(c1.size()); ++f1) {
        if (c1[f1][f.i1] == 0) continue;
        const int j1 = f1 - lo[f.comp][0];
        const int j2 = f2 - lo[f.comp][1];
        if (j1 < 0 || j1 >= width[f.comp][0] || j2 < 0 || j2 >= width[f.comp][1])
          throw NumericalError(
              "embedding: active function has a nonzero coefficient on a boundary-removed "
              "finest-level function");
        col.emplace_back(off[f.comp] + static_cast<long>(j2) * width[f.comp][0] + j1,
                         c1[f1][f.i1] * c2[f2][f.i2]);
      }
    }
    cols.push_back(std::move(col));
  }
  return cols;
}

namespace {

struct StencilTerm {
  int ct;    // target component
  int dir;   // stencil direction
  int sign;  // wedge sign
};

std::vector<StencilTerm> d_terms(bool rotated, int k, int cs) {
  if (!rotated) {
    if (k == 0) return {{0, 0, +1}, {1, 1, +1}};
    return cs == 0 ? std::vector<StencilTerm>{{0, 1, -1}} : std::vector<StencilTerm>{{0, 0, +1}};
  }
  if (k == 0) return {{0, 1, +1}, {1, 0, -1}};
  return {{0, cs == 0 ? 0 : 1, +1}};
}

/// Expands level-l (k+1)-form tensor functions into the active basis of wk1.
class HierExpand {
 public:
  explicit HierExpand(const HierarchicalSpace& wk1)
      : w_(wk1), stack_(wk1.stack()), fam_(wk1.stack()) {}

  const RatVec& expand(int l, int ct, int i1, int i2) {
    const std::array<int, 4> key{l, ct, i1, i2};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    RatVec out;
    const long idx = w_.index_of(l, ct, i1, i2);
    if (idx >= 0) {
      out.emplace_back(idx, 1);
    } else {
      if (l + 1 >= stack_.num_levels())
        throw NumericalError(
            "hierarchical incidence: derivative leaves the span of the active basis");
      const auto df = w_.derived_flags(ct);
      const RatMat& r1 = twoscale(l, 0, df[0]);
      const RatMat& r2 = twoscale(l, 1, df[1]);
      for (int f1 = 0; f1 < static_cast<int>(r1.size()); ++f1) {
        if (r1[f1][i1] == 0) continue;
        for (int f2 = 0; f2 < static_cast<int>(r2.size()); ++f2) {
          if (r2[f2][i2] == 0) continue;
          axpy(out, r1[f1][i1] * r2[f2][i2], expand(l + 1, ct, f1, f2));
        }
      }
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

 private:
  const RatMat& twoscale(int l, int dir, bool derived) {
    const std::array<int, 3> key{l, dir, derived ? 1 : 0};
    auto it = ts_.find(key);
    if (it == ts_.end()) it = ts_.emplace(key, level_twoscale(fam_, l, dir, derived)).first;
    return it->second;
  }

  const HierarchicalSpace& w_;
  const LevelStack& stack_;
  ExactFamily fam_;
  std::map<std::array<int, 4>, RatVec> memo_;
  std::map<std::array<int, 3>, RatMat> ts_;
};

}  // namespace

std::vector<RatVec> exact_hierarchical_incidence_cols(const HierarchicalSpace& wk,
                                                      const HierarchicalSpace& wk1) {
  if (&wk.stack() != &wk1.stack() || wk1.k() != wk.k() + 1 || wk.rotated() != wk1.rotated() ||
      wk.bc() != wk1.bc())
    throw SpecError("hierarchical incidence: incompatible spaces");
  const LevelStack& stack = wk.stack();
  const int k = wk.k();
  HierExpand ex(wk1);

  std::vector<RatVec> cols;
  cols.reserve(wk.dim());
  for (const HierFunc& f : wk.functions()) {
    RatVec col;
    for (const StencilTerm& t : d_terms(wk.rotated(), k, f.comp)) {
      const int md = stack.level_c(f.level, wk.rotated()).space(k, f.comp, t.dir).dim() - 1;
      const int i = t.dir == 0 ? f.i1 : f.i2;
      const int j_other = t.dir == 0 ? f.i2 : f.i1;
      auto add = [&](int j, int coeff) {
        const int j1 = t.dir == 0 ? j : j_other;
        const int j2 = t.dir == 0 ? j_other : j;
        axpy(col, Rat(coeff), ex.expand(f.level, t.ct, j1, j2));
      };
      if (i - 1 >= 0) add(i - 1, +t.sign);
      if (i <= md - 1) add(i, -t.sign);
    }
    cols.push_back(std::move(col));
  }
  return cols;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// public wrappers over the exact machinery

namespace {

SpMat cols_to_spmat(const std::vector<detail::RatVec>& cols, long rows) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (const auto& [i, v] : cols[j])
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v.get_d());
  SpMat m(rows, static_cast<long>(cols.size()));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SpMat embedding_to_fine(const LevelStack& stack, int k, bool rotated) {
  if (k < 0 || k > 2) throw SpecError("embedding_to_fine: form degree out of range");
  const HierarchicalSpace w(stack, k, rotated, true);
  const auto cols = detail::exact_embedding_cols(w);
  const long rows = stack.level_c(stack.num_levels() - 1, rotated).dim(k, true);
  return cols_to_spmat(cols, rows);
}

SpMat hierarchical_incidence(const LevelStack& stack, int k, bool rotated) {
  if (k < 0 || k > 1) throw SpecError("hierarchical_incidence: form degree out of range");
  const HierarchicalSpace wk(stack, k, rotated, true);
  const HierarchicalSpace wk1(stack, k + 1, rotated, true);
  const auto cols = detail::exact_hierarchical_incidence_cols(wk, wk1);
  return cols_to_spmat(cols, wk1.dim());
}

bool hierarchical_dd_zero_exact(const LevelStack& stack, bool rotated) {
  const HierarchicalSpace w0(stack, 0, rotated, true);
  const HierarchicalSpace w1(stack, 1, rotated, true);
  const HierarchicalSpace w2(stack, 2, rotated, true);
  const auto d0 = detail::exact_hierarchical_incidence_cols(w0, w1);
  const auto d1 = detail::exact_hierarchical_incidence_cols(w1, w2);
  for (const detail::RatVec& c : d0) {
    detail::RatVec acc;
    for (const auto& [j, v] : c) detail::axpy(acc, v, d1[j]);
    if (!acc.empty()) return false;
  }
  return true;
}

}  // namespace sclab
