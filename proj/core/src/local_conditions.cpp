#include "sclab/local_conditions.hpp"

#include <string>

namespace sclab {

SupportCheck check_assumption_support(const LevelStack& stack, int l) {
  if (l < 0 || l >= stack.num_levels())
    throw SpecError("check_assumption_support: level out of range");
  SupportCheck out;
  if (l + 1 >= stack.num_levels()) return out;  // Omega_{l+1} empty: vacuously a union
  const TensorComplex& tc = stack.level(l);
  const KnotVector& a = tc.dbase(0);
  const KnotVector& b = tc.dbase(1);
  const BoolGrid om = stack.omega_mask(l + 1, l);
  BoolGrid cover(om.nx(), om.ny(), false);
  for (int i2 = 0; i2 < b.dim(); ++i2)
    for (int i1 = 0; i1 < a.dim(); ++i1)
      if (stack.supp_in_omega(l, a, b, i1, i2, l + 1))
        for (int y : b.support_elements(i2))
          for (int x : a.support_elements(i1)) cover.set(x, y);
  for (int y = 0; y < om.ny(); ++y)
    for (int x = 0; x < om.nx(); ++x)
      if (om.at(x, y) && !cover.at(x, y)) {
        out.ok = false;
        out.uncovered = {{x, y}};
        return out;
      }
  return out;
}

OverlapRegion overlap(const LevelStack& stack, int l, int k, int comp, int i1, int i2) {
  if (l < 0 || l >= stack.num_levels()) throw SpecError("overlap: level out of range");
  const TensorComplex& tc = stack.level(l);
  const KnotVector& a = tc.space(k, comp, 0);
  const KnotVector& b = tc.space(k, comp, 1);
  if (i1 < 0 || i1 >= a.dim() || i2 < 0 || i2 >= b.dim())
    throw SpecError("overlap: basis index out of range");
  OverlapRegion out;
  out.level = l;
  out.k = k;
  out.comp = comp;
  out.i1 = i1;
  out.i2 = i2;
  const BoolGrid om = stack.omega_mask(l + 1, l);
  out.cells = BoolGrid(om.nx(), om.ny(), false);
  for (int y : b.support_elements(i2))
    for (int x : a.support_elements(i1))
      if (!om.at(x, y)) out.cells.set(x, y);
  out.topology = region_topology(out.cells);
  return out;
}

OverlapCheck check_assumption_overlap(const LevelStack& stack, int l, bool include_boundary) {
  if (l < 0 || l >= stack.num_levels())
    throw SpecError("check_assumption_overlap: level out of range");
  OverlapCheck out;
  const TensorComplex& tc = stack.level(l);
  for (int k = 0; k <= 2; ++k) {
    for (int ci = 0; ci < tc.num_components(k); ++ci) {
      std::vector<int> r1, r2;
      if (include_boundary) {
        for (int i = 0; i < tc.space(k, ci, 0).dim(); ++i) r1.push_back(i);
        for (int i = 0; i < tc.space(k, ci, 1).dim(); ++i) r2.push_back(i);
      } else {
        r1 = tc.bc_kept(k, ci, 0);
        r2 = tc.bc_kept(k, ci, 1);
      }
      for (int i2 : r2)
        for (int i1 : r1) {
          OverlapRegion region = overlap(stack, l, k, ci, i1, i2);
          if (!region.cells.any()) continue;
          if (region.topology.components != 1 || region.topology.holes != 0) {
            out.ok = false;
            out.violations.push_back(std::move(region));
          }
        }
    }
  }
  return out;
}

ExtendedSupport extended_support(const LevelStack& stack, int l, int ex, int ey) {
  if (l < 0 || l >= stack.num_levels())
    throw SpecError("extended_support: level out of range");
  const TensorComplex& tc = stack.level(l);
  const KnotVector& a = tc.base(0);
  const KnotVector& b = tc.base(1);
  if (ex < 0 || ex >= a.num_elements() || ey < 0 || ey >= b.num_elements())
    throw SpecError("extended_support: element (" + std::to_string(ex) + ", " +
                    std::to_string(ey) + ") outside mesh");

  auto touching = [](const KnotVector& kv, int e) {
    std::vector<int> out;
    for (int i = 0; i < kv.dim(); ++i) {
      const auto sup = kv.support_elements(i);
      for (int s : sup)
        if (s == e) {
          out.push_back(i);
          break;
        }
    }
    return out;
  };

  ExtendedSupport out;
  out.elements = BoolGrid(a.num_elements(), b.num_elements(), false);
  for (int i2 : touching(b, ey))
    for (int i1 : touching(a, ex))
      for (int y : b.support_elements(i2))
        for (int x : a.support_elements(i1)) out.elements.set(x, y);

  const KnotVector& ad = tc.dbase(0);
  const KnotVector& bd = tc.dbase(1);
  out.greville_cells = BoolGrid(ad.dim(), bd.dim(), false);
  for (int i2 : touching(bd, ey))
    for (int i1 : touching(ad, ex)) out.greville_cells.set(i1, i2);

  out.greville_cells_ext = BoolGrid(ad.dim(), bd.dim(), false);
  for (int y = 0; y < bd.dim(); ++y)
    for (int x = 0; x < ad.dim(); ++x)
      if (out.greville_cells.at(x, y))
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int tx = x + dx, ty = y + dy;
            if (tx >= 0 && tx < ad.dim() && ty >= 0 && ty < bd.dim())
              out.greville_cells_ext.set(tx, ty);
          }
  return out;
}

}  // namespace sclab
