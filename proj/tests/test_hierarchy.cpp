#include "sclab/hierarchy.hpp"

#include <random>

#include "sclab/tensor_complex.hpp"
#include "test_common.hpp"

using namespace sclab;

namespace {

BoolGrid blocks_mask(int nx, int ny, const std::vector<std::array<int, 4>>& blocks) {
  BoolGrid m(nx, ny);
  for (const auto& [x0, y0, w, h] : blocks)
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) m.set(x, y);
  return m;
}

LevelStack counterexample_stack() {
  return LevelStack({3, 3}, {9, 9},
                    {blocks_mask(9, 9, {{1, 1, 4, 4}, {3, 3, 4, 4}})});
}

LevelStack smoke_stack() {
  return LevelStack({2, 2}, {4, 4}, {blocks_mask(4, 4, {{0, 0, 2, 2}})});
}

/// Value of an active hierarchical basis function at a parametric point.
double eval_hier(const HierarchicalSpace& w, const HierFunc& f, double x, double y) {
  const auto df = w.derived_flags(f.comp);
  const LevelStack& st = w.stack();
  double v = 1.0;
  for (int dir = 0; dir < 2; ++dir) {
    const int i = dir == 0 ? f.i1 : f.i2;
    const double t = dir == 0 ? x : y;
    const bool derived = dir == 0 ? df[0] : df[1];
    const KnotVector& plain = st.level(f.level).base(dir);
    if (derived)
      v *= evaluate_curry_schoenberg(plain, t)[i];
    else
      v *= plain.evaluate_basis(t)[i];
  }
  return v;
}

void test_level_stack_basics() {
  const LevelStack st = smoke_stack();
  REQUIRE(st.num_levels() == 2, "levels");
  REQUIRE(st.elements(1)[0] == 8, "dyadic element count");
  REQUIRE(st.omega_mask(0, 0).count() == 16, "Omega_0 is everything");
  REQUIRE(st.omega_mask(1, 0).count() == 4, "Omega_1 mask on coarse mesh");
  REQUIRE(st.omega_mask(1, 1).count() == 16, "Omega_1 mask refined");
  REQUIRE(st.omega_mask(2, 1).count() == 0, "Omega_N empty");

  // non-nested refinement rejected
  BoolGrid bad0 = blocks_mask(4, 4, {{2, 2, 2, 2}});
  BoolGrid bad1 = BoolGrid(8, 8, true);  // Omega_2 = everything > Omega_1
  REQUIRE_THROWS(LevelStack({2, 2}, {4, 4}, {bad0, bad1}), SpecError,
                 "non-nested subdomains rejected");
}

void test_counterexample_dims() {
  const LevelStack st = counterexample_stack();
  const auto dims = hierarchical_dims(st);
  REQUIRE(dims[0] == 147, "dim W0 = 147");
  REQUIRE(dims[1] == 328, "dim W1 = 328");
  REQUIRE(dims[2] == 181, "dim W2 = 181");
  REQUIRE(dims[0] + dims[2] != dims[1] + 1, "dimension identity fails");
}

void test_full_and_empty_refinement() {
  // Omega_1 = whole domain: hierarchical space == level-1 tensor space
  const LevelStack full({3, 2}, {3, 4}, {BoolGrid(3, 4, true)});
  const TensorComplex fine(
      {KnotVector::open_uniform(3, 3).dyadic_refine(), KnotVector::open_uniform(2, 4).dyadic_refine()});
  for (int k = 0; k <= 2; ++k) {
    const HierarchicalSpace w(full, k);
    REQUIRE(w.dim() == fine.dim(k, true), "full refinement = fine tensor dims");
    for (const auto& f : w.functions()) REQUIRE(f.level == 1, "all functions on level 1");
  }
  // Omega_1 empty: single-level behaviour
  const LevelStack none({3, 2}, {3, 4}, {BoolGrid(3, 4, false)});
  const TensorComplex coarse(
      {KnotVector::open_uniform(3, 3), KnotVector::open_uniform(2, 4)});
  for (int k = 0; k <= 2; ++k)
    REQUIRE(HierarchicalSpace(none, k).dim() == coarse.dim(k, true),
            "empty refinement = coarse tensor dims");
}

void test_active_counts_vs_subsets() {
  const LevelStack st = counterexample_stack();
  for (int k = 0; k <= 2; ++k) {
    const HierarchicalSpace w(st, k);
    long total = 0;
    for (int l = 0; l < st.num_levels(); ++l)
      for (int c = 0; c < w.num_components(); ++c) {
        const long in_l = basis_subset(st, k, c, l, l).size();
        const long in_next = basis_subset(st, k, c, l, l + 1).size();
        REQUIRE(static_cast<long>(w.active(l, c).size()) == in_l - in_next,
                "Kraft count = |in Omega_l| - |in Omega_{l+1}|");
        total += in_l - in_next;
      }
    REQUIRE(total == w.dim(), "dims add up");
  }
}

void test_contributing_bruteforce() {
  const LevelStack st = smoke_stack();
  const HierarchicalSpace w(st, 1, /*rotated=*/true);
  const auto elems = hierarchical_bezier_mesh(st);
  REQUIRE(!elems.empty(), "bezier mesh nonempty");
  for (const auto& el : elems) {
    const auto got = w.contributing(el.level, el.ex, el.ey);
    // brute force: evaluate every active function at the element midpoint
    const auto& bx = st.kv(el.level, 0).breakpoints();
    const auto& by = st.kv(el.level, 1).breakpoints();
    const double mx = 0.5 * (bx[el.ex] + bx[el.ex + 1]);
    const double my = 0.5 * (by[el.ey] + by[el.ey + 1]);
    std::vector<long> expect;
    for (long id = 0; id < w.dim(); ++id)
      if (std::abs(eval_hier(w, w.functions()[id], mx, my)) > 1e-14) expect.push_back(id);
    REQUIRE(got == expect, "contributing = functions alive on the element");
  }
}

void test_dd_zero_exact() {
  const std::vector<LevelStack> corpus = [] {
    std::vector<LevelStack> v;
    v.push_back(smoke_stack());
    v.push_back(counterexample_stack());
    v.emplace_back(std::array<int, 2>{4, 4}, std::array<int, 2>{6, 6},
                   std::vector<BoolGrid>{blocks_mask(6, 6, {{0, 0, 3, 3}, {2, 2, 3, 3}}),
                                         blocks_mask(12, 12, {{2, 2, 4, 4}})});
    return v;
  }();
  for (const auto& st : corpus)
    for (bool rot : {false, true})
      REQUIRE(hierarchical_dd_zero_exact(st, rot), "d o d = 0 exactly");
}

void test_embedding_reproduces_values() {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const LevelStack st({3, 3}, {5, 5},
                      {blocks_mask(5, 5, {{0, 0, 3, 3}, {2, 2, 3, 3}})});
  const int nl = st.num_levels();
  const TensorComplex fine_std(
      {st.kv(nl - 1, 0), st.kv(nl - 1, 1)});
  const LevelStack fine_stack(st.kv(nl - 1, 0), st.kv(nl - 1, 1), {});
  for (bool rot : {false, true}) {
    const TensorComplex fine = rot ? fine_std.rotated_copy() : fine_std;
    for (int k = 0; k <= 2; ++k) {
      const HierarchicalSpace w(st, k, rot);
      const SpMat e = embedding_to_fine(st, k, rot);
      REQUIRE(e.cols() == w.dim(), "one column per active function");
      const auto kept = fine.kept_flat(k);
      REQUIRE(e.rows() == static_cast<long>(kept.size()), "rows = masked fine basis");

      // decode a masked-fine row into (comp, i1, i2)
      const HierarchicalSpace wf(fine_stack, k, rot);
      REQUIRE(wf.dim() == e.rows(), "single-level space matches masked basis");

      const Eigen::MatrixXd ed(e);
      for (long col : {0L, w.dim() / 2, w.dim() - 1}) {
        const HierFunc& f = w.functions()[col];
        for (int t = 0; t < 12; ++t) {
          const double x = unif(rng), y = unif(rng);
          double expansion = 0;
          for (long r = 0; r < e.rows(); ++r) {
            if (ed(r, col) == 0) continue;
            expansion += ed(r, col) * eval_hier(wf, wf.functions()[r], x, y);
          }
          REQUIRE_NEAR(expansion, eval_hier(w, f, x, y), 1e-12,
                       "embedding column reproduces the hierarchical function");
        }
      }
    }
  }
}

void test_incidence_commutes_with_embedding() {
  const std::vector<LevelStack> corpus = [] {
    std::vector<LevelStack> v;
    v.push_back(smoke_stack());
    v.push_back(counterexample_stack());
    return v;
  }();
  for (const auto& st : corpus) {
    const int nl = st.num_levels();
    const TensorComplex fine_std({st.kv(nl - 1, 0), st.kv(nl - 1, 1)});
    for (bool rot : {false, true}) {
      const TensorComplex fine = rot ? fine_std.rotated_copy() : fine_std;
      for (int k = 0; k <= 1; ++k) {
        const SpMat dh = hierarchical_incidence(st, k, rot);
        const SpMat ek = embedding_to_fine(st, k, rot);
        const SpMat ek1 = embedding_to_fine(st, k + 1, rot);
        const SpMat dfine = incidence_matrix(fine, k, true).cast<double>();
        const Eigen::MatrixXd lhs = Eigen::MatrixXd(ek1 * dh);
        const Eigen::MatrixXd rhs = Eigen::MatrixXd(dfine * ek);
        REQUIRE((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-12,
                "E d_H = d_fine E (commutation)");
      }
    }
  }
}

void test_error_paths() {
  const LevelStack st = smoke_stack();
  REQUIRE_THROWS(embedding_to_fine(st, 3), SpecError, "k out of range");
  REQUIRE_THROWS(hierarchical_incidence(st, 2), SpecError, "no d^2 in 2D");
  const HierarchicalSpace w(st, 0);
  REQUIRE(w.index_of(0, 0, 0, 0) == -1, "boundary function is not active");
}

}  // namespace

int main() {
  test_level_stack_basics();
  test_counterexample_dims();
  test_full_and_empty_refinement();
  test_active_counts_vs_subsets();
  test_contributing_bruteforce();
  test_dd_zero_exact();
  test_embedding_reproduces_values();
  test_incidence_commutes_with_embedding();
  test_error_paths();
  std::cout << "test_hierarchy: all checks passed\n";
  return 0;
}
