#include "sclab/tensor_complex.hpp"

#include <random>

#include "test_common.hpp"

using namespace sclab;

namespace {

TensorComplex make2d(int p1, int p2, int e1, int e2) {
  return TensorComplex({KnotVector::open_uniform(p1, e1), KnotVector::open_uniform(p2, e2)});
}

void test_multi_indices() {
  REQUIRE(multi_indices(2, 0).size() == 1u, "C(2,0)");
  REQUIRE(multi_indices(2, 1).size() == 2u, "C(2,1)");
  REQUIRE(multi_indices(2, 2).size() == 1u, "C(2,2)");
  REQUIRE(multi_indices(3, 2).size() == 3u, "C(3,2)");
  const auto a = multi_indices(3, 2);
  REQUIRE((a[0] == std::vector<int>{0, 1} && a[1] == std::vector<int>{0, 2} &&
           a[2] == std::vector<int>{1, 2}),
          "lexicographic order");
}

void test_component_structure() {
  const TensorComplex tc = make2d(3, 2, 5, 4);
  REQUIRE(tc.n() == 2, "n = 2");
  REQUIRE(tc.num_components(0) == 1 && tc.num_components(1) == 2 && tc.num_components(2) == 1,
          "component counts");
  // standard orientation: 1-form component 0 derives direction 0
  REQUIRE(tc.derived(1, 0, 0) && !tc.derived(1, 0, 1), "comp 0 = D x B");
  REQUIRE(!tc.derived(1, 1, 0) && tc.derived(1, 1, 1), "comp 1 = B x D");
  REQUIRE(tc.space(1, 0, 0).degree() == 2 && tc.space(1, 0, 1).degree() == 2,
          "degrees (p1-1, p2)");
  // dims: W0 = (e1+p1)(e2+p2), W2 = (e1+p1-1)(e2+p2-1)
  REQUIRE(tc.dim(0, false) == 8L * 6, "dim W0");
  REQUIRE(tc.dim(1, false) == 7L * 6 + 8L * 5, "dim W1");
  REQUIRE(tc.dim(2, false) == 7L * 5, "dim W2");
  // BC mask drops first/last of plain factors only
  REQUIRE(tc.dim(0, true) == 6L * 4, "dim W0 bc");
  REQUIRE(tc.dim(1, true) == 7L * 4 + 6L * 5, "dim W1 bc");
  REQUIRE(tc.dim(2, true) == 7L * 5, "dim W2 bc (no condition)");

  const TensorComplex rot = tc.rotated_copy();
  REQUIRE(rot.rotated(), "rotated flag");
  REQUIRE(!rot.derived(1, 0, 0) && rot.derived(1, 0, 1), "rotated comp 0 = B x D");
  REQUIRE(rot.dim(1, true) == 6L * 5 + 7L * 4, "rotated mask drops the other factor");
}

void test_dd_zero_and_grad_constant() {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> pd(1, 4), ed(1, 9);
  for (int t = 0; t < 12; ++t) {
    const TensorComplex tc = make2d(pd(rng), pd(rng), ed(rng), ed(rng));
    for (bool bc : {false, true}) {
      const IntSpMat d0 = incidence_matrix(tc, 0, bc);
      const IntSpMat d1 = incidence_matrix(tc, 1, bc);
      const IntSpMat dd = (d1 * d0).pruned();
      REQUIRE(dd.nonZeros() == 0, "d1 d0 = 0 exactly");
      if (!bc) {
        // the gradient of the constant-ones coefficient vector vanishes
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(d0.cols());
        Eigen::VectorXd g = d0.cast<double>() * ones;
        REQUIRE(g.lpNorm<Eigen::Infinity>() == 0.0, "grad of constant = 0");
      }
    }
  }
}

void test_exactness_random() {
  // rank-based cohomology (0, 0, 1) of the BC tensor complex
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> pd(1, 4), ed(2, 10);
  for (int t = 0; t < 8; ++t) {
    const TensorComplex tc = make2d(pd(rng), pd(rng), ed(rng), ed(rng));
    const IntSpMat d0 = incidence_matrix(tc, 0, true);
    const IntSpMat d1 = incidence_matrix(tc, 1, true);
    const long r0 = integer_rank_exact(d0), r1 = integer_rank_exact(d1);
    const long w0 = tc.dim(0, true), w1 = tc.dim(1, true), w2 = tc.dim(2, true);
    REQUIRE(w0 - r0 == 0, "h0 = 0");
    REQUIRE(w1 - r0 - r1 == 0, "h1 = 0");
    REQUIRE(w2 - r1 == 1, "h2 = 1");
  }
}

void test_greville_grid_bijection() {
  const TensorComplex tc = make2d(3, 4, 6, 5);
  const GrevilleGrid g = greville_grid(tc);
  REQUIRE(g.n == 2, "grid dimension");
  for (int k = 0; k <= 2; ++k)
    REQUIRE(g.total_entities(k) == tc.dim(k, false), "k-forms <-> k-entities");
  REQUIRE(static_cast<int>(g.vertex_sites[0].size()) == tc.base(0).dim(), "site counts");

  const DimensionReport rep = dimension_report(tc);
  REQUIRE(rep.pre_bc[0] == tc.dim(0, false) && rep.post_bc[1] == tc.dim(1, true),
          "dimension report");
}

void test_degenerate_guard() {
  // a degree-0 factor has no derivative space: rejected at construction
  REQUIRE_THROWS(TensorComplex({KnotVector::open_uniform(0, 3), KnotVector::open_uniform(1, 3)}),
                 SpecError, "degree-0 factor rejected");
}

void test_three_dimensional() {
  // the complex is dimension-generic: check dd = 0 along a 3D chain
  const TensorComplex tc({KnotVector::open_uniform(2, 3), KnotVector::open_uniform(2, 4),
                          KnotVector::open_uniform(1, 5)});
  REQUIRE(tc.num_components(1) == 3 && tc.num_components(2) == 3, "3D component counts");
  for (int k = 0; k + 1 < 3; ++k) {
    const IntSpMat a = incidence_matrix(tc, k, true);
    const IntSpMat b = incidence_matrix(tc, k + 1, true);
    const IntSpMat dd = (b * a).pruned();
    REQUIRE(dd.nonZeros() == 0, "3D dd = 0");
  }
}

}  // namespace

int main() {
  test_multi_indices();
  test_component_structure();
  test_dd_zero_and_grad_constant();
  test_exactness_random();
  test_greville_grid_bijection();
  test_degenerate_guard();
  test_three_dimensional();
  std::cout << "test_tensor_complex: all checks passed\n";
  return 0;
}
