// Acceptance gate: one pass/fail line per criterion, exit 1 when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "sclab/cli_io.hpp"
#include "sclab/geometry_assembly.hpp"
#include "sclab/greville_topology.hpp"
#include "sclab/hierarchy.hpp"
#include "sclab/local_conditions.hpp"
#include "sclab/solvers.hpp"
#include "sclab/tensor_complex.hpp"
#include "sclab/univariate.hpp"

using namespace sclab;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void check(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

std::string fixture(const std::string& name) { return "fixtures/" + name; }

BoolGrid blocks_mask(int nx, int ny, const std::vector<std::array<int, 4>>& blocks) {
  BoolGrid m(nx, ny);
  for (const auto& [x0, y0, w, h] : blocks)
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) m.set(x, y);
  return m;
}

// ---------------------------------------------------------------------------
// 1. d d = 0 in exact arithmetic over a corpus of hierarchical meshes
//    (degrees <= 4, base meshes <= 16x16, up to 4 levels), both orientations,
//    within 60 s.
Outcome criterion_dd_zero() {
  Outcome out;
  std::vector<std::pair<std::string, LevelStack>> corpus;
  corpus.emplace_back("p1-4level",
                      LevelStack({1, 1}, {2, 2},
                                 {blocks_mask(2, 2, {{0, 0, 2, 1}, {0, 1, 1, 1}}),
                                  blocks_mask(4, 4, {{0, 0, 2, 2}}),
                                  blocks_mask(8, 8, {{0, 0, 2, 2}})}));
  corpus.emplace_back("p23-2level",
                      LevelStack({2, 3}, {6, 4}, {blocks_mask(6, 4, {{1, 1, 3, 2}})}));
  corpus.emplace_back("p4-uniform16", LevelStack({4, 4}, {16, 16}, {}));
  corpus.emplace_back("p4-2level",
                      LevelStack({4, 4}, {8, 8}, {blocks_mask(8, 8, {{2, 2, 4, 4}})}));
  corpus.emplace_back("p2-3level",
                      LevelStack({2, 2}, {8, 8},
                                 {blocks_mask(8, 8, {{0, 0, 4, 4}, {2, 2, 4, 4}}),
                                  blocks_mask(16, 16, {{2, 2, 4, 4}})}));
  corpus.emplace_back("counterexample",
                      build_stack(load_mesh_spec(fixture("counterexample.json"))));

  for (const auto& [name, st] : corpus) {
    for (bool rot : {false, true}) {
      if (!hierarchical_dd_zero_exact(st, rot))
        out.fail(name + (rot ? " (rotated)" : "") + ": hierarchical d d != 0");
      for (int l = 0; l < st.num_levels(); ++l) {
        const TensorComplex& tc = st.level_c(l, rot);
        const IntSpMat dd =
            IntSpMat(incidence_matrix(tc, 1, true) * incidence_matrix(tc, 0, true));
        for (int c = 0; c < dd.outerSize(); ++c)
          for (IntSpMat::InnerIterator it(dd, c); it; ++it)
            if (it.value() != 0) out.fail(name + ": tensor d d != 0 at level " + std::to_string(l));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2. Rank-based cohomology (0, 0, 1) for the boundary-condition tensor
//    complex on 20 random configurations, within 120 s.
Outcome criterion_random_tensor_cohomology() {
  Outcome out;
  std::mt19937 rng(7321);
  for (int trial = 0; trial < 20; ++trial) {
    const int p1 = 1 + static_cast<int>(rng() % 4), p2 = 1 + static_cast<int>(rng() % 4);
    const int e1 = 2 + static_cast<int>(rng() % 15), e2 = 2 + static_cast<int>(rng() % 15);
    const LevelStack st({p1, p2}, {e1, e2}, {});
    const ExactnessReport rep = exactness_check(st);
    std::ostringstream id;
    id << "p=(" << p1 << "," << p2 << ") e=(" << e1 << "," << e2 << ")";
    out.check(rep.cohomology.rank_method == "exact", id.str() + ": rank not exact");
    out.check(rep.cohomology.h == std::array<long, 3>{0, 0, 1},
              id.str() + ": cohomology != (0, 0, 1)");
    out.check(rep.exact, id.str() + ": not exact");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 3. The two-block counterexample: dimensions exactly (147, 328, 181) and a
//    non-exact verdict.
Outcome criterion_counterexample() {
  Outcome out;
  const LevelStack st = build_stack(load_mesh_spec(fixture("counterexample.json")));
  const auto dims = hierarchical_dims(st);
  if (dims != std::array<long, 3>{147, 328, 181}) {
    std::ostringstream ss;
    ss << "dims (" << dims[0] << ", " << dims[1] << ", " << dims[2]
       << ") != (147, 328, 181)";
    out.fail(ss.str());
  }
  const ExactnessReport rep = exactness_check(st);
  out.check(!rep.exact, "counterexample not flagged non-exact");
  out.check(rep.cohomology.h == std::array<long, 3>{0, 1, 1}, "cohomology != (0, 1, 1)");
  out.check(rep.cohomology.rank_method == "exact", "rank not exact");
  return out;
}

// ---------------------------------------------------------------------------
// 4. The six-fixture table: assumption rows, exactness row and the harmonic
//    counts of both mixed formulations.
Outcome criterion_fixture_table() {
  Outcome out;
  struct Row {
    const char* name;
    bool a1, a2, exact;
    int mf1_zeros, mf2_zeros;
  };
  const std::vector<Row> rows = {
      {"maxwell_3lines.json", false, false, false, 0, 1},
      {"maxwell_bulge.json", false, false, true, 0, 0},
      {"maxwell_diag1.json", true, false, true, 0, 0},
      {"maxwell_diag2.json", true, false, false, 4, 0},
      {"maxwell_diag3.json", true, false, false, 6, 0},
      {"maxwell_diag4.json", true, true, true, 0, 0},
  };
  const GeometryMap geom = GeometryMap::scaling(kPi, kPi);
  for (const auto& r : rows) {
    const LevelStack st = build_stack(load_mesh_spec(fixture(r.name)));
    const std::string id = r.name;
    out.check(check_assumption_support(st, 0).ok == r.a1, id + ": assumption-support row");
    out.check(check_assumption_overlap(st, 0).ok == r.a2, id + ": assumption-overlap row");
    out.check(exactness_check(st).exact == r.exact, id + ": exactness row");
    const EigResult m1 = maxwell_mixed_1(st, geom);
    if (m1.zero_count != r.mf1_zeros)
      out.fail(id + ": mixed-1 zeros " + std::to_string(m1.zero_count) + " != " +
               std::to_string(r.mf1_zeros));
    const EigResult m2 = maxwell_mixed_2(st, geom);
    if (m2.zero_count != r.mf2_zeros)
      out.fail(id + ": mixed-2 zeros " + std::to_string(m2.zero_count) + " != " +
               std::to_string(r.mf2_zeros));
    out.check(m1.max_residual < 1e-8 && m2.max_residual < 1e-8, id + ": eigensolve residual");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 5. Maxwell cavity on (0, pi)^2, p = 4, 16x16: the first ten nonzero
//    eigenvalues match (1, 1, 2, 4, 4, 5, 5, 8, 9, 9) to 1e-6 relative and
//    the first fifty reproduce the analytic multiplicities, within 5 min.
Outcome criterion_cavity_spectrum() {
  Outcome out;
  const LevelStack st({4, 4}, {16, 16}, {});
  const EigResult r = maxwell_primal(st, GeometryMap::scaling(kPi, kPi));
  out.check(r.zero_count == 324, "kernel dimension != 324");
  out.check(r.max_residual < 1e-8, "eigensolve residual");
  const std::vector<double> analytic = analytic_square_spectrum(50);
  for (int i = 0; i < 50; ++i) {
    const double lam = r.values[r.zero_count + i];
    const double ref = analytic[static_cast<std::size_t>(i)];
    const double rel = std::abs(lam - ref) / ref;
    if (i < 10 && rel > 1e-6)
      out.fail("eigenvalue " + std::to_string(i) + " off by " + std::to_string(rel));
    // multiplicity structure: every value rounds to its analytic integer
    if (std::llround(lam) != std::llround(ref))
      out.fail("multiplicity mismatch at eigenvalue " + std::to_string(i));
  }
  const Eigen::VectorXd window = r.values.head(r.zero_count + 50);
  out.check(detect_spurious(window, analytic).empty(), "spurious eigenvalues detected");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Stokes inf-sup constants of the five mesh families, each within 5 min.
Outcome criterion_infsup_values() {
  Outcome out;
  struct Target {
    const char* name;
    double beta, tol;
  };
  const std::vector<Target> targets = {
      {"stokes_uniform.json", 0.40996, 1e-3}, {"stokes_diag_k1.json", 0.40963, 1e-3},
      {"stokes_diag_k2.json", 0.40963, 1e-3}, {"stokes_diag_k3.json", 0.40963, 1e-3},
      {"stokes_4level.json", 0.22467, 5e-3},  {"stokes_graded.json", 0.40935, 1e-3},
  };
  for (const auto& t : targets) {
    const auto t0 = std::chrono::steady_clock::now();
    const LevelStack st = build_stack(load_mesh_spec(fixture(t.name)));
    const InfSupResult r = infsup_constant(assemble_stokes(st, GeometryMap::identity()));
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (std::abs(r.beta - t.beta) > t.tol) {
      std::ostringstream ss;
      ss << t.name << ": beta " << r.beta << " not within " << t.tol << " of " << t.beta;
      out.fail(ss.str());
    }
    if (sec > 300) out.fail(std::string(t.name) + ": over the 5 min per-mesh budget");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 7. 30 random support-union meshes that pass the overlap screening are all
//    exact, 30 engineered diagonal-overlap meshes all fail it and are all
//    non-exact, and over the whole batch every topology mismatch coincides
//    with a non-exact verdict.
Outcome criterion_mesh_batch() {
  Outcome out;
  int mismatch_and_exact = 0, checked = 0;

  auto audit = [&](const LevelStack& st, bool expect_exact, const std::string& id) {
    const ExactnessReport rep = exactness_check(st);
    ++checked;
    if (rep.exact != expect_exact)
      out.fail(id + (expect_exact ? ": expected exact" : ": expected non-exact"));
    if (!rep.topology_ok && rep.exact) ++mismatch_and_exact;
    out.check(rep.cohomology.rank_method == "exact", id + ": rank not exact");
  };

  // random support-union meshes, screened by the overlap assumption
  std::mt19937 rng(1142);
  int accepted = 0, attempts = 0;
  while (accepted < 30 && attempts < 500) {
    ++attempts;
    MeshSpec spec;
    const int p = 2 + static_cast<int>(rng() % 2);
    const int e = 6 + static_cast<int>(rng() % 5);
    spec.degrees = {p, p};
    spec.base_elements = {e, e};
    LevelSpec ls;
    ls.support_union = true;
    const long m = e + p - 1;
    const int nblk = 1 + static_cast<int>(rng() % 3);
    for (int b = 0; b < nblk; ++b) {
      const long i1 = static_cast<long>(rng() % m), i2 = static_cast<long>(rng() % m);
      ls.support_union_of.push_back(i2 * m + i1);
    }
    spec.levels.push_back(ls);
    const LevelStack st = build_stack(spec);
    if (!check_assumption_support(st, 0).ok) {
      out.fail("support-union mesh violates the support assumption");
      continue;
    }
    if (!check_assumption_overlap(st, 0).ok) continue;  // screened out
    ++accepted;
    audit(st, true, "random mesh " + std::to_string(accepted));
  }
  out.check(accepted == 30, "only " + std::to_string(accepted) + "/30 random meshes accepted");

  // engineered diagonal-overlap meshes around the counterexample pattern
  int built = 0;
  for (int e = 9; e <= 16 && built < 30; ++e)
    for (int a = 0; a + 6 <= e && built < 30; ++a) {
      const LevelStack st({3, 3}, {e, e},
                          {blocks_mask(e, e, {{a, a, 4, 4}, {a + 2, a + 2, 4, 4}})});
      std::ostringstream id;
      id << "engineered mesh " << e << "x" << e << "+" << a;
      if (check_assumption_overlap(st, 0).ok) out.fail(id.str() + ": overlap check passed");
      audit(st, false, id.str());
      ++built;
    }
  out.check(built == 30, "engineered family incomplete");
  out.check(mismatch_and_exact == 0,
            std::to_string(mismatch_and_exact) + " meshes mismatch topology yet are exact");
  out.check(checked == 60, "batch incomplete");
  return out;
}

// ---------------------------------------------------------------------------
// 8. Numerical hygiene: basis derivatives against finite differences, the
//    partition of unity, mass SPD-ness and the eigensolve backward error.
Outcome criterion_hygiene() {
  Outcome out;

  for (int p = 1; p <= 4; ++p) {
    const KnotVector kv = KnotVector::open_uniform(p, 8);
    double worst = 0, worst_pou = 0;
    for (int s = 0; s < 400; ++s) {
      // stay off the breakpoints, where one-sided derivatives are reported
      const double x = (s + 0.5) / 400.0;
      std::vector<double> v, d, vm, vp;
      kv.evaluate_basis_der(x, v, d);
      const double h = 1e-6;
      vm = kv.evaluate_basis(x - h);
      vp = kv.evaluate_basis(x + h);
      double sum = 0;
      for (int i = 0; i < kv.dim(); ++i) {
        worst = std::max(worst, std::abs(d[i] - (vp[i] - vm[i]) / (2 * h)));
        sum += v[i];
      }
      worst_pou = std::max(worst_pou, std::abs(sum - 1.0));
    }
    if (worst > 1e-6)
      out.fail("p=" + std::to_string(p) + ": derivative FD error " + std::to_string(worst));
    if (worst_pou > 1e-13)
      out.fail("p=" + std::to_string(p) + ": partition of unity off by " +
               std::to_string(worst_pou));
  }

  const LevelStack ce = build_stack(load_mesh_spec(fixture("counterexample.json")));
  for (int k = 0; k <= 2; ++k) {
    const HierarchicalSpace w(ce, k);
    const SpMat m = assemble_mass(w, GeometryMap::identity());
    Eigen::SimplicialLLT<SpMat> llt(m);
    if (llt.info() != Eigen::Success) out.fail("mass k=" + std::to_string(k) + " not SPD");
  }

  const LevelStack uni({2, 2}, {8, 8}, {});
  const EigResult r = maxwell_primal(uni, GeometryMap::scaling(kPi, kPi));
  out.check(r.max_residual < 1e-8,
            "eigensolve backward error " + std::to_string(r.max_residual));
  return out;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  struct Entry {
    const char* name;
    double limit;  // seconds, 0 = unlimited
    Outcome (*run)();
  };

  int failures = 0;
  int index = 0;
  auto report = [&](const char* name, double limit, const Outcome& out, double sec) {
    ++index;
    bool pass = out.pass;
    std::string detail = out.detail;
    if (limit > 0 && sec > limit) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "exceeded " + std::to_string(static_cast<int>(limit)) + " s budget";
    }
    std::printf("[%s] criterion %d/8: %s (%.1fs)\n", pass ? "PASS" : "FAIL", index, name, sec);
    if (!pass) {
      std::printf("       %s\n", detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  };

  const std::vector<Entry> entries = {
      {"d d = 0 in exact arithmetic over the mesh corpus", 60, criterion_dd_zero},
      {"random tensor complexes have cohomology (0, 0, 1)", 120,
       criterion_random_tensor_cohomology},
      {"counterexample dimensions (147, 328, 181) and non-exactness", 0,
       criterion_counterexample},
      {"six-fixture assumption/exactness/harmonic table", 0, criterion_fixture_table},
      {"cavity spectrum on (0, pi)^2: values and multiplicities", 300,
       criterion_cavity_spectrum},
      {"inf-sup constants of the Stokes mesh families", 0, criterion_infsup_values},
      {"mesh batch: screening, exactness and topology consistency", 0, criterion_mesh_batch},
      {"numerical hygiene: derivatives, unity, SPD, backward error", 0, criterion_hygiene},
  };

  for (const auto& e : entries) {
    const auto t0 = Clock::now();
    const Outcome out = e.run();
    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    report(e.name, e.limit, out, sec);
  }

  if (failures == 0) {
    std::printf("acceptance: all 8 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria failed\n", failures);
  return 1;
}
