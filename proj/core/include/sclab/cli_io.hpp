#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sclab/geometry_assembly.hpp"
#include "sclab/hierarchy.hpp"

namespace sclab {

struct GeometrySpec {
  std::string type = "identity";  // "identity", "scaling" or "control_net"
  std::array<double, 2> factors{1.0, 1.0};
  std::array<int, 2> degrees{1, 1};
  std::array<int, 2> shape{0, 0};  // control points per direction
  std::vector<std::array<double, 2>> points;

  friend bool operator==(const GeometrySpec&, const GeometrySpec&) = default;
};

/// One refinement step: Omega_{l+1} as parent-level elements, either listed
/// directly or as the union of supports of parent-level 2-form functions.
struct LevelSpec {
  bool support_union = false;
  std::vector<std::array<int, 2>> refined_elements;
  std::vector<long> support_union_of;

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

struct MeshSpec {
  std::array<int, 2> degrees{3, 3};
  std::array<int, 2> base_elements{8, 8};
  bool max_continuity = true;
  std::array<std::vector<int>, 2> continuity;  // per interior breakpoint
  GeometrySpec geometry;
  std::vector<LevelSpec> levels;

  friend bool operator==(const MeshSpec&, const MeshSpec&) = default;
};

MeshSpec parse_mesh_spec(const std::string& text);
MeshSpec load_mesh_spec(const std::string& path);

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
std::string serialize_mesh_spec(const MeshSpec& spec);

/// FNV-1a (64 bit) of the canonical serialization.
std::uint64_t spec_hash(const MeshSpec& spec);
std::string spec_hash_hex(const MeshSpec& spec);

LevelStack build_stack(const MeshSpec& spec);
GeometryMap build_geometry(const MeshSpec& spec);

struct SolveOptions {
  std::string problem;   // maxwell | maxwell-mixed1 | maxwell-mixed2 | infsup
  int nev = 10;          // eigenvalues reported (<= 0 reports all)
  double tol = -1;       // zero-count threshold override
  std::string dump_dir;  // MatrixMarket dump directory ("" disables)
  std::string csv_path;  // spectrum CSV path ("" disables)
  std::optional<long> seed;
  int gauss_n = 0;
};

/// Exit codes: 0 exact / success, 1 non-exact, 2 usage or schema error,
/// 3 numerical failure.  The cmd_* functions write a JSON report to `out`.
int cmd_check(const MeshSpec& spec, std::ostream& out, const std::string& dump_dir = "");
int cmd_solve(const MeshSpec& spec, const SolveOptions& opts, std::ostream& out);
int cmd_info(const MeshSpec& spec, std::ostream& out);

int run_cli(int argc, const char* const* argv);

/// MatrixMarket coordinate (sparse) / array (dense vector) exports, "\n" line
/// endings, 1-based indices.
void write_matrix_market(const std::string& path, const SpMat& m);
void write_matrix_market(const std::string& path, const Eigen::VectorXd& v);

/// Two-column CSV "index,lambda".
void write_csv_spectrum(const std::string& path, const Eigen::VectorXd& values);

}  // namespace sclab
