#include "sclab/cli_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sclab/greville_topology.hpp"
#include "sclab/local_conditions.hpp"
#include "sclab/solvers.hpp"

namespace sclab {

using nlohmann::json;  // std::map-backed: keys serialize sorted

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& why) {
  throw SpecError("mesh spec: field '" + field + "': " + why);
}

std::array<int, 2> int_pair(const json& j, const std::string& field, int lo) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    schema_error(field, "expected an array of two integers");
  const std::array<int, 2> v{j[0].get<int>(), j[1].get<int>()};
  if (v[0] < lo || v[1] < lo)
    schema_error(field, "entries must be >= " + std::to_string(lo));
  return v;
}

GeometrySpec parse_geometry(const json& j) {
  GeometrySpec g;
  if (j.is_string()) {
    g.type = j.get<std::string>();
    if (g.type != "identity") schema_error("geometry", "unknown geometry '" + g.type + "'");
    return g;
  }
  if (!j.is_object()) schema_error("geometry", "expected a string or an object");
  if (!j.contains("type") || !j["type"].is_string())
    schema_error("geometry.type", "expected a string");
  g.type = j["type"].get<std::string>();
  if (g.type == "identity") return g;
  if (g.type == "scaling") {
    const auto& f = j.value("factors", json());
    if (!f.is_array() || f.size() != 2 || !f[0].is_number() || !f[1].is_number())
      schema_error("geometry.factors", "expected an array of two numbers");
    g.factors = {f[0].get<double>(), f[1].get<double>()};
    if (!(g.factors[0] > 0) || !(g.factors[1] > 0))
      schema_error("geometry.factors", "factors must be positive");
    return g;
  }
  if (g.type == "control_net") {
    g.degrees = int_pair(j.value("degrees", json()), "geometry.degrees", 1);
    g.shape = int_pair(j.value("shape", json()), "geometry.shape", 2);
    const auto& pts = j.value("points", json());
    if (!pts.is_array() ||
        static_cast<int>(pts.size()) != g.shape[0] * g.shape[1])
      schema_error("geometry.points",
                   "expected shape[0]*shape[1] = " +
                       std::to_string(g.shape[0] * g.shape[1]) + " control points");
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        schema_error("geometry.points", "each point must be an array of two numbers");
      g.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return g;
  }
  schema_error("geometry.type", "unknown geometry '" + g.type + "'");
}

json geometry_to_json(const GeometrySpec& g) {
  json j;
  j["type"] = g.type;
  if (g.type == "scaling") j["factors"] = g.factors;
  if (g.type == "control_net") {
    j["degrees"] = g.degrees;
    j["shape"] = g.shape;
    json pts = json::array();
    for (const auto& p : g.points) pts.push_back(p);
    j["points"] = pts;
  }
  return j;
}

}  // namespace

MeshSpec parse_mesh_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("mesh spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SpecError("mesh spec: top level must be an object");
  for (const auto& [key, val] : j.items()) {
    (void)val;
    if (key != "degrees" && key != "base_elements" && key != "continuity" &&
        key != "geometry" && key != "levels")
      schema_error(key, "unknown field");
  }

  MeshSpec s;
  s.degrees = int_pair(j.value("degrees", json({3, 3})), "degrees", 1);
  s.base_elements = int_pair(j.value("base_elements", json({8, 8})), "base_elements", 1);

  const json cont = j.value("continuity", json("max"));
  if (cont.is_string()) {
    if (cont.get<std::string>() != "max")
      schema_error("continuity", "expected \"max\" or two per-direction integer lists");
    s.max_continuity = true;
  } else if (cont.is_array() && cont.size() == 2) {
    s.max_continuity = false;
    for (int d = 0; d < 2; ++d) {
      if (!cont[d].is_array() ||
          static_cast<int>(cont[d].size()) != s.base_elements[d] - 1)
        schema_error("continuity",
                     "direction " + std::to_string(d) + " needs one entry per interior "
                     "breakpoint (" + std::to_string(s.base_elements[d] - 1) + ")");
      for (const auto& c : cont[d]) {
        if (!c.is_number_integer()) schema_error("continuity", "entries must be integers");
        const int ci = c.get<int>();
        if (ci < 0 || ci > s.degrees[d] - 1)
          schema_error("continuity", "entries must be in [0, degree-1]");
        s.continuity[d].push_back(ci);
      }
    }
  } else {
    schema_error("continuity", "expected \"max\" or two per-direction integer lists");
  }

  s.geometry = parse_geometry(j.value("geometry", json("identity")));

  const json levels = j.value("levels", json::array());
  if (!levels.is_array()) schema_error("levels", "expected an array");
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const json& jl = levels[li];
    const std::string where = "levels[" + std::to_string(li) + "]";
    if (!jl.is_object()) schema_error(where, "expected an object");
    LevelSpec ls;
    const bool has_re = jl.contains("refined_elements");
    const bool has_su = jl.contains("support_union_of");
    if (has_re == has_su)
      schema_error(where, "expected exactly one of refined_elements / support_union_of");
    if (has_re) {
      if (!jl["refined_elements"].is_array())
        schema_error(where + ".refined_elements", "expected an array of [i, j] pairs");
      for (const auto& e : jl["refined_elements"])
        ls.refined_elements.push_back(int_pair(e, where + ".refined_elements[]", 0));
    } else {
      ls.support_union = true;
      if (!jl["support_union_of"].is_array())
        schema_error(where + ".support_union_of", "expected an array of basis ids");
      for (const auto& e : jl["support_union_of"]) {
        if (!e.is_number_integer() || e.get<long>() < 0)
          schema_error(where + ".support_union_of", "ids must be non-negative integers");
        ls.support_union_of.push_back(e.get<long>());
      }
    }
    s.levels.push_back(std::move(ls));
  }
  return s;
}

MeshSpec load_mesh_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mesh_spec(ss.str());
}

std::string serialize_mesh_spec(const MeshSpec& s) {
  json j;
  j["degrees"] = s.degrees;
  j["base_elements"] = s.base_elements;
  if (s.max_continuity)
    j["continuity"] = "max";
  else
    j["continuity"] = {s.continuity[0], s.continuity[1]};
  j["geometry"] = geometry_to_json(s.geometry);
  json levels = json::array();
  for (const auto& l : s.levels) {
    json jl;
    if (l.support_union)
      jl["support_union_of"] = l.support_union_of;
    else {
      json re = json::array();
      for (const auto& e : l.refined_elements) re.push_back(e);
      jl["refined_elements"] = re;
    }
    levels.push_back(jl);
  }
  j["levels"] = levels;
  return j.dump(2) + "\n";
}

std::uint64_t spec_hash(const MeshSpec& s) {
  const std::string text = serialize_mesh_spec(s);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string spec_hash_hex(const MeshSpec& s) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(spec_hash(s)));
  return buf;
}

LevelStack build_stack(const MeshSpec& s) {
  std::array<KnotVector, 2> base{KnotVector::open_uniform(1, 1),
                                 KnotVector::open_uniform(1, 1)};
  for (int d = 0; d < 2; ++d) {
    if (s.max_continuity) {
      base[d] = KnotVector::open_uniform(s.degrees[d], s.base_elements[d]);
    } else {
      std::vector<double> breaks(s.base_elements[d] + 1);
      for (int i = 0; i <= s.base_elements[d]; ++i)
        breaks[i] = static_cast<double>(i) / s.base_elements[d];
      base[d] = KnotVector::open_knot_vector(s.degrees[d], breaks, s.continuity[d]);
    }
  }

  std::vector<BoolGrid> refs;
  for (std::size_t li = 0; li < s.levels.size(); ++li) {
    const LevelSpec& ls = s.levels[li];
    const std::string where = "levels[" + std::to_string(li) + "]";
    const int l = static_cast<int>(li);
    const int nx = base[0].num_elements() << l;
    const int ny = base[1].num_elements() << l;
    BoolGrid m(nx, ny);
    if (!ls.support_union) {
      for (const auto& e : ls.refined_elements) {
        if (e[0] >= nx || e[1] >= ny)
          schema_error(where + ".refined_elements",
                       "element (" + std::to_string(e[0]) + ", " + std::to_string(e[1]) +
                           ") outside the " + std::to_string(nx) + "x" +
                           std::to_string(ny) + " level-" + std::to_string(l) + " mesh");
        m.set(e[0], e[1]);
      }
    } else {
      // supports of parent-level 2-forms: build the stack up to level l
      const LevelStack partial(base[0], base[1], refs);
      const KnotVector& d1 = partial.level(l).dbase(0);
      const KnotVector& d2 = partial.level(l).dbase(1);
      const long m1 = d1.dim(), m2 = d2.dim();
      for (long id : ls.support_union_of) {
        if (id >= m1 * m2)
          schema_error(where + ".support_union_of",
                       "id " + std::to_string(id) + " outside the level-" +
                           std::to_string(l) + " 2-form basis of dimension " +
                           std::to_string(m1 * m2));
        const int i1 = static_cast<int>(id % m1), i2 = static_cast<int>(id / m1);
        for (int e2 : d2.support_elements(i2))
          for (int e1 : d1.support_elements(i1)) m.set(e1, e2);
      }
    }
    refs.push_back(std::move(m));
  }
  return LevelStack(base[0], base[1], std::move(refs));
}

GeometryMap build_geometry(const MeshSpec& s) {
  const GeometrySpec& g = s.geometry;
  if (g.type == "identity") return GeometryMap::identity();
  if (g.type == "scaling") return GeometryMap::scaling(g.factors[0], g.factors[1]);
  return GeometryMap::control_net(g.degrees, g.shape[0], g.shape[1], g.points);
}

// ---------------------------------------------------------------------------
// exports

void write_matrix_market(const std::string& path, const SpMat& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  out.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

void write_matrix_market(const std::string& path, const Eigen::VectorXd& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << "\n";
}

void write_csv_spectrum(const std::string& path, const Eigen::VectorXd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError("cannot write '" + path + "'");
  out << "index,lambda\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < values.size(); ++i) out << i << "," << values[i] << "\n";
}

// ---------------------------------------------------------------------------
// commands

namespace {

json topology_json(const RegionTopology& t) {
  return json{{"components", t.components}, {"holes", t.holes}, {"manifold", t.manifold}};
}

void dump_check_matrices(const LevelStack& stack, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_market(dir + "/d0.mtx", hierarchical_incidence(stack, 0));
  write_matrix_market(dir + "/d1.mtx", hierarchical_incidence(stack, 1));
}

}  // namespace

int cmd_check(const MeshSpec& spec, std::ostream& out, const std::string& dump_dir) {
  const LevelStack stack = build_stack(spec);
  const ExactnessReport rep = exactness_check(stack);

  json levels = json::array();
  for (int l = 0; l + 1 < stack.num_levels(); ++l) {
    const SupportCheck a1 = check_assumption_support(stack, l);
    const OverlapCheck a2 = check_assumption_overlap(stack, l);
    const TopologyCompare& tc = rep.levels.at(l);
    json jl{{"level", l},
            {"assumption_support", a1.ok},
            {"assumption_overlap", a2.ok},
            {"overlap_violations", a2.violations.size()},
            {"topology_match", tc.match},
            {"omega_topology", topology_json(tc.omega)},
            {"coarse_greville_topology", topology_json(tc.coarse)},
            {"fine_greville_topology", topology_json(tc.fine)}};
    if (a1.uncovered)
      jl["uncovered_cell"] = json{(*a1.uncovered)[0], (*a1.uncovered)[1]};
    levels.push_back(jl);
  }

  const auto& co = rep.cohomology;
  json j{{"spec_hash", spec_hash_hex(spec)},
         {"num_levels", stack.num_levels()},
         {"dims", co.dims},
         {"dim_identity", rep.dim_identity},
         {"cohomology", co.h},
         {"ranks", co.ranks},
         {"rank_method", co.rank_method},
         {"topology_ok", rep.topology_ok},
         {"levels", levels},
         {"exact", rep.exact}};
  out << j.dump(2) << "\n";
  if (!dump_dir.empty()) dump_check_matrices(stack, dump_dir);
  return rep.exact ? 0 : 1;
}

int cmd_solve(const MeshSpec& spec, const SolveOptions& opts, std::ostream& out) {
  const LevelStack stack = build_stack(spec);
  const GeometryMap geom = build_geometry(spec);

  json j{{"spec_hash", spec_hash_hex(spec)}, {"problem", opts.problem}};
  if (opts.seed) j["seed"] = *opts.seed;

  Eigen::VectorXd values;
  if (opts.problem == "maxwell" || opts.problem == "maxwell-mixed1" ||
      opts.problem == "maxwell-mixed2") {
    EigResult r;
    if (opts.problem == "maxwell")
      r = maxwell_primal(stack, geom, opts.gauss_n, opts.tol);
    else if (opts.problem == "maxwell-mixed1")
      r = maxwell_mixed_1(stack, geom, opts.gauss_n, opts.tol);
    else
      r = maxwell_mixed_2(stack, geom, opts.gauss_n, opts.tol);
    values = r.values;
    j["method"] = r.method;
    j["zero_count"] = r.zero_count;
    j["lambda_tol"] = r.lambda_tol;
    j["max_residual"] = r.max_residual;
    j["dims"] = hierarchical_dims(stack);
    if (!opts.dump_dir.empty()) {
      std::filesystem::create_directories(opts.dump_dir);
      const HierarchicalSpace w0(stack, 0), w1(stack, 1), w2(stack, 2);
      write_matrix_market(opts.dump_dir + "/k1.mtx",
                          assemble_curl_curl(w1, geom, opts.gauss_n));
      write_matrix_market(opts.dump_dir + "/m1.mtx", assemble_mass(w1, geom, opts.gauss_n));
      write_matrix_market(opts.dump_dir + "/g01.mtx",
                          assemble_mixed_grad(w0, w1, geom, opts.gauss_n));
      write_matrix_market(opts.dump_dir + "/c21.mtx",
                          assemble_mixed_curl(w2, w1, geom, opts.gauss_n));
      write_matrix_market(opts.dump_dir + "/m2.mtx", assemble_mass(w2, geom, opts.gauss_n));
      write_matrix_market(opts.dump_dir + "/moments2.mtx", assemble_moments(w2, opts.gauss_n));
    }
  } else if (opts.problem == "infsup") {
    const StokesSystem sys = assemble_stokes(stack, geom, 1.0, std::nullopt, opts.gauss_n);
    const InfSupResult r = infsup_constant(sys);
    values = r.values;
    j["method"] = r.method;
    j["beta"] = r.beta;
    j["lambda_tol"] = r.lambda_tol;
    j["dims"] = json{{"velocity", sys.dim_velocity}, {"pressure", sys.dim_pressure}};
    j["cpen"] = sys.cpen;
    if (!opts.dump_dir.empty()) {
      std::filesystem::create_directories(opts.dump_dir);
      write_matrix_market(opts.dump_dir + "/a.mtx", sys.a);
      write_matrix_market(opts.dump_dir + "/b.mtx", sys.b);
      write_matrix_market(opts.dump_dir + "/v.mtx", sys.v);
      write_matrix_market(opts.dump_dir + "/mp.mtx", sys.mp);
      write_matrix_market(opts.dump_dir + "/moments.mtx", sys.pressure_moments);
    }
  } else {
    throw SpecError("unknown problem '" + opts.problem +
                    "' (expected maxwell, maxwell-mixed1, maxwell-mixed2 or infsup)");
  }

  const int nev = opts.nev <= 0 ? static_cast<int>(values.size())
                                : std::min<int>(opts.nev, static_cast<int>(values.size()));
  j["num_eigenvalues"] = values.size();
  j["values"] = std::vector<double>(values.data(), values.data() + nev);
  if (!opts.csv_path.empty()) write_csv_spectrum(opts.csv_path, values);
  out << j.dump(2) << "\n";
  return 0;
}

int cmd_info(const MeshSpec& spec, std::ostream& out) {
  const LevelStack stack = build_stack(spec);
  const auto dims = hierarchical_dims(stack);
  const auto dims_rot = hierarchical_dims(stack, true);

  json levels = json::array();
  const auto elems = hierarchical_bezier_mesh(stack);
  for (int l = 0; l < stack.num_levels(); ++l) {
    long nelem = 0;
    for (const auto& e : elems)
      if (e.level == l) ++nelem;
    json jl{{"level", l},
            {"mesh", stack.elements(l)},
            {"active_elements", nelem},
            {"omega_cells", l == 0 ? static_cast<long>(stack.elements(0)[0]) *
                                         stack.elements(0)[1]
                                   : stack.omega_mask(l, l - 1).count()}};
    json active = json::array();
    for (int k = 0; k <= 2; ++k) {
      const HierarchicalSpace w(stack, k);
      long n = 0;
      for (const auto& f : w.functions())
        if (f.level == l) ++n;
      active.push_back(n);
    }
    jl["active_functions"] = active;
    levels.push_back(jl);
  }

  json j{{"spec_hash", spec_hash_hex(spec)},
         {"num_levels", stack.num_levels()},
         {"degrees", spec.degrees},
         {"dims", dims},
         {"dims_rotated", dims_rot},
         {"dim_identity", dims[0] + dims[2] == dims[1] + 1},
         {"total_active_elements", elems.size()},
         {"levels", levels}};
  out << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// entry point

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"spline complex laboratory"};
  app.require_subcommand(1);

  std::string spec_path, dump_dir, csv_path;
  SolveOptions opts;
  long seed = 0;
  bool have_seed = false;

  CLI::App* check = app.add_subcommand("check", "exactness and assumption checks");
  check->add_option("spec", spec_path, "mesh spec JSON file")->required();
  check->add_option("--dump-matrices", dump_dir, "write incidence matrices to directory");

  CLI::App* solve = app.add_subcommand("solve", "assemble and solve an eigenproblem");
  solve->add_option("spec", spec_path, "mesh spec JSON file")->required();
  solve->add_option("--problem", opts.problem,
                    "maxwell | maxwell-mixed1 | maxwell-mixed2 | infsup")
      ->required();
  solve->add_option("--nev", opts.nev, "number of eigenvalues to report");
  solve->add_option("--tol", opts.tol, "zero-count threshold");
  solve->add_option("--gauss", opts.gauss_n, "Gauss points per direction");
  solve->add_option("--dump-matrices", dump_dir, "write assembled matrices to directory");
  solve->add_option("--csv", csv_path, "write the full spectrum as CSV");
  solve->add_option("--seed", seed, "seed echoed into the report")
      ->each([&](const std::string&) { have_seed = true; });

  CLI::App* info = app.add_subcommand("info", "dimensions and mesh statistics");
  info->add_option("spec", spec_path, "mesh spec JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const MeshSpec spec = load_mesh_spec(spec_path);
    if (check->parsed()) return cmd_check(spec, std::cout, dump_dir);
    if (solve->parsed()) {
      opts.dump_dir = dump_dir;
      opts.csv_path = csv_path;
      if (have_seed) opts.seed = seed;
      return cmd_solve(spec, opts, std::cout);
    }
    return cmd_info(spec, std::cout);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace sclab
