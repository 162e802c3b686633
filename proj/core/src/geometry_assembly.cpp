#include "sclab/geometry_assembly.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include <Eigen/Sparse>

namespace sclab {

// ---------------------------------------------------------------------------
// quadrature

QuadratureRule QuadratureRule::gauss(int n) {
  if (n < 1 || n > 64) throw SpecError("gauss rule: order out of range");
  QuadratureRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.points[n - 1 - i] = 0.5 * (x + 1);
    r.weights[n - 1 - i] = 1.0 / ((1 - x * x) * pp * pp);
  }
  return r;
}

// ---------------------------------------------------------------------------
// geometry

GeometryMap GeometryMap::identity() { return GeometryMap(); }

GeometryMap GeometryMap::scaling(double sx, double sy) {
  if (!(sx > 0) || !(sy > 0)) throw SpecError("geometry scaling: factors must be positive");
  GeometryMap g;
  g.kind_ = Kind::Scaling;
  g.s_ = {sx, sy};
  return g;
}

GeometryMap GeometryMap::control_net(std::array<int, 2> degrees, int nx, int ny,
                                     std::vector<std::array<double, 2>> points) {
  if (degrees[0] < 1 || degrees[1] < 1) throw SpecError("control net: degrees must be >= 1");
  if (nx < degrees[0] + 1 || ny < degrees[1] + 1)
    throw SpecError("control net: need at least degree+1 control points per direction");
  if (static_cast<int>(points.size()) != nx * ny)
    throw SpecError("control net: expected " + std::to_string(nx * ny) + " control points, got " +
                    std::to_string(points.size()));
  GeometryMap g;
  g.kind_ = Kind::ControlNet;
  g.deg_ = degrees;
  g.nx_ = nx;
  g.ny_ = ny;
  g.pts_ = std::move(points);
  g.kvx_ = KnotVector::open_uniform(degrees[0], nx - degrees[0]);
  g.kvy_ = KnotVector::open_uniform(degrees[1], ny - degrees[1]);
  return g;
}

std::array<double, 2> GeometryMap::scale_factors() const {
  if (!affine_diagonal()) throw SpecError("geometry map is not affine-diagonal");
  return s_;
}

GeometryMap::Frame GeometryMap::frame(double x, double y) const {
  Frame fr;
  if (kind_ != Kind::ControlNet) {
    fr.f = {s_[0] * x, s_[1] * y};
    fr.df << s_[0], 0, 0, s_[1];
    fr.det = s_[0] * s_[1];
    return fr;
  }
  std::vector<double> bx, dbx, by, dby;
  kvx_->evaluate_basis_der(x, bx, dbx);
  kvy_->evaluate_basis_der(y, by, dby);
  fr.f = {0, 0};
  fr.df.setZero();
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) {
      if (bx[i] == 0 && dbx[i] == 0) continue;
      const auto& p = pts_[static_cast<std::size_t>(j) * nx_ + i];
      const double v = bx[i] * by[j], dx = dbx[i] * by[j], dy = bx[i] * dby[j];
      fr.f[0] += p[0] * v;
      fr.f[1] += p[1] * v;
      fr.df(0, 0) += p[0] * dx;
      fr.df(0, 1) += p[0] * dy;
      fr.df(1, 0) += p[1] * dx;
      fr.df(1, 1) += p[1] * dy;
    }
  fr.det = fr.df.determinant();
  if (!(fr.det > 0))
    throw NumericalError("geometry map: Jacobian determinant is not positive at (" +
                         std::to_string(x) + ", " + std::to_string(y) + ")");
  return fr;
}

// ---------------------------------------------------------------------------
// basis cache

BasisCache::BasisCache(const LevelStack& stack, const QuadratureRule& rule)
    : nlev_(stack.num_levels()), ng_(static_cast<int>(rule.points.size())) {
  blocks_.resize(static_cast<std::size_t>(2) * nlev_ * nlev_ * 2);
  pts_.resize(static_cast<std::size_t>(2) * nlev_);
  std::vector<double> tval, tder;
  for (int dir = 0; dir < 2; ++dir)
    for (int l = 0; l < nlev_; ++l) {
      const KnotVector& kvl = stack.kv(l, dir);
      const auto& breaks = kvl.breakpoints();
      const int ne = kvl.num_elements();
      auto& pts = pts_[static_cast<std::size_t>(dir) * nlev_ + l];
      pts.resize(static_cast<std::size_t>(ne) * ng_);
      for (int e = 0; e < ne; ++e)
        for (int ig = 0; ig < ng_; ++ig)
          pts[static_cast<std::size_t>(e) * ng_ + ig] =
              breaks[e] + (breaks[e + 1] - breaks[e]) * rule.points[ig];
      for (int j = 0; j <= l; ++j)
        for (int derived = 0; derived < 2; ++derived) {
          const KnotVector& kv =
              derived ? stack.level(j).dbase(dir) : stack.level(j).base(dir);
          const std::vector<double> csw =
              derived ? stack.level(j).base(dir).curry_schoenberg_weights()
                      : std::vector<double>();
          Block& b =
              blocks_[(static_cast<std::size_t>(dir * nlev_ + l) * nlev_ + j) * 2 + derived];
          b.m = kv.dim();
          b.val.resize(static_cast<std::size_t>(ne) * ng_ * b.m);
          b.der.resize(b.val.size());
          for (int e = 0; e < ne; ++e)
            for (int ig = 0; ig < ng_; ++ig) {
              kv.evaluate_basis_der(pts[static_cast<std::size_t>(e) * ng_ + ig], tval, tder);
              double* pv = &b.val[(static_cast<std::size_t>(e) * ng_ + ig) * b.m];
              double* pd = &b.der[(static_cast<std::size_t>(e) * ng_ + ig) * b.m];
              for (int i = 0; i < b.m; ++i) {
                const double w = derived ? csw[i] : 1.0;
                pv[i] = tval[i] * w;
                pd[i] = tder[i] * w;
              }
            }
        }
    }
}

BasisCache::View BasisCache::view(int dir, int l, int e, int j, bool derived, int ig) const {
  const Block& b =
      blocks_[(static_cast<std::size_t>(dir * nlev_ + l) * nlev_ + j) * 2 + (derived ? 1 : 0)];
  const std::size_t off = (static_cast<std::size_t>(e) * ng_ + ig) * b.m;
  return {&b.val[off], &b.der[off], b.m};
}

double BasisCache::point(int dir, int l, int e, int ig) const {
  return pts_[static_cast<std::size_t>(dir) * nlev_ + l][static_cast<std::size_t>(e) * ng_ + ig];
}

// ---------------------------------------------------------------------------
// deterministic chunked parallel loop

int assembly_thread_count() {
  if (const char* env = std::getenv("SCLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {

constexpr int kChunkSize = 16;

void run_chunks(int nchunks, const std::function<void(int)>& fn) {
  const int nt = std::min(assembly_thread_count(), nchunks);
  if (nt <= 1) {
    for (int i = 0; i < nchunks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr err;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= nchunks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

struct ContribFunc {
  long gid;
  int level, comp, i1, i2;
  bool d1, d2;
};

std::vector<ContribFunc> contributing_funcs(const HierarchicalSpace& w, int l, int ex, int ey) {
  std::vector<ContribFunc> out;
  for (long gid : w.contributing(l, ex, ey)) {
    const HierFunc& f = w.functions()[gid];
    const auto df = w.derived_flags(f.comp);
    out.push_back({gid, f.level, f.comp, f.i1, f.i2, df[0], df[1]});
  }
  return out;
}

struct FuncEval {
  long gid;
  int comp;
  double v, dx, dy;  // parametric value and derivatives
};

void eval_point(const BasisCache& cache, const std::vector<ContribFunc>& cf, int l, int ex,
                int ey, int ix, int iy, std::vector<FuncEval>& out) {
  out.clear();
  out.reserve(cf.size());
  for (const ContribFunc& f : cf) {
    const auto vx = cache.view(0, l, ex, f.level, f.d1, ix);
    const auto vy = cache.view(1, l, ey, f.level, f.d2, iy);
    out.push_back({f.gid, f.comp, vx.val[f.i1] * vy.val[f.i2], vx.der[f.i1] * vy.val[f.i2],
                   vx.val[f.i1] * vy.der[f.i2]});
  }
}

int default_gauss(const LevelStack& stack, int gauss_n) {
  if (gauss_n > 0) return gauss_n;
  return std::max(stack.kv(0, 0).degree(), stack.kv(0, 1).degree()) + 1;
}

using TripletBuf = std::vector<Eigen::Triplet<double>>;

SpMat merge_triplets(long rows, long cols, const std::vector<TripletBuf>& bufs) {
  TripletBuf all;
  std::size_t total = 0;
  for (const auto& b : bufs) total += b.size();
  all.reserve(total);
  for (const auto& b : bufs) all.insert(all.end(), b.begin(), b.end());
  SpMat m(rows, cols);
  m.setFromTriplets(all.begin(), all.end());
  return m;
}

/// Element extents (parametric) of a hierarchical element.
std::array<double, 4> elem_box(const LevelStack& stack, const HierElem& e) {
  const auto& bx = stack.kv(e.level, 0).breakpoints();
  const auto& by = stack.kv(e.level, 1).breakpoints();
  return {bx[e.ex], bx[e.ex + 1], by[e.ey], by[e.ey + 1]};
}

}  // namespace

// ---------------------------------------------------------------------------
// mass

SpMat assemble_mass(const HierarchicalSpace& w, const GeometryMap& geom, int gauss_n) {
  const LevelStack& stack = w.stack();
  const int ng = default_gauss(stack, gauss_n);
  const QuadratureRule rule = QuadratureRule::gauss(ng);
  const BasisCache cache(stack, rule);
  const auto elems = hierarchical_bezier_mesh(stack);
  const int nchunks = static_cast<int>((elems.size() + kChunkSize - 1) / kChunkSize);
  std::vector<TripletBuf> bufs(std::max(nchunks, 1));
  const int k = w.k();
  const bool rot = w.rotated();

  run_chunks(nchunks, [&](int c) {
    std::vector<FuncEval> vals;
    for (std::size_t ei = static_cast<std::size_t>(c) * kChunkSize;
         ei < std::min(elems.size(), (static_cast<std::size_t>(c) + 1) * kChunkSize); ++ei) {
      const HierElem& el = elems[ei];
      const auto [x0, x1, y0, y1] = elem_box(stack, el);
      const auto cf = contributing_funcs(w, el.level, el.ex, el.ey);
      for (int iy = 0; iy < ng; ++iy)
        for (int ix = 0; ix < ng; ++ix) {
          const double x = cache.point(0, el.level, el.ex, ix);
          const double y = cache.point(1, el.level, el.ey, iy);
          const auto fr = geom.frame(x, y);
          const double wq = rule.weights[ix] * rule.weights[iy] * (x1 - x0) * (y1 - y0);
          Eigen::Matrix2d met;  // component metric for 1-forms
          if (k == 1) {
            if (!rot)
              met = (fr.df.transpose() * fr.df).inverse() * fr.det;
            else
              met = (fr.df.transpose() * fr.df) / fr.det;
          }
          eval_point(cache, cf, el.level, el.ex, el.ey, ix, iy, vals);
          for (std::size_t a = 0; a < vals.size(); ++a)
            for (std::size_t b = a; b < vals.size(); ++b) {
              double f;
              if (k == 0)
                f = vals[a].v * vals[b].v * fr.det;
              else if (k == 2)
                f = vals[a].v * vals[b].v / fr.det;
              else
                f = vals[a].v * vals[b].v * met(vals[a].comp, vals[b].comp);
              if (f == 0) continue;
              const double m = wq * f;
              bufs[c].emplace_back(vals[a].gid, vals[b].gid, m);
              if (vals[b].gid != vals[a].gid) bufs[c].emplace_back(vals[b].gid, vals[a].gid, m);
            }
        }
    }
  });
  return merge_triplets(w.dim(), w.dim(), bufs);
}

// ---------------------------------------------------------------------------
// curl-curl and mixed couplings (standard orientation)

SpMat assemble_curl_curl(const HierarchicalSpace& w1, const GeometryMap& geom, int gauss_n) {
  if (w1.k() != 1 || w1.rotated())
    throw SpecError("assemble_curl_curl: expects the standard-orientation 1-form space");
  const LevelStack& stack = w1.stack();
  const int ng = default_gauss(stack, gauss_n);
  const QuadratureRule rule = QuadratureRule::gauss(ng);
  const BasisCache cache(stack, rule);
  const auto elems = hierarchical_bezier_mesh(stack);
  const int nchunks = static_cast<int>((elems.size() + kChunkSize - 1) / kChunkSize);
  std::vector<TripletBuf> bufs(std::max(nchunks, 1));

  run_chunks(nchunks, [&](int c) {
    std::vector<FuncEval> vals;
    std::vector<double> curls;
    for (std::size_t ei = static_cast<std::size_t>(c) * kChunkSize;
         ei < std::min(elems.size(), (static_cast<std::size_t>(c) + 1) * kChunkSize); ++ei) {
      const HierElem& el = elems[ei];
      const auto [x0, x1, y0, y1] = elem_box(stack, el);
      const auto cf = contributing_funcs(w1, el.level, el.ex, el.ey);
      for (int iy = 0; iy < ng; ++iy)
        for (int ix = 0; ix < ng; ++ix) {
          const double x = cache.point(0, el.level, el.ex, ix);
          const double y = cache.point(1, el.level, el.ey, iy);
          const auto fr = geom.frame(x, y);
          const double wq = rule.weights[ix] * rule.weights[iy] * (x1 - x0) * (y1 - y0);
          eval_point(cache, cf, el.level, el.ex, el.ey, ix, iy, vals);
          curls.clear();
          for (const FuncEval& v : vals)
            curls.push_back((v.comp == 1 ? v.dx : 0.0) - (v.comp == 0 ? v.dy : 0.0));
          for (std::size_t a = 0; a < vals.size(); ++a)
            for (std::size_t b = a; b < vals.size(); ++b) {
              const double m = wq * curls[a] * curls[b] / fr.det;
              if (m == 0) continue;
              bufs[c].emplace_back(vals[a].gid, vals[b].gid, m);
              if (vals[b].gid != vals[a].gid) bufs[c].emplace_back(vals[b].gid, vals[a].gid, m);
            }
        }
    }
  });
  return merge_triplets(w1.dim(), w1.dim(), bufs);
}

SpMat assemble_mixed_grad(const HierarchicalSpace& w0, const HierarchicalSpace& w1,
                          const GeometryMap& geom, int gauss_n) {
  if (w0.k() != 0 || w1.k() != 1 || w0.rotated() || w1.rotated() ||
      &w0.stack() != &w1.stack())
    throw SpecError("assemble_mixed_grad: expects W0 and W1 of one standard complex");
  const LevelStack& stack = w0.stack();
  const int ng = default_gauss(stack, gauss_n);
  const QuadratureRule rule = QuadratureRule::gauss(ng);
  const BasisCache cache(stack, rule);
  const auto elems = hierarchical_bezier_mesh(stack);
  const int nchunks = static_cast<int>((elems.size() + kChunkSize - 1) / kChunkSize);
  std::vector<TripletBuf> bufs(std::max(nchunks, 1));

  run_chunks(nchunks, [&](int c) {
    std::vector<FuncEval> vq, vu;
    for (std::size_t ei = static_cast<std::size_t>(c) * kChunkSize;
         ei < std::min(elems.size(), (static_cast<std::size_t>(c) + 1) * kChunkSize); ++ei) {
      const HierElem& el = elems[ei];
      const auto [x0, x1, y0, y1] = elem_box(stack, el);
      const auto cq = contributing_funcs(w0, el.level, el.ex, el.ey);
      const auto cu = contributing_funcs(w1, el.level, el.ex, el.ey);
      for (int iy = 0; iy < ng; ++iy)
        for (int ix = 0; ix < ng; ++ix) {
          const double x = cache.point(0, el.level, el.ex, ix);
          const double y = cache.point(1, el.level, el.ey, iy);
          const auto fr = geom.frame(x, y);
          const Eigen::Matrix2d gin = (fr.df.transpose() * fr.df).inverse();
          const double wq =
              rule.weights[ix] * rule.weights[iy] * (x1 - x0) * (y1 - y0) * fr.det;
          eval_point(cache, cq, el.level, el.ex, el.ey, ix, iy, vq);
          eval_point(cache, cu, el.level, el.ex, el.ey, ix, iy, vu);
          for (const FuncEval& q : vq)
            for (const FuncEval& u : vu) {
              const double g = q.dx * gin(0, u.comp) + q.dy * gin(1, u.comp);
              const double m = wq * g * u.v;
              if (m != 0) bufs[c].emplace_back(q.gid, u.gid, m);
            }
        }
    }
  });
  return merge_triplets(w0.dim(), w1.dim(), bufs);
}

SpMat assemble_mixed_curl(const HierarchicalSpace& w2, const HierarchicalSpace& w1,
                          const GeometryMap& geom, int gauss_n) {
  if (w2.k() != 2 || w1.k() != 1 || w1.rotated() || &w2.stack() != &w1.stack())
    throw SpecError("assemble_mixed_curl: expects W2 and standard W1 of one stack");
  const LevelStack& stack = w1.stack();
  const int ng = default_gauss(stack, gauss_n);
  const QuadratureRule rule = QuadratureRule::gauss(ng);
  const BasisCache cache(stack, rule);
  const auto elems = hierarchical_bezier_mesh(stack);
  const int nchunks = static_cast<int>((elems.size() + kChunkSize - 1) / kChunkSize);
  std::vector<TripletBuf> bufs(std::max(nchunks, 1));

  run_chunks(nchunks, [&](int c) {
    std::vector<FuncEval> vp, vu;
    for (std::size_t ei = static_cast<std::size_t>(c) * kChunkSize;
         ei < std::min(elems.size(), (static_cast<std::size_t>(c) + 1) * kChunkSize); ++ei) {
      const HierElem& el = elems[ei];
      const auto [x0, x1, y0, y1] = elem_box(stack, el);
      const auto cp = contributing_funcs(w2, el.level, el.ex, el.ey);
      const auto cu = contributing_funcs(w1, el.level, el.ex, el.ey);
      for (int iy = 0; iy < ng; ++iy)
        for (int ix = 0; ix < ng; ++ix) {
          const double x = cache.point(0, el.level, el.ex, ix);
          const double y = cache.point(1, el.level, el.ey, iy);
          const auto fr = geom.frame(x, y);
          const double wq = rule.weights[ix] * rule.weights[iy] * (x1 - x0) * (y1 - y0);
          eval_point(cache, cp, el.level, el.ex, el.ey, ix, iy, vp);
          eval_point(cache, cu, el.level, el.ex, el.ey, ix, iy, vu);
          for (const FuncEval& u : vu) {
            const double cu_val = (u.comp == 1 ? u.dx : 0.0) - (u.comp == 0 ? u.dy : 0.0);
            if (cu_val == 0) continue;
            for (const FuncEval& p : vp) {
              const double m = wq * p.v * cu_val / fr.det;
              if (m != 0) bufs[c].emplace_back(p.gid, u.gid, m);
            }
          }
        }
    }
  });
  return merge_triplets(w2.dim(), w1.dim(), bufs);
}

Eigen::VectorXd assemble_moments(const HierarchicalSpace& w2, int gauss_n) {
  if (w2.k() != 2) throw SpecError("assemble_moments: expects the 2-form space");
  const LevelStack& stack = w2.stack();
  const int ng = default_gauss(stack, gauss_n);
  const QuadratureRule rule = QuadratureRule::gauss(ng);
  const BasisCache cache(stack, rule);
  const auto elems = hierarchical_bezier_mesh(stack);
  const int nchunks = static_cast<int>((elems.size() + kChunkSize - 1) / kChunkSize);
  std::vector<Eigen::VectorXd> bufs(std::max(nchunks, 1),
                                    Eigen::VectorXd::Zero(w2.dim()));

  run_chunks(nchunks, [&](int c) {
    std::vector<FuncEval> vals;
    for (std::size_t ei = static_cast<std::size_t>(c) * kChunkSize;
         ei < std::min(elems.size(), (static_cast<std::size_t>(c) + 1) * kChunkSize); ++ei) {
      const HierElem& el = elems[ei];
      const auto [x0, x1, y0, y1] = elem_box(stack, el);
      const auto cf = contributing_funcs(w2, el.level, el.ex, el.ey);
      for (int iy = 0; iy < ng; ++iy)
        for (int ix = 0; ix < ng; ++ix) {
          const double wq = rule.weights[ix] * rule.weights[iy] * (x1 - x0) * (y1 - y0);
          eval_point(cache, cf, el.level, el.ex, el.ey, ix, iy, vals);
          for (const FuncEval& v : vals) bufs[c][v.gid] += wq * v.v;
        }
    }
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w2.dim());
  for (const auto& b : bufs) out += b;
  return out;
}

// ---------------------------------------------------------------------------
// Stokes

StokesSystem assemble_stokes(const LevelStack& stack, const GeometryMap& geom, double nu,
                             std::optional<double> cpen, int gauss_n) {
  if (!geom.affine_diagonal())
    throw SpecError("assemble_stokes: supported for identity or axis-aligned scaling geometry");
  const int pmax = std::max(stack.kv(0, 0).degree(), stack.kv(0, 1).degree());
  const double cp = cpen.value_or(5.0 * pmax);
  if (!(cp > 0)) throw SpecError("assemble_stokes: C_pen must be positive");
  if (!(nu > 0)) throw SpecError("assemble_stokes: viscosity must be positive");

  const HierarchicalSpace wv(stack, 1, /*rotated=*/true, /*bc=*/true);
  const HierarchicalSpace wp(stack, 2, /*rotated=*/true, /*bc=*/true);
  const auto s = geom.scale_factors();
  const double det = s[0] * s[1];

  const int ng = default_gauss(stack, gauss_n);
  const QuadratureRule rule = QuadratureRule::gauss(ng);
  const BasisCache cache(stack, rule);
  const auto elems = hierarchical_bezier_mesh(stack);
  const int nchunks = static_cast<int>((elems.size() + kChunkSize - 1) / kChunkSize);
  std::vector<TripletBuf> buf_a(std::max(nchunks, 1)), buf_b(buf_a.size()),
      buf_v(buf_a.size()), buf_mp(buf_a.size());
  std::vector<Eigen::VectorXd> buf_mom(buf_a.size(), Eigen::VectorXd::Zero(wp.dim()));

  // physical pullback factor of velocity component c (Piola, diagonal DF)
  const double pf[2] = {1.0 / s[1], 1.0 / s[0]};

  run_chunks(nchunks, [&](int c) {
    std::vector<FuncEval> vv, vp;
    for (std::size_t ei = static_cast<std::size_t>(c) * kChunkSize;
         ei < std::min(elems.size(), (static_cast<std::size_t>(c) + 1) * kChunkSize); ++ei) {
      const HierElem& el = elems[ei];
      const auto [x0, x1, y0, y1] = elem_box(stack, el);
      const double hx = x1 - x0, hy = y1 - y0;
      const auto cfv = contributing_funcs(wv, el.level, el.ex, el.ey);
      const auto cfp = contributing_funcs(wp, el.level, el.ex, el.ey);

      for (int iy = 0; iy < ng; ++iy)
        for (int ix = 0; ix < ng; ++ix) {
          const double wq = rule.weights[ix] * rule.weights[iy] * hx * hy;     // parametric
          const double wqp = wq * det;                                         // physical
          eval_point(cache, cfv, el.level, el.ex, el.ey, ix, iy, vv);
          eval_point(cache, cfp, el.level, el.ex, el.ey, ix, iy, vp);
          for (std::size_t a = 0; a < vv.size(); ++a) {
            const int ca = vv[a].comp;
            const double gax = vv[a].dx / s[0] * pf[ca], gay = vv[a].dy / s[1] * pf[ca];
            for (std::size_t b = a; b < vv.size(); ++b) {
              const int cb = vv[b].comp;
              const double gbx = vv[b].dx / s[0] * pf[cb], gby = vv[b].dy / s[1] * pf[cb];
              // norm matrix: full gradient, same-component only
              if (ca == cb) {
                const double f = wqp * (gax * gbx + gay * gby);
                buf_v[c].emplace_back(vv[a].gid, vv[b].gid, f);
                if (vv[b].gid != vv[a].gid) buf_v[c].emplace_back(vv[b].gid, vv[a].gid, f);
              }
              // viscous 2 nu (sym grad : sym grad); grad of basis a is
              // e_{ca} (gax, gay)^T
              double ee = 0;
              for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                  const double ea =
                      0.5 * ((i == ca ? (j == 0 ? gax : gay) : 0.0) +
                             (j == ca ? (i == 0 ? gax : gay) : 0.0));
                  const double eb =
                      0.5 * ((i == cb ? (j == 0 ? gbx : gby) : 0.0) +
                             (j == cb ? (i == 0 ? gbx : gby) : 0.0));
                  ee += ea * eb;
                }
              const double fa = wqp * 2.0 * nu * ee;
              if (fa != 0) {
                buf_a[c].emplace_back(vv[a].gid, vv[b].gid, fa);
                if (vv[b].gid != vv[a].gid) buf_a[c].emplace_back(vv[b].gid, vv[a].gid, fa);
              }
            }
          }
          for (const FuncEval& q : vp) {
            buf_mom[c][q.gid] += wq * q.v;
            for (const FuncEval& u : vv) {
              const double divu = (u.comp == 0 ? u.dx : u.dy) / det;
              const double m = wq * q.v * divu;  // (q/det) * div * det = q*div
              if (m != 0) buf_b[c].emplace_back(q.gid, u.gid, m);
            }
          }
          for (std::size_t a = 0; a < vp.size(); ++a)
            for (std::size_t b = a; b < vp.size(); ++b) {
              const double m = wq * vp[a].v * vp[b].v / det;
              buf_mp[c].emplace_back(vp[a].gid, vp[b].gid, m);
              if (vp[b].gid != vp[a].gid) buf_mp[c].emplace_back(vp[b].gid, vp[a].gid, m);
            }
        }

      // boundary faces of this element: penalty for the norm matrix and
      // Nitsche consistency+penalty for the operator
      const int e1 = stack.kv(el.level, 0).num_elements();
      const int e2 = stack.kv(el.level, 1).num_elements();
      struct Face {
        int dir;       // normal direction
        double coord;  // parametric coordinate on the fixed axis
        double nsign;  // outward normal sign
      };
      std::vector<Face> faces;
      if (el.ex == 0) faces.push_back({0, x0, -1});
      if (el.ex == e1 - 1) faces.push_back({0, x1, +1});
      if (el.ey == 0) faces.push_back({1, y0, -1});
      if (el.ey == e2 - 1) faces.push_back({1, y1, +1});
      for (const Face& fc : faces) {
        const double h_tan = fc.dir == 0 ? hy : hx;        // parametric
        const double s_tan = fc.dir == 0 ? s[1] : s[0];    // physical stretch along face
        const double h_perp = (fc.dir == 0 ? hx : hy) * (fc.dir == 0 ? s[0] : s[1]);
        for (int iq = 0; iq < ng; ++iq) {
          double x, y;
          if (fc.dir == 0) {
            x = fc.coord;
            y = y0 + hy * rule.points[iq];
          } else {
            x = x0 + hx * rule.points[iq];
            y = fc.coord;
          }
          const double ws = rule.weights[iq] * h_tan * s_tan;  // physical ds
          // one-off evaluation at the face point (not a cached Gauss point)
          vv.clear();
          for (const ContribFunc& f : cfv) {
            std::vector<double> v1, d1v, v2, d2v;
            const KnotVector& a =
                f.d1 ? stack.level(f.level).dbase(0) : stack.level(f.level).base(0);
            const KnotVector& b =
                f.d2 ? stack.level(f.level).dbase(1) : stack.level(f.level).base(1);
            a.evaluate_basis_der(x, v1, d1v);
            b.evaluate_basis_der(y, v2, d2v);
            double w1 = 1, w2 = 1;
            if (f.d1) w1 = stack.level(f.level).base(0).curry_schoenberg_weights()[f.i1];
            if (f.d2) w2 = stack.level(f.level).base(1).curry_schoenberg_weights()[f.i2];
            vv.push_back({f.gid, f.comp, w1 * w2 * v1[f.i1] * v2[f.i2],
                          w1 * w2 * d1v[f.i1] * v2[f.i2], w1 * w2 * v1[f.i1] * d2v[f.i2]});
          }
          for (std::size_t a = 0; a < vv.size(); ++a) {
            const int ca = vv[a].comp;
            const double vap = vv[a].v * pf[ca];
            const double gax = vv[a].dx / s[0] * pf[ca], gay = vv[a].dy / s[1] * pf[ca];
            for (std::size_t b = a; b < vv.size(); ++b) {
              const int cb = vv[b].comp;
              const double vbp = vv[b].v * pf[cb];
              const double gbx = vv[b].dx / s[0] * pf[cb], gby = vv[b].dy / s[1] * pf[cb];
              // norm matrix penalty (cpen/h_F) u.v, same component
              if (ca == cb) {
                const double f = ws * (cp / h_perp) * vap * vbp;
                buf_v[c].emplace_back(vv[a].gid, vv[b].gid, f);
                if (vv[b].gid != vv[a].gid) buf_v[c].emplace_back(vv[b].gid, vv[a].gid, f);
              }
              // Nitsche: -(t(u).v + t(v).u) + (2 nu cpen/h_F) u.v with
              // t(u) = 2 nu sym-grad(u) n
              const double n[2] = {fc.dir == 0 ? fc.nsign : 0.0,
                                   fc.dir == 1 ? fc.nsign : 0.0};
              // 2 nu (sym grad u) n . e_cw * vw for u = e_cu (gux, guy)
              auto tdotv = [&](int cu, double gux, double guy, int cw, double vw) {
                const double gn = n[0] * gux + n[1] * guy;
                const double gcw = cw == 0 ? gux : guy;
                return nu * ((cw == cu ? gn : 0.0) + gcw * n[cu]) * vw;
              };
              double fa = -(tdotv(ca, gax, gay, cb, vbp) + tdotv(cb, gbx, gby, ca, vap));
              if (ca == cb) fa += (2.0 * nu * cp / h_perp) * vap * vbp;
              fa *= ws;
              if (fa != 0) {
                buf_a[c].emplace_back(vv[a].gid, vv[b].gid, fa);
                if (vv[b].gid != vv[a].gid) buf_a[c].emplace_back(vv[b].gid, vv[a].gid, fa);
              }
            }
          }
        }
      }
    }
  });

  StokesSystem sys;
  sys.nu = nu;
  sys.cpen = cp;
  sys.dim_velocity = wv.dim();
  sys.dim_pressure = wp.dim();
  sys.a = merge_triplets(wv.dim(), wv.dim(), buf_a);
  sys.b = merge_triplets(wp.dim(), wv.dim(), buf_b);
  sys.v = merge_triplets(wv.dim(), wv.dim(), buf_v);
  sys.mp = merge_triplets(wp.dim(), wp.dim(), buf_mp);
  sys.pressure_moments = Eigen::VectorXd::Zero(wp.dim());
  for (const auto& b : buf_mom) sys.pressure_moments += b;
  return sys;
}

}  // namespace sclab
