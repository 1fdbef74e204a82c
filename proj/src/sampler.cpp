#include <coolpinns/sampler.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <vector>

namespace coolpinns {

namespace {

// Bucketed dense-polyline replica of the channel for fast distance queries
// during the shift search. Accepted lattices are re-verified against the
// authoritative Vasculature::distance, so small replica errors only steer
// the search, never the result.
class FastDistance {
 public:
  FastDistance(const Vasculature& vasc, const Domain& dom)
      : x0_(0.0), x1_(dom.Lx) {
    const int n = 2048;
    const Scalar s_total = vasc.length();
    std::vector<Scalar> ss;
    ss.reserve(n + 8);
    for (int i = 0; i <= n; ++i) ss.push_back(s_total * i / n);
    // corners must be polyline vertices or the replica cuts them and
    // overestimates nearby distances
    for (const Scalar s : vasc.corner_arclengths()) ss.push_back(s);
    std::sort(ss.begin(), ss.end());
    poly_.reserve(ss.size());
    for (const Scalar s : ss) poly_.push_back(vasc.point_at(s));
    bins_.resize(kBins);
    yr_.assign(kBins, {std::numeric_limits<Scalar>::infinity(),
                       -std::numeric_limits<Scalar>::infinity()});
    const int nseg = static_cast<int>(poly_.size()) - 1;
    for (int i = 0; i < nseg; ++i) {
      const Scalar lo = std::min(poly_[i].x(), poly_[i + 1].x());
      const Scalar hi = std::max(poly_[i].x(), poly_[i + 1].x());
      const Scalar ylo = std::min(poly_[i].y(), poly_[i + 1].y());
      const Scalar yhi = std::max(poly_[i].y(), poly_[i + 1].y());
      for (int b = bin(lo); b <= bin(hi); ++b) {
        bins_[static_cast<std::size_t>(b)].push_back(i);
        auto& r = yr_[static_cast<std::size_t>(b)];
        r.first = std::min(r.first, ylo);
        r.second = std::max(r.second, yhi);
      }
    }
  }

  // cheap sound reject: false means the point is certainly farther than
  // `band` from the curve (segments are straight, so per-bin y-extents of
  // the endpoints bound the curve)
  bool maybe_in_band(const Vec2& p, Scalar band) const {
    for (int b = bin(p.x() - band); b <= bin(p.x() + band); ++b) {
      const auto& r = yr_[static_cast<std::size_t>(b)];
      if (p.y() >= r.first - band && p.y() <= r.second + band) return true;
    }
    return false;
  }

  // exact distance to the replica, searched only near p.x with the given
  // horizontal reach
  Scalar query(const Vec2& p, Scalar reach) const {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    const int b0 = bin(p.x() - reach);
    const int b1 = bin(p.x() + reach);
    for (int b = b0; b <= b1; ++b) {
      for (const int i : bins_[static_cast<std::size_t>(b)]) {
        const Vec2 a = poly_[static_cast<std::size_t>(i)];
        const Vec2 c = poly_[static_cast<std::size_t>(i) + 1];
        const Vec2 ab = c - a;
        const Scalar len2 = ab.squaredNorm();
        Scalar t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
        t = std::clamp(t, Scalar(0.0), Scalar(1.0));
        best = std::min(best, (p - a + t * (a - c)).norm());
      }
    }
    return best;
  }

 private:
  static constexpr int kBins = 128;
  int bin(Scalar x) const {
    const int b = static_cast<int>((x - x0_) / (x1_ - x0_) * kBins);
    return std::clamp(b, 0, kBins - 1);
  }
  Scalar x0_, x1_;
  std::vector<Vec2> poly_;
  std::vector<std::vector<int>> bins_;
  std::vector<std::pair<Scalar, Scalar>> yr_;
};

struct Lattice {
  int m, k;          // columns, rows
  Scalar dx, dy;     // sub-cell shift in pitch units
};

Scalar col_x(const Lattice& l, const Domain& dom, int i) {
  return (i + 0.5 + l.dx) * dom.Lx / l.m;
}
Scalar row_y(const Lattice& l, const Domain& dom, int j) {
  return (j + 0.5 + l.dy) * dom.Ly / l.k;
}

// Replica-based removal count for a candidate lattice, bailing out as soon
// as the count exceeds the allowed surplus.
int count_removed(const Lattice& l, const Domain& dom,
                  const FastDistance& fd, Scalar band, int max_allowed) {
  int removed = 0;
  for (int i = 0; i < l.m; ++i) {
    const Scalar x = col_x(l, dom, i);
    for (int j = 0; j < l.k; ++j) {
      const Vec2 p(x, row_y(l, dom, j));
      if (!fd.maybe_in_band(p, band)) continue;
      if (fd.query(p, band) < band && ++removed > max_allowed)
        return removed;
    }
  }
  return removed;
}

bool verify_lattice(const Lattice& l, const Domain& dom,
                    const Vasculature* vasc, Scalar band, int target,
                    MatX& out) {
  std::vector<Vec2> kept;
  kept.reserve(static_cast<std::size_t>(l.m) * l.k);
  for (int j = 0; j < l.k; ++j) {
    for (int i = 0; i < l.m; ++i) {
      const Vec2 p(col_x(l, dom, i), row_y(l, dom, j));
      if (!dom.strictly_inside(p)) return false;
      if (vasc && vasc->distance(p) < band) continue;
      kept.push_back(p);
    }
  }
  if (static_cast<int>(kept.size()) != target) return false;
  out.resize(2, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) out.col(c) = kept[c];
  return true;
}

// shift values ordered by magnitude: 0, +s, -s, +2s, ...
std::vector<Scalar> shift_ladder(Scalar step, Scalar max_abs) {
  std::vector<Scalar> v{0.0};
  for (Scalar s = step; s <= max_abs + 1e-12; s += step) {
    v.push_back(s);
    v.push_back(-s);
  }
  return v;
}

// Deterministic coarse-to-fine shift search for one lattice shape. A fixed
// trial budget keeps infeasible shapes from stalling the search; observed
// preset hits land well under it.
bool search_shape(int m, int k, int excess, const Domain& dom,
                  const Vasculature& vasc, const FastDistance& fd,
                  Scalar band, int target, MatX& out) {
  int trials_left = 25000;
  for (const Scalar step : {0.05, 0.01, 0.002}) {
    for (const Scalar dy : shift_ladder(step, 0.45)) {
      for (const Scalar dx : shift_ladder(step, 0.45)) {
        if (--trials_left < 0) return false;
        Lattice l{m, k, dx, dy};
        if (count_removed(l, dom, fd, band, excess) != excess) continue;
        if (verify_lattice(l, dom, &vasc, band, target, out)) return true;
      }
    }
  }
  return false;
}

}  // namespace

MatX uniform_grid(const Domain& dom, const Vasculature& vasc, int target,
                  const SamplerOptions& opts) {
  if (target < 4) throw ConfigError("interior target must be at least 4");
  const bool has_channel = vasc.kind() != VascKind::NoChannel;
  const Scalar band = opts.band_halfwidth;

  // candidate shapes: exact factorizations first (zero removals), then
  // slightly oversized lattices whose band removals must equal the surplus
  struct Shape {
    int m, k, excess;
  };
  std::vector<Shape> shapes;
  for (int m = 2; m <= target / 2; ++m) {
    if (target % m != 0) continue;
    const int k = target / m;
    if (std::max(m, k) > 2 * std::min(m, k)) continue;
    shapes.push_back({m, k, 0});
  }
  const int root = static_cast<int>(std::lround(std::sqrt(double(target))));
  for (int m = std::max(2, root - 8); m <= root + 8; ++m) {
    const int k = (target + m - 1) / m;
    const int excess = m * k - target;
    if (excess == 0) continue;  // already listed as a factorization
    if (excess > 2 * std::max(m, k)) continue;
    shapes.push_back({m, k, excess});
  }
  std::sort(shapes.begin(), shapes.end(), [](const Shape& a, const Shape& b) {
    if (a.excess != b.excess) return a.excess < b.excess;
    const int da = std::abs(a.m - a.k), db = std::abs(b.m - b.k);
    if (da != db) return da < db;
    return a.m < b.m;
  });

  std::unique_ptr<FastDistance> fd;
  if (has_channel) fd = std::make_unique<FastDistance>(vasc, dom);

  MatX out;
  for (const Shape& sh : shapes) {
    if (!has_channel) {
      Lattice l{sh.m, sh.k, 0.0, 0.0};
      if (sh.excess == 0 &&
          verify_lattice(l, dom, nullptr, band, target, out))
        return out;
      continue;
    }
    if (search_shape(sh.m, sh.k, sh.excess, dom, vasc, *fd, band, target,
                     out))
      return out;
  }
  throw ConfigError("interior target incompatible with the exclusion band");
}

MatX random_points(const Domain& dom, const Vasculature& vasc, int target,
                   std::uint64_t seed, const SamplerOptions& opts) {
  if (target < 1) throw ConfigError("need at least one random point");
  const bool has_channel = vasc.kind() != VascKind::NoChannel;
  std::mt19937_64 rng(derive_seed(seed, 0x696e7472u));  // "intr"
  std::uniform_real_distribution<Scalar> ux(0.0, dom.Lx);
  std::uniform_real_distribution<Scalar> uy(0.0, dom.Ly);
  MatX out(2, target);
  int got = 0;
  std::uint64_t attempts = 0;
  while (got < target) {
    if (++attempts > 1000ull * static_cast<std::uint64_t>(target) + 100000ull)
      throw ConfigError("rejection sampling failed to reach the target");
    const Vec2 p(ux(rng), uy(rng));
    if (!dom.strictly_inside(p)) continue;
    if (has_channel && vasc.distance(p) < opts.band_halfwidth) continue;
    out.col(got++) = p;
  }
  return out;
}

void boundary_points(const Domain& dom, int per_edge, const Vec2* inlet,
                     MatX& pts, MatX& normals) {
  if (per_edge < 2) throw ConfigError("need at least two points per edge");
  std::vector<Vec2> p, n;
  p.reserve(static_cast<std::size_t>(per_edge) * 4);
  n.reserve(p.capacity());
  const auto push = [&](const Vec2& pos, const Vec2& nrm) {
    if (inlet && (pos - *inlet).norm() < 1e-9) return;
    p.push_back(pos);
    n.push_back(nrm);
  };
  for (int i = 1; i <= per_edge; ++i) {
    const Scalar fx = dom.Lx * i / (per_edge + 1);
    const Scalar fy = dom.Ly * i / (per_edge + 1);
    push(Vec2(fx, 0.0), Vec2(0.0, -1.0));
    push(Vec2(fx, dom.Ly), Vec2(0.0, 1.0));
    push(Vec2(0.0, fy), Vec2(-1.0, 0.0));
    push(Vec2(dom.Lx, fy), Vec2(1.0, 0.0));
  }
  pts.resize(2, static_cast<Eigen::Index>(p.size()));
  normals.resize(2, static_cast<Eigen::Index>(p.size()));
  for (std::size_t c = 0; c < p.size(); ++c) {
    pts.col(static_cast<Eigen::Index>(c)) = p[c];
    normals.col(static_cast<Eigen::Index>(c)) = n[c];
  }
}

CollocationSet make_collocation(const Domain& dom, const Vasculature& vasc,
                                int interior_target, bool uniform,
                                std::uint64_t seed,
                                const SamplerOptions& opts) {
  CollocationSet set;
  set.interior = uniform ? uniform_grid(dom, vasc, interior_target, opts)
                         : random_points(dom, vasc, interior_target, seed,
                                         opts);
  const bool has_channel = vasc.kind() != VascKind::NoChannel;
  const Vec2 inlet = has_channel ? vasc.inlet() : Vec2(-1.0, -1.0);
  boundary_points(dom, opts.per_edge, has_channel ? &inlet : nullptr,
                  set.boundary, set.boundary_normals);
  if (has_channel) {
    set.curve = vasc.sample(opts.curve_samples);
    set.curve_length = vasc.length();
  }
  set.data_pts.resize(2, 0);
  set.data_theta.resize(0);
  return set;
}

void export_collocation_csv(const CollocationSet& set,
                            const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path);
  // aux carries the arclength for curve rows and the measured temperature
  // for data rows
  f << "x_m,y_m,role,nx,ny,aux\n";
  char buf[160];
  const auto row = [&](Scalar x, Scalar y, const char* role, Scalar nx,
                       Scalar ny, Scalar aux) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g,%.17g,%.17g\n", x,
                  y, role, nx, ny, aux);
    f << buf;
  };
  for (Eigen::Index i = 0; i < set.interior.cols(); ++i)
    row(set.interior(0, i), set.interior(1, i), "interior", 0, 0, 0);
  for (Eigen::Index i = 0; i < set.boundary.cols(); ++i)
    row(set.boundary(0, i), set.boundary(1, i), "boundary",
        set.boundary_normals(0, i), set.boundary_normals(1, i), 0);
  for (const CurveSample& c : set.curve)
    row(c.x.x(), c.x.y(), "curve", c.normal_plus.x(), c.normal_plus.y(),
        c.s);
  for (Eigen::Index i = 0; i < set.data_pts.cols(); ++i)
    row(set.data_pts(0, i), set.data_pts(1, i), "data", 0, 0,
        set.data_theta[i]);
  if (!f) throw IoError("write failed for " + path);
}

}  // namespace coolpinns
