#pragma once

#include <coolpinns/geometry.hpp>
#include <coolpinns/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace coolpinns {

// Collocation data the losses consume; points are columns. Interior points
// stay strictly inside the domain and at least band_halfwidth away from the
// channel; boundary points carry unit outward normals and exclude corners
// and the inlet.
struct CollocationSet {
  MatX interior;          // 2 x N_pde
  MatX boundary;          // 2 x N_bc
  MatX boundary_normals;  // 2 x N_bc
  std::vector<CurveSample> curve;
  Scalar curve_length = 0;  // total channel arclength, 0 without a channel
  MatX data_pts;   // 2 x N_u, inverse mode only
  VecX data_theta;  // N_u observed temperatures
};

struct SamplerOptions {
  Scalar band_halfwidth = 2e-4;  // twice the jump-evaluation offset
  int curve_samples = 101;
  int per_edge = 50;
};

// Cell-centered near-square lattice whose surviving count equals target
// exactly. The lattice shape and a sub-cell shift are searched so that the
// channel exclusion band removes precisely the lattice surplus (zero for a
// perfect factorization); throws ConfigError when no lattice in the search
// family achieves the target.
MatX uniform_grid(const Domain& dom, const Vasculature& vasc, int target,
                  const SamplerOptions& opts = {});

// Seeded rejection sampling: uniform over the domain, band-excluded, exact
// count by construction.
MatX random_points(const Domain& dom, const Vasculature& vasc, int target,
                   std::uint64_t seed, const SamplerOptions& opts = {});

// Equally spaced points on each edge at i*len/(per_edge+1), i = 1..per_edge
// (corners dropped by construction); a point coinciding with the inlet is
// removed. pts and normals get one column per surviving point.
void boundary_points(const Domain& dom, int per_edge, const Vec2* inlet,
                     MatX& pts, MatX& normals);

CollocationSet make_collocation(const Domain& dom, const Vasculature& vasc,
                                int interior_target, bool uniform,
                                std::uint64_t seed,
                                const SamplerOptions& opts = {});

void export_collocation_csv(const CollocationSet& set,
                            const std::string& path);

}  // namespace coolpinns
