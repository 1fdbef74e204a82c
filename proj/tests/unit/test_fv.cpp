#include <doctest.h>

#include <cmath>

#include "coolpinns/fv.hpp"

using namespace coolpinns;

namespace {
const Domain kDom{};
}

TEST_CASE("no channel relaxes to the uniform equilibrium") {
  ModelParams p;
  const Vasculature none = Vasculature::build(VascKind::NoChannel, kDom);
  const FvResult r = solve_fv(none, kDom, p, 16, 16);
  const double star = equilibrium_temperature(p);
  CHECK((r.grid.theta.array() - star).abs().maxCoeff() < 1e-9);
  CHECK(r.balance.coolant == 0.0);
  CHECK(std::abs(r.balance.closure_rel()) < 1e-10);
}

TEST_CASE("straight channel solve: bounds, monotone Newton, closure") {
  ModelParams p;
  p.flow_ml_min = 10.0;
  const Vasculature v = Vasculature::build(VascKind::StraightCenter, kDom);
  const FvResult r = solve_fv(v, kDom, p, 40, 40);

  // Discrete maximum principle on the cooled panel: nothing dips below the
  // coolant inlet temperature.
  CHECK(r.grid.theta.minCoeff() >= p.theta_in - 1e-8);
  CHECK(r.grid.theta.maxCoeff() <= equilibrium_temperature(p) + 1e-8);
  CHECK(r.theta_inlet == doctest::Approx(p.theta_in).epsilon(1e-12));
  CHECK(r.theta_outlet > p.theta_in);

  for (std::size_t i = 2; i < r.residual_history.size(); ++i)
    CHECK(r.residual_history[i] <= r.residual_history[i - 1] * (1.0 + 1e-12));

  // The only unaccounted energy is the pinned half-cell's share of the
  // input flux, (hx/2*hy)/Area = 3.125e-4 on this grid.
  CHECK(std::abs(r.balance.closure_rel()) < 4e-4);
}

TEST_CASE("channel alignment is enforced") {
  ModelParams p;
  const Vasculature q = Vasculature::build(VascKind::StraightQuarter, kDom);
  // y = 25 mm sits between node rows of a 50-cell grid.
  CHECK_THROWS_AS(solve_fv(q, kDom, p, 50, 50), ConfigError);
  // ... but on the rows of a 40-cell grid.
  CHECK_NOTHROW(solve_fv(q, kDom, p, 40, 40));

  const Vasculature diag =
      Vasculature::polyline({Vec2(0.0, 0.0), Vec2(0.1, 0.1)}, kDom);
  CHECK_THROWS_AS(solve_fv(diag, kDom, p, 20, 20), ConfigError);

  const Vasculature sine = Vasculature::build(VascKind::SineWave, kDom);
  CHECK_THROWS_AS(solve_fv(sine, kDom, p, 40, 40), ConfigError);

  const Vasculature c = Vasculature::build(VascKind::StraightCenter, kDom);
  CHECK_THROWS_AS(solve_fv(c, kDom, p, 4, 4), ConfigError);
}

TEST_CASE("bilinear interpolation on the node grid") {
  FieldGrid g;
  g.nx = 2;
  g.ny = 2;
  g.hx = 0.05;
  g.hy = 0.05;
  g.Lx = 0.1;
  g.Ly = 0.1;
  g.theta.resize(9);
  for (int j = 0; j <= 2; ++j)
    for (int i = 0; i <= 2; ++i) g.theta[g.idx(i, j)] = 10.0 * i + j;

  CHECK(g.interpolate(Vec2(0.05, 0.05)) ==
        doctest::Approx(g.theta[g.idx(1, 1)]).epsilon(1e-14));
  // Midpoint of the edge between nodes (0,0) and (1,0).
  const double mid = 0.5 * (g.theta[g.idx(0, 0)] + g.theta[g.idx(1, 0)]);
  CHECK(g.interpolate(Vec2(0.025, 0.0)) == doctest::Approx(mid).epsilon(1e-14));
  // A corner evaluates to the stored corner value.
  CHECK(g.interpolate(Vec2(0.1, 0.1)) ==
        doctest::Approx(g.theta[g.idx(2, 2)]).epsilon(1e-14));
}

TEST_CASE("synthesized observations: exact without noise, seeded with") {
  ModelParams p;
  const Vasculature none = Vasculature::build(VascKind::NoChannel, kDom);
  const FvResult r = solve_fv(none, kDom, p, 16, 16);
  const std::vector<Vec2> pts = {Vec2(0.0125, 0.025), Vec2(0.05, 0.05),
                                 Vec2(0.09, 0.01)};
  const VecX clean = synthesize_inverse_data(r.grid, pts, 0.0, 7);
  for (int i = 0; i < clean.size(); ++i)
    CHECK(clean[i] ==
          doctest::Approx(r.grid.interpolate(pts[i])).epsilon(1e-14));

  const VecX a = synthesize_inverse_data(r.grid, pts, 0.5, 42);
  const VecX b = synthesize_inverse_data(r.grid, pts, 0.5, 42);
  const VecX c = synthesize_inverse_data(r.grid, pts, 0.5, 43);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).norm() > 0.0);
  CHECK((a - clean).norm() > 0.0);
}

TEST_CASE("upwind and central coolant schemes agree at low flow") {
  ModelParams p;
  p.flow_ml_min = 1.0;
  const Vasculature v = Vasculature::build(VascKind::StraightCenter, kDom);
  FvOptions up, ce;
  ce.central_coolant = true;
  const FvResult a = solve_fv(v, kDom, p, 50, 50, up);
  const FvResult b = solve_fv(v, kDom, p, 50, 50, ce);
  const double ma = mean_surface_temperature(a.grid);
  const double mb = mean_surface_temperature(b.grid);
  CHECK(std::abs(ma - mb) < 5e-3 * ma);
}

TEST_CASE("flow reversal leaves the radiation-free mean unchanged") {
  ModelParams p;
  p.radiation = false;
  p.flow_ml_min = 10.0;
  const Vasculature v = Vasculature::build(VascKind::SteppedMst, kDom);
  const FvResult f = solve_fv(v, kDom, p, 50, 50);
  const FvResult r = solve_fv(v.reversed(), kDom, p, 50, 50);
  const double mf = mean_surface_temperature(f.grid);
  const double mr = mean_surface_temperature(r.grid);
  CHECK(std::abs(mf - mr) / mf < 5e-3);
}

TEST_CASE("field comparison: identity, offset arithmetic, area weighting") {
  FieldGrid g;
  g.nx = g.ny = 4;
  g.Lx = g.Ly = 0.1;
  g.hx = g.hy = 0.1 / 4;
  g.theta = VecX::Constant(25, 340.0);

  const FieldComparison same = compare_fields(g, g);
  CHECK(same.min_ratio == 1.0);
  CHECK(same.below_fraction == 0.0);
  CHECK(same.rms_error == 0.0);

  FieldGrid off = g;
  off.theta.array() += 1.0;
  const FieldComparison one = compare_fields(off, g);
  CHECK(std::abs(one.min_ratio - (341.0 / 340.0)) < 1e-15);
  CHECK(std::abs(one.rms_error - 1.0) < 1e-12);

  // one corner node dips below threshold: quarter-cell share of 16 cells
  FieldGrid dip = g;
  dip.theta[dip.idx(0, 0)] = 0.9 * 340.0;
  const FieldComparison frac = compare_fields(dip, g);
  CHECK(std::abs(frac.below_fraction - 0.25 / 16.0) < 1e-15);
  CHECK(std::abs(frac.min_ratio - 0.9) < 1e-12);

  FieldGrid other = g;
  other.nx = 5;
  CHECK_THROWS_AS((void)compare_fields(other, g), ConfigError);
}
