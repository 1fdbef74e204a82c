#include <coolpinns/loss.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace coolpinns;

namespace {

LossBatch interior_only(Eigen::Index n) {
  LossBatch b;
  b.n_interior = n;
  return b;
}

}  // namespace

TEST_CASE("interior loss vanishes at equilibrium and is unity at ambient") {
  const ModelParams p;
  const LossOptions opts;
  const LossBatch b = interior_only(3);
  JetBatch jets;

  jets.set_zero(3);
  jets.v.setConstant(equilibrium_temperature(p));
  LossResult r = loss_from_jets(b, jets, p, p.conductivity, opts, nullptr);
  CHECK(r.pde < 1e-24);
  CHECK(r.total == r.pde);

  jets.v.setConstant(p.theta_amb);
  r = loss_from_jets(b, jets, p, p.conductivity, opts, nullptr);
  CHECK(r.pde == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("boundary loss matches its closed form") {
  const ModelParams p;
  const LossOptions opts;
  LossBatch b;
  b.n_boundary = 1;
  b.boundary_normals.resize(2, 1);
  b.boundary_normals.col(0) = Vec2(1.0, 0.0);
  JetBatch jets;
  jets.set_zero(1);
  const Scalar G = 137.5;
  jets.gx[0] = G;
  const LossResult r =
      loss_from_jets(b, jets, p, p.conductivity, opts, nullptr);
  const Scalar want = std::pow(p.conductivity * G / p.heat_flux, 2);
  CHECK(r.bc_neumann == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("kink field closes the jump identity") {
  // theta = c + a*|y - yc| around a horizontal channel: one-sided gradients
  // (0, +a) and (0, -a), so t*[[q]].n+ = -2*t*K*a; the mismatch cancels
  // exactly when the tangential gradient is -2*t*K*a / (mdot*c_f)
  const ModelParams p;
  const LossOptions opts;
  const Scalar K = p.conductivity;
  const Scalar a = 1234.5;

  LossBatch b;
  b.n_curve = 1;
  CurveSample s;
  s.x = Vec2(0.05, 0.05);
  s.s = 0.05;
  s.tangent = Vec2(1.0, 0.0);
  s.normal_plus = Vec2(0.0, 1.0);
  b.curve = {s};
  b.curve_length = 0.1;
  b.deltas = VecX::Constant(1, opts.delta_offset);

  JetBatch jets;
  jets.set_zero(3);  // [on curve | plus side | minus side]
  jets.gy[1] = a;
  jets.gy[2] = -a;

  const Scalar sigma = p.mcf() * opts.delta_theta / b.curve_length;
  const Scalar want_mis = -2.0 * p.thickness * K * a;

  LossResult r = loss_from_jets(b, jets, p, K, opts, nullptr);
  CHECK(std::sqrt(r.jump) * sigma ==
        doctest::Approx(std::abs(want_mis)).epsilon(1e-12));

  jets.gx[0] = want_mis / p.mcf();
  r = loss_from_jets(b, jets, p, K, opts, nullptr);
  CHECK(std::sqrt(r.jump) * sigma <= 1e-10 * std::abs(want_mis));
}

TEST_CASE("interior residual equals the physics residual inside the clamp") {
  const ModelParams p;
  const LossOptions opts;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<Scalar> uv(300.0, 500.0);
  std::uniform_real_distribution<Scalar> ul(-4e5, 4e5);
  const LossBatch b = interior_only(1);
  JetBatch jets;
  for (int trial = 0; trial < 10; ++trial) {
    jets.set_zero(1);
    jets.v[0] = uv(rng);
    jets.hxx[0] = ul(rng);
    const LossResult r =
        loss_from_jets(b, jets, p, p.conductivity, opts, nullptr);
    const Scalar want = pde_residual(jets.v[0], jets.hxx[0], p);
    CHECK(std::sqrt(r.pde) * p.heat_flux ==
          doctest::Approx(std::abs(want)).epsilon(1e-13));
  }
}

TEST_CASE("soft radiation clamp is inert inside and bounded outside") {
  const LossOptions opts;
  const ClampedTemp mid = soft_radiation_temp(400.0, opts);
  CHECK(mid.value == 400.0);
  CHECK(mid.deriv == 1.0);

  const ClampedTemp hot = soft_radiation_temp(1e7, opts);
  CHECK(hot.value <= opts.clamp_hi + opts.clamp_width);
  CHECK(hot.value > opts.clamp_hi);
  CHECK(hot.deriv >= 0.0);

  const ClampedTemp cold = soft_radiation_temp(-1e7, opts);
  CHECK(cold.value >= opts.clamp_lo - opts.clamp_width);
  CHECK(cold.value > 0.0);

  // C1 at the window edges
  const ClampedTemp lo = soft_radiation_temp(opts.clamp_hi + 1e-9, opts);
  CHECK(lo.value == doctest::Approx(opts.clamp_hi).epsilon(1e-12));
  CHECK(lo.deriv == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("assembled batch lays out blocks and clips crowded probes") {
  const Domain dom;
  const Vasculature vasc = Vasculature::build(VascKind::StraightCenter, dom);
  SamplerOptions sopts;
  sopts.per_edge = 2;
  sopts.curve_samples = 5;
  const CollocationSet set = make_collocation(dom, vasc, 4, true, 1, sopts);

  OutputTransform tf;
  tf.inlet = vasc.inlet();
  FieldModel model(1, 4, 11, dom, tf);

  LossOptions opts;
  const LossBatch b = assemble_loss_batch(model, set, dom, opts);
  CHECK(b.total() == 4 + 8 + 1 + 3 * 5);
  CHECK(!b.offset_clipped);
  CHECK((b.pts.middleCols(0, 4) - set.interior).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((b.pts.col(12) - vasc.inlet()).norm() == 0.0);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Vec2 on = b.pts.col(13 + i);
    const Vec2 plus = b.pts.col(13 + 5 + i);
    const Vec2 minus = b.pts.col(13 + 10 + i);
    CHECK((plus - on - opts.delta_offset * b.curve[i].normal_plus).norm() <
          1e-16);
    CHECK((minus - on + opts.delta_offset * b.curve[i].normal_plus).norm() <
          1e-16);
  }

  LossOptions wide = opts;
  wide.delta_offset = 0.06;  // probes would cross the domain walls
  const LossBatch c = assemble_loss_batch(model, set, dom, wide);
  CHECK(c.offset_clipped);
  for (Eigen::Index i = 0; i < c.total(); ++i)
    CHECK(dom.contains(c.pts.col(i)));
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(c.deltas[i] > 0.0);
    CHECK(c.deltas[i] < wide.delta_offset);
  }
}

TEST_CASE("loss gradient matches finite differences") {
  const Domain dom;
  const Vasculature vasc = Vasculature::build(VascKind::StraightCenter, dom);
  SamplerOptions sopts;
  sopts.per_edge = 2;
  sopts.curve_samples = 7;
  CollocationSet set = make_collocation(dom, vasc, 20, false, 5, sopts);
  set.data_pts.resize(2, 3);
  set.data_pts.col(0) = Vec2(0.02, 0.03);
  set.data_pts.col(1) = Vec2(0.07, 0.06);
  set.data_pts.col(2) = Vec2(0.04, 0.08);
  set.data_theta.resize(3);
  set.data_theta << 300.0, 310.0, 320.0;

  OutputTransform tf;
  tf.inlet = vasc.inlet();
  FieldModel model(2, 8, 3, dom, tf);

  ModelParams p;
  LossOptions opts;
  opts.weights = {1.3, 0.7, 2.2, 1.9};
  Scalar kappa = std::log(2.0);

  VecX grad;
  const LossResult r =
      evaluate_loss(model, set, dom, p, opts, &kappa, &grad);
  REQUIRE(grad.size() == model.net().parameter_count());

  // the tape path and the plain path agree exactly
  const LossResult r2 = evaluate_loss(model, set, dom, p, opts, &kappa);
  CHECK(r.total == r2.total);
  CHECK(r.pde == r2.pde);
  CHECK(r.jump == r2.jump);

  const auto loss_at = [&]() {
    return evaluate_loss(model, set, dom, p, opts, &kappa).total;
  };

  VecX& params = model.net().params();
  const Eigen::Index np = params.size();
  int checked = 0;
  for (Eigen::Index i = 0; i < np; i += 7, ++checked) {
    const Scalar save = params[i];
    const Scalar h = 1e-6 * (1.0 + std::abs(save));
    params[i] = save + h;
    const Scalar up = loss_at();
    params[i] = save - h;
    const Scalar dn = loss_at();
    params[i] = save;
    const Scalar fd = (up - dn) / (2.0 * h);
    CHECK(std::abs(fd - grad[i]) <= 1e-5 * std::max(std::abs(fd), 1.0));
  }
  CHECK(checked >= 15);

  const Scalar hk = 1e-6;
  Scalar kp = kappa + hk, km = kappa - hk;
  const Scalar up = evaluate_loss(model, set, dom, p, opts, &kp).total;
  const Scalar dn = evaluate_loss(model, set, dom, p, opts, &km).total;
  const Scalar fdk = (up - dn) / (2.0 * hk);
  CHECK(std::abs(fdk - r.dkappa) <= 1e-5 * std::max(std::abs(fdk), 1.0));
}

TEST_CASE("weights scale their terms into the total") {
  const Domain dom;
  const Vasculature vasc = Vasculature::build(VascKind::StraightCenter, dom);
  SamplerOptions sopts;
  sopts.per_edge = 2;
  sopts.curve_samples = 3;
  const CollocationSet set = make_collocation(dom, vasc, 8, false, 9, sopts);

  OutputTransform tf;
  tf.inlet = vasc.inlet();
  FieldModel model(1, 6, 21, dom, tf);

  const ModelParams p;
  LossOptions opts;
  const LossResult base = evaluate_loss(model, set, dom, p, opts);

  LossOptions scaled = opts;
  scaled.weights = {2.0, 3.0, 4.0, 5.0};
  const LossResult r = evaluate_loss(model, set, dom, p, scaled);
  CHECK(r.pde == base.pde);
  CHECK(r.bc_neumann == base.bc_neumann);
  CHECK(r.jump == base.jump);
  const Scalar want = 2.0 * base.pde +
                      3.0 * (base.bc_neumann + base.bc_dirichlet) +
                      4.0 * base.jump + 5.0 * base.data;
  CHECK(r.total == doctest::Approx(want).epsilon(1e-14));
}
