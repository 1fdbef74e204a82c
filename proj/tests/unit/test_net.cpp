#include <coolpinns/net.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace coolpinns;

namespace {

const Domain kDom;

OutputTransform default_transform() {
  OutputTransform tf;
  tf.inlet = Vec2(0.0, 0.05);
  tf.theta_in = 296.15;
  tf.lref = 0.1;
  tf.scale = 100.0;
  return tf;
}

// High-order central stencils as the independent derivative oracle. Step
// sizes balance truncation against roundoff so the oracle itself is good to
// ~1e-9 relative, three digits tighter than the asserted bound.
template <typename F>
double fd_grad(const F& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) /
         (12 * h);
}

template <typename F>
double fd_second(const F& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) -
          f(x - 2 * h)) /
         (12 * h * h);
}

// floor = natural magnitude of the channel (unit scale), so a near-zero
// derivative at one point cannot inflate the relative error
double rel_err(double got, double want, double floor_scale) {
  return std::abs(got - want) / std::max(std::abs(want), floor_scale);
}

}  // namespace

TEST_CASE("parameter count matches the layer shapes") {
  CHECK(Mlp(4, 30, 1, kDom).parameter_count() == 2911);
  for (const auto [h, w] : {std::pair{1, 1}, {2, 40}, {7, 30}, {12, 128}}) {
    Eigen::Index want = (2 + 1) * w;
    for (int l = 1; l < h; ++l) want += (w + 1) * w;
    want += w + 1;
    CHECK(Mlp(h, w, 9, kDom).parameter_count() == want);
  }
  CHECK_THROWS_AS(Mlp(0, 30, 1, kDom), ConfigError);
  CHECK_THROWS_AS(Mlp(13, 30, 1, kDom), ConfigError);
  CHECK_THROWS_AS(Mlp(4, 0, 1, kDom), ConfigError);
  CHECK_THROWS_AS(Mlp(4, 129, 1, kDom), ConfigError);
}

TEST_CASE("initialization is seed-deterministic with zero biases") {
  const Mlp a(4, 30, 42, kDom);
  const Mlp b(4, 30, 42, kDom);
  const Mlp c(4, 30, 43, kDom);
  CHECK(a.params() == b.params());
  CHECK(a.params() != c.params());
  // output bias is the last parameter; spot-check a hidden bias block too
  CHECK(a.params()[a.parameter_count() - 1] == 0.0);
  CHECK(a.params().segment(2 * 30, 30).isZero(0.0));
}

TEST_CASE("zero network collapses to the inlet temperature") {
  FieldModel m(3, 20, 7, kDom, default_transform());
  m.net().set_zero();
  MatX pts(2, 4);
  pts << 0.0, 0.03, 0.1, 0.05, 0.05, 0.08, 0.1, 0.05;
  const JetBatch j = m.jet(pts);
  CHECK(j.v.isApproxToConstant(296.15, 1e-15));
  CHECK(j.gx.isZero(0.0));
  CHECK(j.gy.isZero(0.0));
  CHECK(j.hxx.isZero(0.0));
  CHECK(j.hyy.isZero(0.0));
}

TEST_CASE("hard constraint pins the inlet value for any parameters") {
  const OutputTransform tf = default_transform();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    FieldModel m(2, 8, seed, kDom, tf);
    const EvalJet j = evaluate_jet(m, tf.inlet);
    CHECK(j.v == 296.15);
  }
}

TEST_CASE("forward and forward_tape agree bitwise") {
  Mlp net(4, 30, 5, kDom);
  MatX pts(2, 7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  for (int i = 0; i < 7; ++i) {
    pts(0, i) = u(rng);
    pts(1, i) = u(rng);
  }
  const JetBatch a = net.forward(pts);
  const JetBatch b = net.forward_tape(pts);
  CHECK((a.v == b.v).all());
  CHECK((a.gx == b.gx).all());
  CHECK((a.gy == b.gy).all());
  CHECK((a.hxx == b.hxx).all());
  CHECK((a.hyy == b.hyy).all());
}

TEST_CASE("raw network jet matches finite differences") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> up(0.015, 0.085);
  const double hg = 1e-6;  // 4-point gradient stencil
  const double h2 = 5e-5;  // 5-point second-derivative stencil
  // raw output is O(1); its physical derivatives scale with the input
  // normalization factors 2/L and (2/L)^2
  const double fg = 20.0, fh = 400.0;
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net(2 + trial % 3, 16, 1000 + static_cast<std::uint64_t>(trial),
            kDom);
    const double x = up(rng), y = up(rng);
    MatX pt(2, 1);
    pt << x, y;
    const JetBatch j = net.forward(pt);

    const auto fx = [&](double xx) {
      MatX p(2, 1);
      p << xx, y;
      return net.forward(p).v[0];
    };
    const auto fy = [&](double yy) {
      MatX p(2, 1);
      p << x, yy;
      return net.forward(p).v[0];
    };
    CHECK(rel_err(j.gx[0], fd_grad(fx, x, hg), fg) < 1e-6);
    CHECK(rel_err(j.gy[0], fd_grad(fy, y, hg), fg) < 1e-6);
    CHECK(rel_err(j.hxx[0], fd_second(fx, x, h2), fh) < 1e-6);
    CHECK(rel_err(j.hyy[0], fd_second(fy, y, h2), fh) < 1e-6);
  }
}

TEST_CASE("transformed jet matches finite differences away from the inlet") {
  const OutputTransform tf = default_transform();
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> up(0.03, 0.09);
  for (int trial = 0; trial < 10; ++trial) {
    FieldModel m(3, 12, 2000 + static_cast<std::uint64_t>(trial), kDom, tf);
    const double x = up(rng), y = up(rng);
    MatX pt(2, 1);
    pt << x, y;
    const JetBatch j = m.jet(pt);
    const auto fx = [&](double xx) {
      MatX p(2, 1);
      p << xx, y;
      return m.jet(p).v[0];
    };
    const auto fy = [&](double yy) {
      MatX p(2, 1);
      p << x, yy;
      return m.jet(p).v[0];
    };
    // transformed-field scales: value O(100 K) on top of theta_in, so the
    // derivative floors carry the 100 K output scale
    CHECK(rel_err(j.gx[0], fd_grad(fx, x, 1e-6), 1e3) < 1e-6);
    CHECK(rel_err(j.gy[0], fd_grad(fy, y, 1e-6), 1e3) < 1e-6);
    CHECK(rel_err(j.hxx[0], fd_second(fx, x, 5e-5), 4e4) < 1e-6);
    CHECK(rel_err(j.hyy[0], fd_second(fy, y, 5e-5), 4e4) < 1e-6);
  }
}

TEST_CASE("transform jet matches the closed form for a constant raw field") {
  // Raw output forced to 1 by zeroing everything except the output bias:
  // theta = theta_in + scale * r / lref, an exact cone around the inlet.
  const OutputTransform tf = default_transform();
  FieldModel m(2, 6, 3, kDom, tf);
  m.net().set_zero();
  m.net().params()[m.net().parameter_count() - 1] = 1.0;
  for (const Vec2& x :
       {Vec2(0.04, 0.02), Vec2(0.09, 0.05), Vec2(0.01, 0.09)}) {
    const EvalJet j = evaluate_jet(m, x);
    const Vec2 d = x - tf.inlet;
    const double r = d.norm();
    CHECK(j.v == doctest::Approx(296.15 + 100.0 * r / 0.1).epsilon(1e-14));
    CHECK(j.grad.x() ==
          doctest::Approx(100.0 * d.x() / (r * 0.1)).epsilon(1e-12));
    CHECK(j.grad.y() ==
          doctest::Approx(100.0 * d.y() / (r * 0.1)).epsilon(1e-12));
    CHECK(j.hxx == doctest::Approx(100.0 * d.y() * d.y() / (r * r * r * 0.1))
                       .epsilon(1e-12));
    CHECK(j.hyy == doctest::Approx(100.0 * d.x() * d.x() / (r * r * r * 0.1))
                       .epsilon(1e-12));
  }
}

namespace {

// Fixed linear functional over the batch jet: J = sum_i w . jet_i. Its
// parameter gradient comes from one backward call with constant adjoints.
struct Probe {
  FieldModel* m;
  MatX pts;
  double wv = 0.7, wgx = -0.31, wgy = 0.43, whxx = 1.7e-3, whyy = -1.1e-3;

  double value() {
    const JetBatch j = m->jet(pts);
    return wv * j.v.sum() + wgx * j.gx.sum() + wgy * j.gy.sum() +
           whxx * j.hxx.sum() + whyy * j.hyy.sum();
  }
  VecX gradient() {
    const Eigen::Index n = pts.cols();
    m->jet_tape(pts);
    JetBatch adj;
    adj.v = ArrX::Constant(n, wv);
    adj.gx = ArrX::Constant(n, wgx);
    adj.gy = ArrX::Constant(n, wgy);
    adj.hxx = ArrX::Constant(n, whxx);
    adj.hyy = ArrX::Constant(n, whyy);
    VecX g = VecX::Zero(m->net().parameter_count());
    m->backward(adj, g);
    return g;
  }
};

}  // namespace

TEST_CASE("parameter gradient matches central differences") {
  FieldModel m(4, 14, 77, kDom, default_transform());
  MatX pts(2, 9);
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> up(0.02, 0.09);
  for (int i = 0; i < 9; ++i) {
    pts(0, i) = up(rng);
    pts(1, i) = up(rng);
  }
  Probe probe{&m, pts};
  const VecX g = probe.gradient();

  VecX& p = m.net().params();
  std::mt19937_64 pick(66);
  std::uniform_int_distribution<Eigen::Index> idx(0, p.size() - 1);
  for (int k = 0; k < 250; ++k) {
    const Eigen::Index i = (k < 30) ? p.size() - 1 - k : idx(pick);
    const double save = p[i];
    const double h = 1e-6 * (1.0 + std::abs(save));
    p[i] = save + h;
    const double fp = probe.value();
    p[i] = save - h;
    const double fm = probe.value();
    p[i] = save;
    const double fd = (fp - fm) / (2 * h);
    CHECK(std::abs(g[i] - fd) < 1e-5 * std::max(std::abs(fd), 1.0));
  }
}

TEST_CASE("duplicated collocation points add their contributions") {
  FieldModel m(3, 10, 8, kDom, default_transform());
  MatX a(2, 1), b(2, 1), ab(2, 3);
  a << 0.02, 0.07;
  b << 0.08, 0.03;
  ab.col(0) = a;
  ab.col(1) = b;
  ab.col(2) = b;
  Probe pa{&m, a}, pb{&m, b}, pab{&m, ab};
  const VecX want = pa.gradient() + 2.0 * pb.gradient();
  const VecX got = pab.gradient();
  CHECK((got - want).lpNorm<Eigen::Infinity>() <
        1e-12 * (1.0 + want.lpNorm<Eigen::Infinity>()));
}
