#include <coolpinns/net.hpp>

#include <cmath>
#include <random>

namespace coolpinns {

Mlp::Mlp(int hidden_layers, int width, std::uint64_t seed, const Domain& dom)
    : hidden_(hidden_layers), width_(width), dom_(dom) {
  if (hidden_layers < 1 || hidden_layers > 12)
    throw ConfigError("hidden layer count must be in [1, 12]");
  if (width < 1 || width > 128)
    throw ConfigError("layer width must be in [1, 128]");

  Eigen::Index total = 0;
  layers_.reserve(static_cast<std::size_t>(hidden_) + 1);
  int fan_in = 2;
  for (int l = 0; l <= hidden_; ++l) {
    const int fan_out = (l == hidden_) ? 1 : width_;
    Layer lay;
    lay.rows = fan_out;
    lay.cols = fan_in;
    lay.w_off = total;
    total += static_cast<Eigen::Index>(fan_out) * fan_in;
    lay.b_off = total;
    total += fan_out;
    layers_.push_back(lay);
    fan_in = fan_out;
  }
  params_ = VecX::Zero(total);

  std::mt19937_64 rng(seed);
  for (const Layer& lay : layers_) {
    const Scalar limit = std::sqrt(6.0 / (lay.rows + lay.cols));
    std::uniform_real_distribution<Scalar> dist(-limit, limit);
    for (Eigen::Index i = 0; i < Eigen::Index(lay.rows) * lay.cols; ++i)
      params_[lay.w_off + i] = dist(rng);
  }
}

static void activate(const MatX& zv, const MatX& zgx, const MatX& zgy,
                     const MatX& zhxx, const MatX& zhyy, MatX& bv, MatX& bgx,
                     MatX& bgy, MatX& bhxx, MatX& bhyy) {
  const ArrXX u = zv.array().tanh();
  const ArrXX t1 = 1.0 - u.square();
  const ArrXX t2 = -2.0 * u * t1;
  bv = u.matrix();
  bgx = (t1 * zgx.array()).matrix();
  bgy = (t1 * zgy.array()).matrix();
  bhxx = (t1 * zhxx.array() + t2 * zgx.array().square()).matrix();
  bhyy = (t1 * zhyy.array() + t2 * zgy.array().square()).matrix();
}

void Mlp::run(const MatX& pts, JetBatch& out,
              std::vector<Channels>* tape) const {
  const Eigen::Index n = pts.cols();
  const Scalar sx = 2.0 / dom_.Lx;
  const Scalar sy = 2.0 / dom_.Ly;

  Channels a;
  a.v.resize(2, n);
  a.v.row(0) = pts.row(0) * sx;
  a.v.row(1) = pts.row(1) * sy;
  a.v.array() -= 1.0;
  a.gx = MatX::Zero(2, n);
  a.gx.row(0).setConstant(sx);
  a.gy = MatX::Zero(2, n);
  a.gy.row(1).setConstant(sy);
  a.hxx = MatX::Zero(2, n);
  a.hyy = MatX::Zero(2, n);
  if (tape) {
    tape->clear();
    tape->reserve(static_cast<std::size_t>(hidden_) + 1);
    tape->push_back(a);
  }

  Channels z;
  for (int l = 0; l < hidden_; ++l) {
    const auto W = weight(layers_[static_cast<std::size_t>(l)]);
    const auto b = bias(layers_[static_cast<std::size_t>(l)]);
    z.v = W * a.v;
    z.v.colwise() += b;
    z.gx = W * a.gx;
    z.gy = W * a.gy;
    z.hxx = W * a.hxx;
    z.hyy = W * a.hyy;
    if (tape) tape->push_back(z);
    activate(z.v, z.gx, z.gy, z.hxx, z.hyy, a.v, a.gx, a.gy, a.hxx, a.hyy);
  }

  const auto W = weight(layers_.back());
  const auto b = bias(layers_.back());
  out.v = (W * a.v).row(0).transpose().array() + b[0];
  out.gx = (W * a.gx).row(0).transpose().array();
  out.gy = (W * a.gy).row(0).transpose().array();
  out.hxx = (W * a.hxx).row(0).transpose().array();
  out.hyy = (W * a.hyy).row(0).transpose().array();
}

JetBatch Mlp::forward(const MatX& pts) const {
  JetBatch out;
  run(pts, out, nullptr);
  return out;
}

JetBatch Mlp::forward_tape(const MatX& pts) {
  JetBatch out;
  run(pts, out, &tape_);
  return out;
}

void Mlp::backward(const JetBatch& out_adj, VecX& grad) const {
  if (tape_.empty()) throw NumericalError("backward without a taped forward");

  // adjoint of the (linear) output layer
  MatX av = out_adj.v.transpose().matrix();
  MatX agx = out_adj.gx.transpose().matrix();
  MatX agy = out_adj.gy.transpose().matrix();
  MatX ahxx = out_adj.hxx.transpose().matrix();
  MatX ahyy = out_adj.hyy.transpose().matrix();

  Channels prev;
  if (hidden_ >= 1) {
    const Channels& zt = tape_.back();
    activate(zt.v, zt.gx, zt.gy, zt.hxx, zt.hyy, prev.v, prev.gx, prev.gy,
             prev.hxx, prev.hyy);
  }

  const Layer& lout = layers_.back();
  Eigen::Map<MatX> wg_out(grad.data() + lout.w_off, lout.rows, lout.cols);
  wg_out += av * prev.v.transpose() + agx * prev.gx.transpose() +
            agy * prev.gy.transpose() + ahxx * prev.hxx.transpose() +
            ahyy * prev.hyy.transpose();
  grad[lout.b_off] += av.sum();

  const auto wout = weight(lout);
  MatX bv = wout.transpose() * av;
  MatX bgx = wout.transpose() * agx;
  MatX bgy = wout.transpose() * agy;
  MatX bhxx = wout.transpose() * ahxx;
  MatX bhyy = wout.transpose() * ahyy;

  for (int l = hidden_; l >= 1; --l) {
    const Channels& z = tape_[static_cast<std::size_t>(l)];
    const ArrXX u = z.v.array().tanh();
    const ArrXX t1 = 1.0 - u.square();
    const ArrXX t2 = -2.0 * u * t1;
    const ArrXX t3 = t1 * (6.0 * u.square() - 2.0);

    MatX zv_adj =
        (t1 * bv.array() +
         t2 * (z.gx.array() * bgx.array() + z.gy.array() * bgy.array() +
               z.hxx.array() * bhxx.array() + z.hyy.array() * bhyy.array()) +
         t3 * (z.gx.array().square() * bhxx.array() +
               z.gy.array().square() * bhyy.array()))
            .matrix();
    MatX zgx_adj =
        (t1 * bgx.array() + 2.0 * t2 * z.gx.array() * bhxx.array()).matrix();
    MatX zgy_adj =
        (t1 * bgy.array() + 2.0 * t2 * z.gy.array() * bhyy.array()).matrix();
    MatX zhxx_adj = (t1 * bhxx.array()).matrix();
    MatX zhyy_adj = (t1 * bhyy.array()).matrix();

    Channels aprev;
    if (l == 1) {
      aprev = tape_[0];
    } else {
      const Channels& zp = tape_[static_cast<std::size_t>(l - 1)];
      activate(zp.v, zp.gx, zp.gy, zp.hxx, zp.hyy, aprev.v, aprev.gx,
               aprev.gy, aprev.hxx, aprev.hyy);
    }

    const Layer& lay = layers_[static_cast<std::size_t>(l - 1)];
    Eigen::Map<MatX> wg(grad.data() + lay.w_off, lay.rows, lay.cols);
    wg += zv_adj * aprev.v.transpose() + zgx_adj * aprev.gx.transpose() +
          zgy_adj * aprev.gy.transpose() + zhxx_adj * aprev.hxx.transpose() +
          zhyy_adj * aprev.hyy.transpose();
    Eigen::Map<VecX> bg(grad.data() + lay.b_off, lay.rows);
    bg += zv_adj.rowwise().sum();

    if (l > 1) {
      const auto w = weight(lay);
      bv = w.transpose() * zv_adj;
      bgx = w.transpose() * zgx_adj;
      bgy = w.transpose() * zgy_adj;
      bhxx = w.transpose() * zhxx_adj;
      bhyy = w.transpose() * zhyy_adj;
    }
  }
}

void OutputTransform::distance_jet(const MatX& pts, JetBatch& d) const {
  const Eigen::Index n = pts.cols();
  d.resize(n);
  const Scalar guard = 1e-12 * lref;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar dx = pts(0, i) - inlet.x();
    const Scalar dy = pts(1, i) - inlet.y();
    const Scalar r = std::hypot(dx, dy);
    if (r < guard) {
      d.v[i] = d.gx[i] = d.gy[i] = d.hxx[i] = d.hyy[i] = 0.0;
      continue;
    }
    d.v[i] = r / lref;
    d.gx[i] = dx / (r * lref);
    d.gy[i] = dy / (r * lref);
    const Scalar r3 = r * r * r;
    d.hxx[i] = dy * dy / (r3 * lref);
    d.hyy[i] = dx * dx / (r3 * lref);
  }
}

void OutputTransform::apply(const MatX& pts, const JetBatch& raw,
                            JetBatch& theta) const {
  JetBatch d;
  distance_jet(pts, d);
  const Scalar s = scale;
  theta.v = theta_in + s * d.v * raw.v;
  theta.gx = s * (d.gx * raw.v + d.v * raw.gx);
  theta.gy = s * (d.gy * raw.v + d.v * raw.gy);
  theta.hxx = s * (d.hxx * raw.v + 2.0 * d.gx * raw.gx + d.v * raw.hxx);
  theta.hyy = s * (d.hyy * raw.v + 2.0 * d.gy * raw.gy + d.v * raw.hyy);
}

void OutputTransform::pullback(const MatX& pts, const JetBatch& theta_adj,
                               JetBatch& raw_adj) const {
  JetBatch d;
  distance_jet(pts, d);
  const Scalar s = scale;
  raw_adj.v = s * (d.v * theta_adj.v + d.gx * theta_adj.gx +
                   d.gy * theta_adj.gy + d.hxx * theta_adj.hxx +
                   d.hyy * theta_adj.hyy);
  raw_adj.gx = s * (d.v * theta_adj.gx + 2.0 * d.gx * theta_adj.hxx);
  raw_adj.gy = s * (d.v * theta_adj.gy + 2.0 * d.gy * theta_adj.hyy);
  raw_adj.hxx = s * d.v * theta_adj.hxx;
  raw_adj.hyy = s * d.v * theta_adj.hyy;
}

JetBatch FieldModel::jet(const MatX& pts) const {
  JetBatch theta;
  const JetBatch raw = net_.forward(pts);
  tf_.apply(pts, raw, theta);
  return theta;
}

JetBatch FieldModel::jet_tape(const MatX& pts) {
  taped_pts_ = pts;
  JetBatch theta;
  const JetBatch raw = net_.forward_tape(pts);
  tf_.apply(pts, raw, theta);
  return theta;
}

void FieldModel::backward(const JetBatch& theta_adj, VecX& grad) const {
  JetBatch raw_adj;
  tf_.pullback(taped_pts_, theta_adj, raw_adj);
  net_.backward(raw_adj, grad);
}

EvalJet evaluate_jet(const FieldModel& model, const Vec2& x) {
  MatX pts(2, 1);
  pts.col(0) = x;
  const JetBatch b = model.jet(pts);
  EvalJet j;
  j.v = b.v[0];
  j.grad = Vec2(b.gx[0], b.gy[0]);
  j.hxx = b.hxx[0];
  j.hyy = b.hyy[0];
  return j;
}

}  // namespace coolpinns
