#pragma once

#include <coolpinns/geometry.hpp>
#include <coolpinns/types.hpp>

#include <cstdint>
#include <vector>

namespace coolpinns {

// Jet of a scalar field over a batch of points: value, spatial gradient and
// pure second derivatives, all in physical units (K, K/m, K/m^2). Points are
// columns of a 2 x N matrix; channel i of the jet belongs to column i.
struct JetBatch {
  ArrX v, gx, gy, hxx, hyy;

  void resize(Eigen::Index n) {
    v.resize(n);
    gx.resize(n);
    gy.resize(n);
    hxx.resize(n);
    hyy.resize(n);
  }
  void set_zero(Eigen::Index n) {
    v = ArrX::Zero(n);
    gx = ArrX::Zero(n);
    gy = ArrX::Zero(n);
    hxx = ArrX::Zero(n);
    hyy = ArrX::Zero(n);
  }
  Eigen::Index size() const { return v.size(); }
};

// Single-point view of a jet.
struct EvalJet {
  Scalar v = 0;
  Vec2 grad = Vec2::Zero();
  Scalar hxx = 0;
  Scalar hyy = 0;
};

// Dense tanh network mapping domain coordinates (normalized to [-1,1]^2
// internally) to one raw scalar channel. The forward pass propagates the
// full jet through every layer, so gradients and pure second derivatives
// are exact to machine precision; the reverse pass turns adjoint seeds on
// the output jet into the exact loss gradient for every weight and bias.
class Mlp {
 public:
  // Glorot-uniform weights, zero biases, deterministic under the seed.
  Mlp(int hidden_layers, int width, std::uint64_t seed, const Domain& dom);

  int hidden_layers() const { return hidden_; }
  int width() const { return width_; }
  Eigen::Index parameter_count() const { return params_.size(); }
  VecX& params() { return params_; }
  const VecX& params() const { return params_; }
  const Domain& domain() const { return dom_; }

  void set_zero() { params_.setZero(); }

  // pts: 2 x N physical coordinates.
  JetBatch forward(const MatX& pts) const;
  // Same result as forward but records the per-layer state that backward
  // consumes.
  JetBatch forward_tape(const MatX& pts);
  // Accumulates the gradient of a scalar loss into grad, given the loss
  // adjoints of each output-jet channel from the latest forward_tape call.
  // grad must already have parameter_count() entries.
  void backward(const JetBatch& out_adj, VecX& grad) const;

 private:
  struct Layer {
    Eigen::Index w_off, b_off;
    int rows, cols;
  };
  struct Channels {
    MatX v, gx, gy, hxx, hyy;
  };

  Eigen::Map<const MatX> weight(const Layer& l) const {
    return {params_.data() + l.w_off, l.rows, l.cols};
  }
  Eigen::Map<const VecX> bias(const Layer& l) const {
    return {params_.data() + l.b_off, l.rows};
  }

  void run(const MatX& pts, JetBatch& out, std::vector<Channels>* tape) const;

  int hidden_;
  int width_;
  Domain dom_;
  VecX params_;
  std::vector<Layer> layers_;

  // pre-activation jets per hidden layer plus the input jet, recorded by
  // forward_tape
  std::vector<Channels> tape_;
  MatX in_v_, in_gx_, in_gy_;
};

// Hard Dirichlet output map theta(x) = theta_in + d(x) * raw(x) * scale with
// d(x) = |x - inlet| / lref, so theta(inlet) = theta_in for every parameter
// vector. apply pushes a raw-network jet through the product rule; pullback
// turns theta-jet adjoints into raw-jet adjoints. The jet of d is singular
// at the inlet itself; inside a tiny guard radius the whole d-jet is zeroed,
// which pins the value exactly and is never sampled by collocation sets.
struct OutputTransform {
  Vec2 inlet = Vec2::Zero();
  Scalar theta_in = 296.15;
  Scalar lref = 0.1;
  Scalar scale = 100.0;

  void distance_jet(const MatX& pts, JetBatch& d) const;
  void apply(const MatX& pts, const JetBatch& raw, JetBatch& theta) const;
  void pullback(const MatX& pts, const JetBatch& theta_adj,
                JetBatch& raw_adj) const;
};

// Network plus transform: the temperature field the losses consume.
class FieldModel {
 public:
  FieldModel(int hidden_layers, int width, std::uint64_t seed,
             const Domain& dom, const OutputTransform& tf)
      : net_(hidden_layers, width, seed, dom), tf_(tf) {}

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  const OutputTransform& transform() const { return tf_; }

  JetBatch jet(const MatX& pts) const;
  JetBatch jet_tape(const MatX& pts);
  // Gradient of the loss w.r.t. network parameters given theta-jet adjoints
  // paired with the latest jet_tape batch.
  void backward(const JetBatch& theta_adj, VecX& grad) const;

 private:
  Mlp net_;
  OutputTransform tf_;
  MatX taped_pts_;
};

EvalJet evaluate_jet(const FieldModel& model, const Vec2& x);

}  // namespace coolpinns
