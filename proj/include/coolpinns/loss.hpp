#pragma once

#include <coolpinns/net.hpp>
#include <coolpinns/physics.hpp>
#include <coolpinns/sampler.hpp>

#include <vector>

namespace coolpinns {

struct LossWeights {
  Scalar pde = 1.0;
  Scalar bc = 1.0;
  Scalar jump = 1.0;
  Scalar data = 1.0;
};

struct LossOptions {
  // distance of the one-sided flux probes from the channel, along +/- n_plus
  Scalar delta_offset = 1e-4;  // m
  // soft easing window for the radiation temperature; identity inside
  // [clamp_lo, clamp_hi], saturating within clamp_width outside, so the
  // quartic term stays bounded for arbitrarily wild network outputs
  Scalar clamp_lo = 150.0;     // K
  Scalar clamp_hi = 1500.0;    // K
  Scalar clamp_width = 50.0;   // K
  Scalar delta_theta = 100.0;  // K, data and jump nondimensional scale
  LossWeights weights;
};

// radiation temperature after the soft clamp, with its derivative
struct ClampedTemp {
  Scalar value;
  Scalar deriv;
};
ClampedTemp soft_radiation_temp(Scalar v, const LossOptions& opts);

// nondimensional loss parts; total is the weighted sum the optimizer sees
struct LossResult {
  Scalar pde = 0.0;
  Scalar bc_neumann = 0.0;
  Scalar bc_dirichlet = 0.0;
  Scalar jump = 0.0;
  Scalar data = 0.0;
  Scalar total = 0.0;
  // d total / d kappa, kappa = ln(K / 1 W m^-1 K^-1)
  Scalar dkappa = 0.0;
  bool offset_clipped = false;
};

// Evaluation points for every loss term, assembled into one batch so the
// network runs a single forward/backward pass per step. Column layout:
// [interior | boundary | dirichlet pin | curve on | curve plus | curve minus
//  | data].
struct LossBatch {
  MatX pts;
  Eigen::Index n_interior = 0;
  Eigen::Index n_boundary = 0;
  Eigen::Index n_dirichlet = 0;
  Eigen::Index n_curve = 0;
  Eigen::Index n_data = 0;
  MatX boundary_normals;
  std::vector<CurveSample> curve;
  VecX deltas;  // per-sample probe offsets actually used (m)
  Scalar curve_length = 0;
  VecX data_theta;
  bool offset_clipped = false;

  Eigen::Index total() const {
    return n_interior + n_boundary + n_dirichlet + 3 * n_curve + n_data;
  }
};

// Lays out the batch and shrinks any flux probe that would leave the domain
// (both sides of that sample shrink together, and the batch is flagged).
LossBatch assemble_loss_batch(const FieldModel& model,
                              const CollocationSet& set, const Domain& dom,
                              const LossOptions& opts);

// Pure jet-level core: losses, optional adjoint seeds for the network
// backward pass, and the conductivity sensitivity. K is the conductivity
// the losses use, which the inverse mode decouples from p.conductivity.
LossResult loss_from_jets(const LossBatch& b, const JetBatch& jets,
                          const ModelParams& p, Scalar K,
                          const LossOptions& opts, JetBatch* adj);

// One full loss evaluation. kappa, when given, overrides the conductivity
// with exp(*kappa); grad, when given, receives d total / d params.
LossResult evaluate_loss(FieldModel& model, const CollocationSet& set,
                         const Domain& dom, const ModelParams& p,
                         const LossOptions& opts,
                         const Scalar* kappa = nullptr,
                         VecX* grad = nullptr);

}  // namespace coolpinns
