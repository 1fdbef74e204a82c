#pragma once

#include <vector>

#include "coolpinns/geometry.hpp"
#include "coolpinns/physics.hpp"
#include "coolpinns/types.hpp"

namespace coolpinns {

// Node-centered temperature field on a uniform nx-by-ny cell grid; values sit
// at the (nx+1)*(ny+1) cell corners, row-major by j.
struct FieldGrid {
  int nx = 0, ny = 0;
  Scalar hx = 0.0, hy = 0.0;
  Scalar Lx = 0.0, Ly = 0.0;
  VecX theta;

  int idx(int i, int j) const { return j * (nx + 1) + i; }
  Vec2 node(int i, int j) const { return Vec2(i * hx, j * hy); }

  // Bilinear interpolation; exact at nodes, the two-node average at an edge
  // midpoint. p must lie in the domain.
  Scalar interpolate(const Vec2& p) const;
};

// Arithmetic mean over the uniformly spaced nodes.
Scalar mean_surface_temperature(const FieldGrid& g);

struct EnergyBalance {
  Scalar input = 0.0;       // f0 * area
  Scalar convection = 0.0;  // integral of h_T (theta - theta_amb)
  Scalar radiation = 0.0;   // integral of eps sigma (theta^4 - theta_amb^4)
  Scalar coolant = 0.0;     // mdot c_f (theta_outlet - theta_inlet)
  Scalar closure() const {
    return input - convection - radiation - coolant;
  }
  Scalar closure_rel() const { return closure() / input; }
};

struct FvOptions {
  int newton_max_iters = 100;
  int max_halvings = 5;
  Scalar tol_rel = 1e-10;  // convergence: ||F||_inf < tol_rel * f0 (watts)
  // Central differencing of the coolant term loses diagonal dominance at
  // high flow rates; upwind is the production scheme.
  bool central_coolant = false;
  // Discrete treatment of the point Dirichlet at the coolant inlet. The
  // pinned node's balance equation is replaced by theta = theta_in either
  // way; with conduction cut, the pin sets the coolant entry temperature
  // without acting as a parasitic point heat sink (a point constraint
  // carries no flux in the continuum limit), which keeps the global energy
  // identity telescoping on any grid.
  bool inlet_conduction = false;
};

struct FvResult {
  FieldGrid grid;
  int newton_iters = 0;
  std::vector<Scalar> residual_history;  // ||F||_inf after each iteration
  EnergyBalance balance;
  Scalar theta_outlet = 0.0;
  Scalar theta_inlet = 0.0;
};

// Nonlinear finite-volume solve of the panel balance with the channel's
// upwinded coolant pickup. The channel must follow grid lines with its
// vertices on nodes; pass a NoChannel vasculature for the plain panel.
// Newton from theta = theta_amb, damped on residual increase.
FvResult solve_fv(const Vasculature& vasc, const Domain& dom,
                  const ModelParams& p, int nx, int ny,
                  const FvOptions& opts = {});

// Energy audit of an arbitrary node field (also used on network outputs
// resampled to a grid): trapezoid-consistent sums of the loss terms plus the
// coolant enthalpy rise between the curve endpoints.
EnergyBalance energy_balance(const FieldGrid& g, const ModelParams& p,
                             Scalar theta_inlet, Scalar theta_outlet);

// Observed-temperature synthesis for calibration runs: bilinear samples of a
// solved field plus optional Gaussian noise (seeded).
VecX synthesize_inverse_data(const FieldGrid& g,
                             const std::vector<Vec2>& points,
                             Scalar noise_sigma, std::uint64_t seed);

struct FieldComparison {
  VecX ratio;           // candidate/reference per node, kelvin over kelvin
  Scalar min_ratio = 0.0;
  Scalar below_fraction = 0.0;  // area fraction with ratio < threshold
  Scalar rms_error = 0.0;       // area-weighted RMS of the kelvin difference
  Scalar threshold = 0.0;
};

// Pointwise ratio map of two fields on the same node lattice. Area weights
// are the trapezoid node shares (quarter cells at corners, halves on edges),
// so below_fraction measures domain area, not node count.
FieldComparison compare_fields(const FieldGrid& candidate,
                               const FieldGrid& reference,
                               Scalar ratio_threshold = 0.95);

}  // namespace coolpinns
