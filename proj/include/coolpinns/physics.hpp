#pragma once

#include "coolpinns/geometry.hpp"
#include "coolpinns/types.hpp"

namespace coolpinns {

// Material, loading, and coolant parameters of the reduced thin-panel model.
// SI units throughout; temperatures absolute (K).
struct ModelParams {
  Scalar thickness = 4.15e-3;        // panel thickness t (m)
  Scalar conductivity = 2.5247;      // K (W m^-1 K^-1)
  Scalar emissivity = 0.95;          // eps
  Scalar sigma_sb = 5.670374419e-8;  // Stefan-Boltzmann (W m^-2 K^-4)
  Scalar h_conv = 13.125;            // film coefficient h_T (W m^-2 K^-1)
  Scalar heat_flux = 1500.0;         // applied f0 (W m^-2)
  Scalar theta_amb = 296.15;         // ambient (23 C)
  Scalar c_f = 4800.0;               // coolant specific heat (J kg^-1 K^-1)
  Scalar rho_f = 1000.0;             // coolant density (kg m^-3)
  Scalar flow_ml_min = 10.0;         // volumetric flow rate (mL/min)
  Scalar theta_in = 296.15;          // coolant inlet temperature (K)
  bool radiation = true;

  Scalar volumetric_flow() const {  // m^3/s
    return flow_ml_min * 1e-6 / 60.0;
  }
  Scalar mdot() const { return rho_f * volumetric_flow(); }  // kg/s
  Scalar mcf() const { return mdot() * c_f; }                // W/K
};

inline Scalar kelvin_from_celsius(Scalar c) { return c + 273.15; }
inline Scalar meters_from_mm(Scalar mm) { return mm * 1e-3; }

// eps*sigma*(theta^4 - theta_amb^4), or 0 with radiation disabled.
Scalar radiation_term(Scalar theta, const ModelParams& p);

// Interior balance t*K*lap(theta) + f0 - h_T*(theta - theta_amb) - radiation.
// Zero at the exact solution. Throws on non-positive absolute temperature.
Scalar pde_residual(Scalar theta, Scalar lap_theta, const ModelParams& p);

// Uniform no-channel equilibrium: h_T*(th - th_amb) + rad(th) = f0, solved by
// bisection to 1e-10 K.
Scalar equilibrium_temperature(const ModelParams& p);

// Outward conductive flux -K * grad(theta) . n through an insulated edge;
// zero at the exact solution.
Scalar boundary_flux(const Vec2& grad_theta, const Vec2& outward_normal,
                     const ModelParams& p);

// Channel energy balance defect at one curve sample:
//   t * (q_plus - q_minus) . n_plus  -  mdot * c_f * (grad_theta . tangent)
// where q_side are the one-sided conductive flux vectors and grad_theta is
// taken on the curve. Zero when the coolant picks up exactly the heat the
// panel sheds into the channel.
Scalar jump_mismatch(const CurveSample& s, const Vec2& q_plus,
                     const Vec2& q_minus, const Vec2& grad_theta,
                     const ModelParams& p);

}  // namespace coolpinns
