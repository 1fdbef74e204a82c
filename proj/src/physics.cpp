#include "coolpinns/physics.hpp"

#include <cmath>

namespace coolpinns {

Scalar radiation_term(Scalar theta, const ModelParams& p) {
  if (!p.radiation) return 0.0;
  const Scalar ta2 = p.theta_amb * p.theta_amb;
  const Scalar t2 = theta * theta;
  return p.emissivity * p.sigma_sb * (t2 * t2 - ta2 * ta2);
}

Scalar pde_residual(Scalar theta, Scalar lap_theta, const ModelParams& p) {
  if (theta <= 0.0)
    throw NumericalError("pde_residual: non-positive absolute temperature");
  return p.thickness * p.conductivity * lap_theta + p.heat_flux -
         p.h_conv * (theta - p.theta_amb) - radiation_term(theta, p);
}

Scalar equilibrium_temperature(const ModelParams& p) {
  auto defect = [&](Scalar th) {
    return p.h_conv * (th - p.theta_amb) + radiation_term(th, p) - p.heat_flux;
  };
  Scalar lo = p.theta_amb, hi = p.theta_amb + 2.0 * p.heat_flux / p.h_conv;
  while (defect(hi) < 0.0) hi *= 2.0;
  while (hi - lo > 1e-10) {
    const Scalar mid = 0.5 * (lo + hi);
    (defect(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Scalar boundary_flux(const Vec2& grad_theta, const Vec2& outward_normal,
                     const ModelParams& p) {
  return -p.conductivity * grad_theta.dot(outward_normal);
}

Scalar jump_mismatch(const CurveSample& s, const Vec2& q_plus,
                     const Vec2& q_minus, const Vec2& grad_theta,
                     const ModelParams& p) {
  return p.thickness * (q_plus - q_minus).dot(s.normal_plus) -
         p.mcf() * grad_theta.dot(s.tangent);
}

}  // namespace coolpinns
