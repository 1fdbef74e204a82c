#pragma once

#include <optional>
#include <vector>

#include "coolpinns/types.hpp"

namespace coolpinns {

// Rectangular panel [0,Lx] x [0,Ly], insulated on all four edges. The single
// Dirichlet point (coolant entry) comes from the vasculature, not the domain.
struct Domain {
  Scalar Lx = 0.1;
  Scalar Ly = 0.1;

  bool contains(const Vec2& p) const {
    return p.x() >= 0.0 && p.x() <= Lx && p.y() >= 0.0 && p.y() <= Ly;
  }
  bool strictly_inside(const Vec2& p, Scalar margin = 0.0) const {
    return p.x() > margin && p.x() < Lx - margin && p.y() > margin &&
           p.y() < Ly - margin;
  }
};

enum class VascKind {
  StraightCenter,
  StraightQuarter,
  SineWave,
  Stepped,
  SteppedMst,
  Custom,
  NoChannel,
};

// One collocation sample on the channel curve. normal_plus is the +90 degree
// rotation of the unit tangent; the "+" side of the curve lies along it.
struct CurveSample {
  Vec2 x;
  Scalar s = 0.0;
  Vec2 tangent;
  Vec2 normal_plus;
};

inline Vec2 rot90(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// Embedded cooling channel: an oriented curve from inlet (s = 0) to outlet
// (s = length()). Either a polyline or the analytic sine trace. All
// coordinates in meters.
class Vasculature {
 public:
  static Vasculature build(VascKind kind, const Domain& dom);
  // Vertices in meters, at least two, consecutive points distinct.
  static Vasculature polyline(std::vector<Vec2> vertices, const Domain& dom);

  // Same curve with flow direction flipped: inlet/outlet swap, the tangent
  // negates, and with it normal_plus, so the +/- side labels swap too.
  Vasculature reversed() const;

  VascKind kind() const { return kind_; }
  bool is_reversed() const { return rev_; }
  Scalar length() const { return length_; }
  Vec2 inlet() const { return point_at(0.0); }
  Vec2 outlet() const { return point_at(length_); }

  Vec2 point_at(Scalar s) const;
  Vec2 tangent_at(Scalar s) const;
  Vec2 normal_plus_at(Scalar s) const { return rot90(tangent_at(s)); }

  // n samples at midpoint arc-length positions (i + 1/2) * length / n.
  // Midpoints never coincide with polyline corners; if one does to rounding,
  // it is nudged a quarter spacing downstream.
  std::vector<CurveSample> sample(int n) const;

  // Distance from p to the curve. Exact for polylines; for the sine trace a
  // dense interpolant accurate far below any exclusion-band width.
  Scalar distance(const Vec2& p) const;

  // Arc lengths of interior polyline corners, ascending. Empty for smooth or
  // straight channels.
  std::vector<Scalar> corner_arclengths() const;

  // Arc length of the sine trace from x = 0 to x, adaptive quadrature.
  static Scalar sine_arclength_to(Scalar x);

 private:
  Vasculature() = default;
  void validate(const Domain& dom) const;

  VascKind kind_ = VascKind::NoChannel;
  bool rev_ = false;
  std::vector<Vec2> pts_;      // polyline vertices (forward orientation)
  std::vector<Scalar> cum_;    // cumulative arc length at each vertex
  Scalar length_ = 0.0;
  // sine trace parameters (meters)
  Scalar y0_ = 0.0, amp_ = 0.0, wavelen_ = 0.0, xmax_ = 0.0;
  std::vector<Vec2> dense_;    // distance-query interpolant (sine only)
};

}  // namespace coolpinns
