#include "coolpinns/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace coolpinns {
namespace {

// The one sine-trace preset, meters: y = y0 + A sin(2 pi x / lambda).
constexpr Scalar kSineY0 = 0.05;
constexpr Scalar kSineAmp = 0.0125;
constexpr Scalar kSineWavelen = 0.06667;

Scalar sine_y(Scalar x) {
  return kSineY0 + kSineAmp * std::sin(2.0 * M_PI * x / kSineWavelen);
}
Scalar sine_dy(Scalar x) {
  const Scalar w = 2.0 * M_PI / kSineWavelen;
  return kSineAmp * w * std::cos(w * x);
}
Scalar sine_speed(Scalar x) { return std::hypot(1.0, sine_dy(x)); }

Scalar adaptive_simpson(Scalar a, Scalar m, Scalar b, Scalar fa, Scalar fm,
                        Scalar fb, Scalar whole, Scalar tol, int depth) {
  const Scalar lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const Scalar flm = sine_speed(lm), frm = sine_speed(rm);
  const Scalar left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Scalar right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Scalar delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

Scalar point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  Scalar t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

Scalar Vasculature::sine_arclength_to(Scalar x) {
  if (x <= 0.0) return 0.0;
  const Scalar fa = sine_speed(0.0), fb = sine_speed(x),
               fm = sine_speed(0.5 * x);
  const Scalar whole = x / 6.0 * (fa + 4.0 * fm + fb);
  // Relative tolerance 1e-10 on the integral value.
  const Scalar tol = 1e-10 * std::max(std::abs(whole), Scalar(1e-3));
  return adaptive_simpson(0.0, 0.5 * x, x, fa, fm, fb, whole, tol, 48);
}

Vasculature Vasculature::polyline(std::vector<Vec2> vertices,
                                  const Domain& dom) {
  Vasculature v;
  v.kind_ = VascKind::Custom;
  v.pts_ = std::move(vertices);
  if (v.pts_.size() < 2)
    throw ConfigError("vasculature polyline needs at least two vertices");
  v.cum_.resize(v.pts_.size());
  v.cum_[0] = 0.0;
  for (std::size_t i = 1; i < v.pts_.size(); ++i) {
    const Scalar seg = (v.pts_[i] - v.pts_[i - 1]).norm();
    if (seg < 1e-12)
      throw ConfigError("vasculature polyline has a zero-length segment");
    v.cum_[i] = v.cum_[i - 1] + seg;
  }
  v.length_ = v.cum_.back();
  v.validate(dom);
  return v;
}

Vasculature Vasculature::build(VascKind kind, const Domain& dom) {
  const Scalar Lx = dom.Lx, Ly = dom.Ly;
  auto mm_line = [&](std::vector<Vec2> pts) {
    Vasculature v = polyline(std::move(pts), dom);
    v.kind_ = kind;
    return v;
  };
  switch (kind) {
    case VascKind::StraightCenter:
      return mm_line({{0.0, 0.5 * Ly}, {Lx, 0.5 * Ly}});
    case VascKind::StraightQuarter:
      return mm_line({{0.0, 0.25 * Ly}, {Lx, 0.25 * Ly}});
    case VascKind::Stepped:
      return mm_line({{0.0, 0.8 * Ly},
                      {0.5 * Lx, 0.8 * Ly},
                      {0.5 * Lx, 0.2 * Ly},
                      {Lx, 0.2 * Ly}});
    case VascKind::SteppedMst:
      return mm_line({{0.0, 0.6 * Ly},
                      {0.5 * Lx, 0.6 * Ly},
                      {0.5 * Lx, 0.2 * Ly},
                      {Lx, 0.2 * Ly}});
    case VascKind::SineWave: {
      Vasculature v;
      v.kind_ = kind;
      v.y0_ = kSineY0;
      v.amp_ = kSineAmp;
      v.wavelen_ = kSineWavelen;
      v.xmax_ = Lx;
      v.length_ = sine_arclength_to(Lx);
      const int n = 4096;
      v.dense_.resize(n + 1);
      for (int i = 0; i <= n; ++i) {
        const Scalar x = Lx * Scalar(i) / n;
        v.dense_[i] = Vec2(x, sine_y(x));
      }
      v.validate(dom);
      return v;
    }
    case VascKind::Custom:
      throw ConfigError("custom vasculature requires an explicit polyline");
    case VascKind::NoChannel: {
      Vasculature v;
      v.kind_ = VascKind::NoChannel;
      return v;
    }
  }
  throw ConfigError("unknown vasculature kind");
}

void Vasculature::validate(const Domain& dom) const {
  if (kind_ == VascKind::SineWave) {
    if (y0_ - amp_ < 0.0 || y0_ + amp_ > dom.Ly || xmax_ > dom.Lx)
      throw ConfigError("vasculature curve exits the domain");
    return;
  }
  for (const Vec2& p : pts_)
    if (!dom.contains(p))
      throw ConfigError("vasculature curve exits the domain");
}

Vasculature Vasculature::reversed() const {
  if (kind_ == VascKind::NoChannel)
    throw ConfigError("no channel to reverse");
  Vasculature v = *this;
  v.rev_ = !rev_;
  if (!pts_.empty()) {
    // Polylines are materialized in flow order; the flag is bookkeeping.
    std::reverse(v.pts_.begin(), v.pts_.end());
    v.cum_.resize(pts_.size());
    v.cum_[0] = 0.0;
    for (std::size_t i = 1; i < v.pts_.size(); ++i)
      v.cum_[i] = v.cum_[i - 1] + (v.pts_[i] - v.pts_[i - 1]).norm();
    v.length_ = v.cum_.back();
  }
  return v;
}

Vec2 Vasculature::point_at(Scalar s) const {
  if (kind_ == VascKind::NoChannel)
    throw ConfigError("no channel present");
  if (s < -1e-12 * length_ || s > length_ * (1.0 + 1e-12))
    throw ConfigError("arc length out of range");
  s = std::clamp(s, Scalar(0.0), length_);
  if (kind_ == VascKind::SineWave) {
    const Scalar sf = rev_ ? length_ - s : s;
    // Invert s(x) by bisection; s(x) is strictly increasing.
    Scalar lo = 0.0, hi = xmax_;
    while (hi - lo > 1e-12 * xmax_) {
      const Scalar mid = 0.5 * (lo + hi);
      (sine_arclength_to(mid) < sf ? lo : hi) = mid;
    }
    const Scalar x = 0.5 * (lo + hi);
    return Vec2(x, sine_y(x));
  }
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t i = std::min<std::size_t>(
      cum_.size() - 2, it == cum_.begin() ? 0 : (it - cum_.begin() - 1));
  const Scalar t = (s - cum_[i]) / (cum_[i + 1] - cum_[i]);
  return pts_[i] + t * (pts_[i + 1] - pts_[i]);
}

Vec2 Vasculature::tangent_at(Scalar s) const {
  if (kind_ == VascKind::NoChannel)
    throw ConfigError("no channel present");
  s = std::clamp(s, Scalar(0.0), length_);
  if (kind_ == VascKind::SineWave) {
    const Scalar sf = rev_ ? length_ - s : s;
    Scalar lo = 0.0, hi = xmax_;
    while (hi - lo > 1e-12 * xmax_) {
      const Scalar mid = 0.5 * (lo + hi);
      (sine_arclength_to(mid) < sf ? lo : hi) = mid;
    }
    const Scalar x = 0.5 * (lo + hi);
    Vec2 t(1.0, sine_dy(x));
    t.normalize();
    return rev_ ? Vec2(-t) : t;
  }
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t i = std::min<std::size_t>(
      cum_.size() - 2, it == cum_.begin() ? 0 : (it - cum_.begin() - 1));
  Vec2 t = pts_[i + 1] - pts_[i];
  t.normalize();
  return t;
}

std::vector<CurveSample> Vasculature::sample(int n) const {
  if (kind_ == VascKind::NoChannel)
    throw ConfigError("no channel present");
  if (n < 2) throw ConfigError("need at least two curve samples");
  const std::vector<Scalar> corners = corner_arclengths();
  const Scalar spacing = length_ / n;
  std::vector<CurveSample> out(n);
  for (int i = 0; i < n; ++i) {
    Scalar s = (i + 0.5) * spacing;
    for (Scalar c : corners)
      if (std::abs(s - c) < 1e-9 * length_) s += 0.25 * spacing;
    CurveSample& cs = out[i];
    cs.s = s;
    cs.x = point_at(s);
    cs.tangent = tangent_at(s);
    cs.normal_plus = rot90(cs.tangent);
  }
  return out;
}

Scalar Vasculature::distance(const Vec2& p) const {
  if (kind_ == VascKind::NoChannel)
    throw ConfigError("no channel present");
  const std::vector<Vec2>& v = pts_.empty() ? dense_ : pts_;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    best = std::min(best, point_segment_distance(p, v[i], v[i + 1]));
  return best;
}

std::vector<Scalar> Vasculature::corner_arclengths() const {
  std::vector<Scalar> out;
  for (std::size_t i = 1; i + 1 < cum_.size(); ++i) out.push_back(cum_[i]);
  return out;
}

}  // namespace coolpinns
