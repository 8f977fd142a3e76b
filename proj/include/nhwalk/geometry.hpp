// Copyright 2026 The nhwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Planar and lattice geometry: polar coordinates, wedges, the thickened
// half-line, and the rectangle regions used by the exit experiments.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace nhwalk {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <class T>
struct Vec2 {
  T x1{};
  T x2{};

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

using Lattice = Vec2<std::int64_t>;
using Vec2d = Vec2<double>;

template <class T>
constexpr Vec2d to_real(Vec2<T> v) {
  return {static_cast<double>(v.x1), static_cast<double>(v.x2)};
}

template <class T>
constexpr T dot(Vec2<T> a, Vec2<T> b) {
  return a.x1 * b.x1 + a.x2 * b.x2;
}

template <class T>
double norm(Vec2<T> v) {
  return std::hypot(static_cast<double>(v.x1), static_cast<double>(v.x2));
}

/// Polar coordinates relative to the positive e1 axis; phi in (-pi, pi].
struct PolarPoint {
  double r = 0.0;
  double phi = 0.0;
};

template <class T>
PolarPoint to_polar(Vec2<T> x) {
  if (x.x1 == T{0} && x.x2 == T{0}) {
    throw DomainError("to_polar: angle undefined at the origin");
  }
  const double a = static_cast<double>(x.x1);
  const double b = static_cast<double>(x.x2);
  double phi = std::atan2(b, a);
  if (phi == -std::numbers::pi) phi = std::numbers::pi;  // -0.0 second coordinate
  return {std::hypot(a, b), phi};
}

inline Vec2d from_polar(PolarPoint p) {
  return {p.r * std::cos(p.phi), p.r * std::sin(p.phi)};
}

/// Nearest lattice point to r * (cos phi, sin phi).
inline Lattice lattice_at(double r, double phi) {
  return {static_cast<std::int64_t>(std::llround(r * std::cos(phi))),
          static_cast<std::int64_t>(std::llround(r * std::sin(phi)))};
}

/// An angle stored exactly as (numerator / denominator) * pi.
class PiFraction {
 public:
  constexpr PiFraction() = default;
  PiFraction(std::int64_t numerator, std::int64_t denominator) {
    if (denominator == 0) throw std::invalid_argument("PiFraction: zero denominator");
    if (denominator < 0) {
      numerator = -numerator;
      denominator = -denominator;
    }
    const std::int64_t g = std::gcd(numerator, denominator);
    num_ = numerator / (g == 0 ? 1 : g);
    den_ = denominator / (g == 0 ? 1 : g);
  }

  constexpr std::int64_t numerator() const { return num_; }
  constexpr std::int64_t denominator() const { return den_; }
  double radians() const {
    return std::numbers::pi * static_cast<double>(num_) / static_cast<double>(den_);
  }
  friend bool operator==(const PiFraction&, const PiFraction&) = default;

 private:
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

/// The open wedge W(alpha) with axis e1 (or, for alpha = pi, the plane
/// minus the closed thickened half-line H_b), optionally with the closed
/// ball of radius excluded_radius removed.
struct WedgeSpec {
  PiFraction alpha{1, 4};
  std::int64_t halfline_thickness = 1;
  double excluded_radius = 0.0;

  bool is_half_line() const { return alpha.numerator() == alpha.denominator(); }

  void validate() const {
    if (alpha.numerator() <= 0 || alpha.numerator() > alpha.denominator()) {
      throw std::invalid_argument("wedge: alpha must lie in (0, pi]");
    }
    if (is_half_line() && halfline_thickness < 1) {
      throw std::invalid_argument("wedge: alpha = pi requires halfline thickness b >= 1");
    }
    if (!(excluded_radius >= 0.0) || !std::isfinite(excluded_radius)) {
      throw std::invalid_argument("wedge: excluded radius must be a nonnegative real");
    }
  }
};

/// Precomputed membership test for a WedgeSpec. For the angles whose
/// cos^2 is rational (multiples of pi/6 and pi/4) lattice points are
/// classified in exact integer arithmetic; those are the only rational
/// multiples of pi whose boundary rays can carry lattice points.
class WedgeTest {
 public:
  explicit WedgeTest(const WedgeSpec& w) : spec_(w) {
    w.validate();
    const auto p = w.alpha.numerator();
    const auto q = w.alpha.denominator();
    cos_ = std::cos(w.alpha.radians());
    if (q == 1) {
      kind_ = Kind::half_line;
    } else if (q == 2) {
      kind_ = Kind::right;
    } else if (q == 3 || q == 4 || q == 6) {
      kind_ = Kind::rational;
      // cos^2(p pi / q) = cos2_num / cos2_den
      if (q == 3) { cos2_num_ = 1; cos2_den_ = 4; }
      if (q == 4) { cos2_num_ = 1; cos2_den_ = 2; }
      if (q == 6) { cos2_num_ = 3; cos2_den_ = 4; }
      acute_ = 2 * p < q;
    } else {
      kind_ = Kind::generic;
      acute_ = 2 * p < q;
    }
    radius2_ = w.excluded_radius * w.excluded_radius;
  }

  const WedgeSpec& spec() const { return spec_; }

  /// Membership in W(alpha); ignores the excluded radius.
  template <class T>
  bool in_wedge(Vec2<T> x) const {
    using Wide = std::conditional_t<std::is_integral_v<T>, std::int64_t, double>;
    const Wide a = static_cast<Wide>(x.x1);
    const Wide b = static_cast<Wide>(x.x2);
    switch (kind_) {
      case Kind::half_line:
        return !(a <= 0 && (b < 0 ? -b : b) <= static_cast<Wide>(spec_.halfline_thickness));
      case Kind::right:
        return a > 0;
      case Kind::rational: {
        const Wide lhs = static_cast<Wide>(cos2_den_) * a * a;
        const Wide rhs = static_cast<Wide>(cos2_num_) * (a * a + b * b);
        if (acute_) return a > 0 && lhs > rhs;
        if (a > 0 || (a == 0 && b != 0)) return true;
        return a < 0 && lhs < rhs;
      }
      case Kind::generic: {
        const double da = static_cast<double>(a);
        const double db = static_cast<double>(b);
        const double r2 = da * da + db * db;
        if (r2 == 0.0) return false;
        if (acute_) return da > 0 && da * da > cos_ * cos_ * r2;
        if (da >= 0) return true;
        return da * da < cos_ * cos_ * r2;
      }
    }
    return false;
  }

  /// Membership in W_A(alpha) = W(alpha) minus the closed ball of radius A.
  template <class T>
  bool in_modified_wedge(Vec2<T> x) const {
    if (!in_wedge(x)) return false;
    if (radius2_ == 0.0) return true;
    const double a = static_cast<double>(x.x1);
    const double b = static_cast<double>(x.x2);
    return a * a + b * b > radius2_;
  }

 private:
  enum class Kind { half_line, right, rational, generic };
  WedgeSpec spec_;
  Kind kind_ = Kind::generic;
  bool acute_ = true;
  std::int64_t cos2_num_ = 0;
  std::int64_t cos2_den_ = 1;
  double cos_ = 0.0;
  double radius2_ = 0.0;
};

template <class T>
bool in_wedge(const WedgeSpec& w, Vec2<T> x) {
  return WedgeTest(w).in_wedge(x);
}

template <class T>
bool in_modified_wedge(const WedgeSpec& w, Vec2<T> x) {
  return WedgeTest(w).in_modified_wedge(x);
}

// ---------------------------------------------------------------------------
// Rectangle frames along the seven lattice directions q_1..q_7.

enum class RectRegion { interior, U1, U2, other };

inline const char* to_string(RectRegion r) {
  switch (r) {
    case RectRegion::interior: return "interior";
    case RectRegion::U1: return "U1";
    case RectRegion::U2: return "U2";
    case RectRegion::other: return "other";
  }
  return "?";
}

/// Axis q_i for i in 1..7.
inline Lattice frame_axis(int i) {
  switch (i) {
    case 1: return {-1, -1};
    case 2: return {0, -1};
    case 3: return {1, -1};
    case 4: return {1, 0};
    case 5: return {1, 1};
    case 6: return {0, 1};
    case 7: return {-1, 1};
    default: throw std::invalid_argument("frame index must lie in 1..7");
  }
}

/// Perpendicular q_i^perp: q_{i+2} for i <= 5, -q_4 for i = 6, q_1 for i = 7.
inline Lattice frame_perp(int i) {
  if (i >= 1 && i <= 5) return frame_axis(i + 2);
  if (i == 6) return {-1, 0};
  if (i == 7) return frame_axis(1);
  throw std::invalid_argument("frame index must lie in 1..7");
}

struct RectFrame {
  int i = 4;
  std::int64_t N = 1;
  double h = 1.0;

  void validate() const {
    (void)frame_axis(i);
    if (N < 1) throw std::invalid_argument("rect frame: N must be positive");
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw std::invalid_argument("rect frame: h must be a positive real");
    }
  }
};

/// Classify x against S(N), U1(N), U2(N). With q = q_i, |q|^2 in {1, 2},
/// x.q_hat >= 2N|q| is equivalent to x.q >= 2N|q|^2, so the axial test is
/// exact on the lattice.
template <class T>
RectRegion rect_classify(const RectFrame& f, Vec2<T> x) {
  const Lattice q = frame_axis(f.i);
  const Lattice qp = frame_perp(f.i);
  const double q2 = static_cast<double>(dot(q, q));
  const double along = static_cast<double>(x.x1) * q.x1 + static_cast<double>(x.x2) * q.x2;
  const double across = static_cast<double>(x.x1) * qp.x1 + static_cast<double>(x.x2) * qp.x2;
  const double n = static_cast<double>(f.N);
  if (along >= 2.0 * n * q2) return RectRegion::U1;
  if (along <= 0.0) return RectRegion::other;
  if (std::fabs(across) >= 2.0 * f.h * n * q2) return RectRegion::U2;
  return RectRegion::interior;
}

/// Start point (N + z) q_i + y q_i^perp of the rectangle experiment.
inline Lattice rect_start(const RectFrame& f, std::int64_t y, std::int64_t z) {
  const Lattice q = frame_axis(f.i);
  const Lattice qp = frame_perp(f.i);
  const std::int64_t a = f.N + z;
  return {a * q.x1 + y * qp.x1, a * q.x2 + y * qp.x2};
}

}  // namespace nhwalk
