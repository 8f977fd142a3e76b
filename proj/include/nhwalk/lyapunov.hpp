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

// Lyapunov functions for wedge exit problems.
//
//   f_w(x) = r^w cos(w phi)      harmonic, positive on W(pi / (2w))
//   fhat_w(x) = f_w(x) 1{x in W(alpha)}
//   g(x)                          almost-linear function whose level sets are
//                                 translates of the wedge boundary with the
//                                 apex rounded into a circular arc
//
// together with the asymptotic expansions of the conditional increment
// moments of f_w, an exact enumeration oracle for those moments, and
// checkers that evaluate drift inequalities pointwise on state grids.
// Checkers never simulate: every conditional expectation is a finite sum
// over the jump kernel.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhwalk/geometry.hpp"
#include "nhwalk/models.hpp"

namespace nhwalk {

// ---------------------------------------------------------------------------
// Harmonic functions f_w.

template <class T>
double f_eval(double w, Vec2<T> x) {
  if (x.x1 == T{0} && x.x2 == T{0}) return 0.0;
  const PolarPoint p = to_polar(x);
  return std::pow(p.r, w) * std::cos(w * p.phi);
}

template <class T>
Vec2d f_grad(double w, Vec2<T> x) {
  if (x.x1 == T{0} && x.x2 == T{0}) {
    if (w < 2.0) throw DomainError("f_grad: undefined at the origin for w < 2");
    return {0.0, 0.0};
  }
  const PolarPoint p = to_polar(x);
  const double s = w * std::pow(p.r, w - 1.0);
  return {s * std::cos((w - 1.0) * p.phi), -s * std::sin((w - 1.0) * p.phi)};
}

template <class T>
Mat2 f_hessian(double w, Vec2<T> x) {
  if (x.x1 == T{0} && x.x2 == T{0}) {
    if (w < 2.0) throw DomainError("f_hessian: undefined at the origin for w < 2");
    if (w == 2.0) return {2.0, 0.0, 0.0, -2.0};
    return {};
  }
  const PolarPoint p = to_polar(x);
  const double s = w * (w - 1.0) * std::pow(p.r, w - 2.0);
  const double d11 = s * std::cos((w - 2.0) * p.phi);
  const double d12 = s * std::sin((w - 2.0) * p.phi);
  return {d11, d12, d12, -d11};
}

/// Lower constant in eps r^w <= f_w(x) <= r^w on W(alpha), w < pi / (2 alpha).
inline double eps_lower(double alpha, double w) {
  if (!(w > 0.0) || !(alpha > 0.0) || w * alpha >= std::numbers::pi / 2.0) {
    throw DomainError("eps_lower: requires 0 < w < pi / (2 alpha)");
  }
  return std::cos(w * alpha);
}

template <class T>
double f_hat_eval(double w, const WedgeTest& wedge, Vec2<T> x) {
  return wedge.in_wedge(x) ? f_eval(w, x) : 0.0;
}

template <class T>
double f_hat_eval(double w, const WedgeSpec& wedge, Vec2<T> x) {
  return f_hat_eval(w, WedgeTest(wedge), x);
}

// ---------------------------------------------------------------------------
// The almost-linear function g on W(alpha), alpha in (0, pi/2).

struct GFunctionParams {
  double alpha = std::numbers::pi / 4.0;
  double s = std::sin(std::numbers::pi / 4.0);
  double c = std::cos(std::numbers::pi / 4.0);
  double slope = 0.0;  // sc / (1 + c^2): boundary between linear and arc regions

  GFunctionParams() : GFunctionParams(std::numbers::pi / 4.0) {}
  explicit GFunctionParams(double a) : alpha(a), s(std::sin(a)), c(std::cos(a)) {
    if (!(a > 0.0 && a < std::numbers::pi / 2.0)) {
      throw DomainError("g: alpha must lie in (0, pi/2)");
    }
    slope = s * c / (1.0 + c * c);
  }

  /// Lower bound of D_1 g on the wedge: 2 / ((4/s) - s).
  double d1_lower() const { return 2.0 / (4.0 / s - s); }
};

enum class GRegion { outside, linear, arc };

template <class T>
GRegion g_region(const GFunctionParams& p, Vec2<T> x) {
  const double a = static_cast<double>(x.x1);
  const double b = std::fabs(static_cast<double>(x.x2));
  if (!(a > 0.0) || !(p.s * a - p.c * b > 0.0)) return GRegion::outside;
  return b > p.slope * a ? GRegion::linear : GRegion::arc;
}

namespace detail {

/// Larger root k of (4/s^2 - 1) k^2 - (4 x1 / s) k + |x|^2 = 0.
inline double g_arc_root(const GFunctionParams& p, double a, double b) {
  const double disc = a * a + b * b * (1.0 - 4.0 / (p.s * p.s));
  const double k = (2.0 * a / p.s + std::sqrt(std::max(disc, 0.0))) / (4.0 / (p.s * p.s) - 1.0);
  // Minor-arc window g (2/s - 1) <= x1 <= g (2/s - s).
  const double tol = 1e-9 * (1.0 + std::fabs(a));
  if (k * (2.0 / p.s - 1.0) > a + tol || a > k * (2.0 / p.s - p.s) + tol) {
    throw std::logic_error("g: root selection left the minor arc");
  }
  return k;
}

}  // namespace detail

template <class T>
double g_eval(const GFunctionParams& p, Vec2<T> x) {
  const double a = static_cast<double>(x.x1);
  const double b = std::fabs(static_cast<double>(x.x2));
  switch (g_region(p, x)) {
    case GRegion::outside: return 0.0;
    case GRegion::linear: return p.s * a - p.c * b;
    case GRegion::arc: return detail::g_arc_root(p, a, b);
  }
  return 0.0;
}

/// D(x) = g + (2/s)(x1 - 2g/s), negative on the arc region.
template <class T>
double g_denominator(const GFunctionParams& p, Vec2<T> x) {
  const double g = g_eval(p, x);
  return g + (2.0 / p.s) * (static_cast<double>(x.x1) - 2.0 * g / p.s);
}

template <class T>
Vec2d g_grad(const GFunctionParams& p, Vec2<T> x) {
  const double a = static_cast<double>(x.x1);
  const double b = static_cast<double>(x.x2);
  switch (g_region(p, x)) {
    case GRegion::outside: return {0.0, 0.0};
    case GRegion::linear: return {p.s, b > 0.0 ? -p.c : p.c};
    case GRegion::arc: {
      const double g = detail::g_arc_root(p, a, std::fabs(b));
      const double D = g + (2.0 / p.s) * (a - 2.0 * g / p.s);
      return {-(2.0 * g / p.s - a) / D, b / D};
    }
  }
  return {0.0, 0.0};
}

// ---------------------------------------------------------------------------
// Increment moments: exact enumeration and asymptotic expansions.

/// E[(h(x + theta) - h(x))^p] by summing over the kernel at x.
template <class Field>
double exact_increment_moment(const ModelSpec& m, Field&& h, Lattice x, int p) {
  if (p < 1 || p > 3) throw std::invalid_argument("exact_increment_moment: p must be 1, 2 or 3");
  const double h0 = h(x);
  double acc = 0.0;
  for (const auto& j : kernel_at(m, x).jumps) {
    const double d = h(x + j.step) - h0;
    acc += j.prob * (p == 1 ? d : p == 2 ? d * d : d * d * d);
  }
  return acc;
}

/// E[h(x + theta) - h(x)] for an already built kernel.
template <class Field>
double exact_increment(const JumpKernel& k, Field&& h, Lattice x) {
  const double h0 = h(x);
  double acc = 0.0;
  for (const auto& j : k.jumps) acc += j.prob * (h(x + j.step) - h0);
  return acc;
}

/// Displayed terms of the first-moment expansion of f_w increments.
template <class T>
double expansion_mean(double w, Vec2<T> x, Vec2d mu, const Mat2& M) {
  const PolarPoint p = to_polar(x);
  const double a = (w - 1.0) * p.phi;
  const double b = (w - 2.0) * p.phi;
  return w * std::pow(p.r, w - 1.0) * (mu.x1 * std::cos(a) - mu.x2 * std::sin(a)) +
         0.5 * (M.m11 - M.m22) * w * (w - 1.0) * std::pow(p.r, w - 2.0) * std::cos(b) +
         M.m12 * w * (w - 1.0) * std::pow(p.r, w - 2.0) * std::sin(b);
}

/// Displayed terms of the second-moment expansion of f_w increments.
template <class T>
double expansion_second(double w, Vec2<T> x, const Mat2& M) {
  const PolarPoint p = to_polar(x);
  const double a = (w - 1.0) * p.phi;
  const double scale = w * w * std::pow(p.r, 2.0 * w - 2.0);
  const double ca = std::cos(a);
  const double sa = std::sin(a);
  return scale * (M.m11 * ca * ca + M.m22 * sa * sa) - M.m12 * scale * std::sin(2.0 * a);
}

/// Displayed terms of the first-moment expansion of f_w^gamma increments.
/// At gamma = 1 this returns expansion_mean exactly.
template <class T>
double expansion_gamma(double w, double gamma, Vec2<T> x, Vec2d mu, const Mat2& M) {
  const double f = f_eval(w, x);
  if (!(f > 0.0)) throw DomainError("expansion_gamma: requires f_w(x) > 0");
  const double mean = expansion_mean(w, x, mu, M);
  if (gamma == 1.0) return mean;
  return gamma * std::pow(f, gamma - 1.0) * mean +
         0.5 * gamma * (gamma - 1.0) * std::pow(f, gamma - 2.0) * expansion_second(w, x, M);
}

// ---------------------------------------------------------------------------
// Drift-inequality checkers.

/// One evaluated point of a checker. residual = exact - analytic.
struct LyapunovReport {
  Vec2d point;
  double r = 0.0;
  double phi = 0.0;
  double analytic = std::numeric_limits<double>::quiet_NaN();
  double exact = 0.0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double order = 0.0;  // exponent q of the claimed remainder O(r^q)
  double margin = 0.0;
};

struct CheckResult {
  std::vector<LyapunovReport> rows;
  std::vector<std::string> notes;
  double worst_margin = 0.0;
  bool holds = false;
};

namespace detail {

inline LyapunovReport make_row(Lattice x, double exact, double analytic, double order,
                               double margin) {
  const PolarPoint p = to_polar(x);
  LyapunovReport row;
  row.point = to_real(x);
  row.r = p.r;
  row.phi = p.phi;
  row.exact = exact;
  row.analytic = analytic;
  row.residual = exact - analytic;
  row.order = order;
  row.margin = margin;
  return row;
}

inline std::string point_note(Lattice x, const std::string& why) {
  return "(" + std::to_string(x.x1) + "," + std::to_string(x.x2) + "): " + why;
}

}  // namespace detail

/// Supermartingale check E[f_w^gamma(x') - f_w^gamma(x)] <= -C f_w(x)^(gamma - 2/w)
/// for w < pi/(2 alpha). C is half the magnitude of the leading coefficient
/// (1/2) gamma (gamma - 1) w^2 sigma^2; margin = exact + C f^(gamma - 2/w),
/// so the inequality holds where margin < 0. Only gamma in (0, 1) can hold;
/// other positive gamma are evaluated so the failure is visible.
inline CheckResult check_supermartingale_subcritical(const ModelSpec& m, const WedgeSpec& wedge,
                                                     double w, double gamma,
                                                     std::span<const double> radii,
                                                     std::span<const double> angles) {
  const double alpha = wedge.alpha.radians();
  if (!(w > 0.0) || w * alpha >= std::numbers::pi / 2.0) {
    throw DomainError("dd2 check: requires 0 < w < pi / (2 alpha)");
  }
  if (!(gamma > 0.0) || gamma == 1.0) throw DomainError("dd2 check: requires gamma > 0, gamma != 1");
  const WedgeTest test(wedge);
  // (f^+)^gamma: jumps stay inside W(pi/(2w)) away from the edge, where f > 0.
  const auto field = [w, gamma](Lattice y) {
    const double f = f_eval(w, y);
    return f > 0.0 ? std::pow(f, gamma) : 0.0;
  };
  CheckResult out;
  out.worst_margin = -std::numeric_limits<double>::infinity();
  for (double r : radii) {
    for (double phi : angles) {
      const Lattice x = lattice_at(r, phi);
      if (!test.in_wedge(x)) {
        out.notes.push_back(detail::point_note(x, "outside W(alpha), skipped"));
        continue;
      }
      const double f = f_eval(w, x);
      const Mat2 M = covariance_at(m, x);
      const double sigma2 = 0.5 * M.trace();
      const double C = 0.25 * gamma * std::fabs(1.0 - gamma) * w * w * sigma2;
      const double exact = exact_increment_moment(m, field, x, 1);
      const double analytic = expansion_gamma(w, gamma, x, drift_at(m, x), M);
      const double margin = exact + C * std::pow(f, gamma - 2.0 / w);
      out.rows.push_back(detail::make_row(x, exact, analytic, w * gamma - 3.0, margin));
      out.worst_margin = std::max(out.worst_margin, margin);
    }
  }
  out.holds = !out.rows.empty() && out.worst_margin < 0.0;
  return out;
}

/// Submartingale check E[fhat_w^gamma(x') - fhat_w^gamma(x)] >= 0 with
/// w = pi/(2 alpha), gamma > 1, by enumeration only. margin = exact; holds
/// where margin >= 0. analytic is left NaN (no expansion at w = pi/(2 alpha)).
inline CheckResult check_submartingale_fhat(const ModelSpec& m, const WedgeSpec& wedge, double gamma,
                                            std::span<const double> radii,
                                            std::span<const double> angles) {
  if (!(gamma > 1.0)) throw DomainError("sub1 check: requires gamma > 1");
  const double w = static_cast<double>(wedge.alpha.denominator()) /
                   (2.0 * static_cast<double>(wedge.alpha.numerator()));
  const WedgeTest test(wedge);
  const auto field = [w, gamma, &test](Lattice y) {
    const double f = f_hat_eval(w, test, y);
    return f > 0.0 ? std::pow(f, gamma) : 0.0;
  };
  CheckResult out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    for (double phi : angles) {
      const Lattice x = lattice_at(r, phi);
      if (!test.in_wedge(x)) {
        out.notes.push_back(detail::point_note(x, "outside W(alpha), skipped"));
        continue;
      }
      const double exact = exact_increment_moment(m, field, x, 1);
      auto row = detail::make_row(x, exact, std::numeric_limits<double>::quiet_NaN(),
                                  w * gamma - 2.0, exact);
      if (exact < 0.0) {
        out.notes.push_back(detail::point_note(
            x, "negative increment at r=" + std::to_string(row.r) + " phi=" + std::to_string(row.phi)));
      }
      out.rows.push_back(row);
      out.worst_margin = std::min(out.worst_margin, exact);
    }
  }
  out.holds = !out.rows.empty() && out.worst_margin >= 0.0;
  return out;
}

/// Conditions of the Lamperti-type moment criteria for Y = h(xi):
///   existence:    E[Y'^(2p0) - Y^(2p0)] <= -C Y^(2p0-2)
///   noncon1:      E[Y'^(2p0) - Y^(2p0)] >= 0
///   noncon2:      E[Y'^2 - Y^2] >= -C
///   noncon3:      E[Y'^(2r) - Y^(2r)] <= D Y^(2r-2)
/// Constants are the tightest values valid on the sample.
struct LampertiRow {
  Lattice state;
  double y = 0.0;
  double inc_p0 = 0.0;
  double inc_2 = 0.0;
  double inc_r = 0.0;
};

struct LampertiReport {
  std::vector<LampertiRow> rows;
  std::vector<std::string> notes;
  double existence_C = 0.0;
  bool existence_holds = false;
  double noncon1_min = 0.0;
  bool noncon1_holds = false;
  double noncon2_C = 0.0;
  bool noncon2_holds = false;
  double noncon3_D = 0.0;
  bool noncon3_holds = false;
};

template <class Field, class Region>
LampertiReport check_lamperti(const ModelSpec& m, Field&& h, Region&& in_region, double p0,
                              double r_exp, std::span<const Lattice> states) {
  if (!(p0 > 0.0)) throw std::invalid_argument("check_lamperti: p0 must be positive");
  if (!(r_exp > 1.0)) throw std::invalid_argument("check_lamperti: r must exceed 1");
  LampertiReport rep;
  rep.existence_C = std::numeric_limits<double>::infinity();
  rep.noncon1_min = std::numeric_limits<double>::infinity();
  double inc2_min = std::numeric_limits<double>::infinity();
  rep.noncon3_D = -std::numeric_limits<double>::infinity();
  for (const Lattice& x : states) {
    if (!in_region(x)) {
      rep.notes.push_back(detail::point_note(x, "outside region, skipped"));
      continue;
    }
    const double y = h(x);
    if (!(y > 0.0)) {
      rep.notes.push_back(detail::point_note(x, "Y = 0, skipped"));
      continue;
    }
    const auto power_inc = [&](double q) {
      return exact_increment_moment(m, [&](Lattice z) { return std::pow(std::max(h(z), 0.0), q); }, x, 1);
    };
    LampertiRow row{x, y, power_inc(2.0 * p0), power_inc(2.0), power_inc(2.0 * r_exp)};
    rep.existence_C = std::min(rep.existence_C, -row.inc_p0 / std::pow(y, 2.0 * p0 - 2.0));
    rep.noncon1_min = std::min(rep.noncon1_min, row.inc_p0);
    inc2_min = std::min(inc2_min, row.inc_2);
    rep.noncon3_D = std::max(rep.noncon3_D, row.inc_r / std::pow(y, 2.0 * r_exp - 2.0));
    rep.rows.push_back(row);
  }
  if (rep.rows.empty()) return rep;
  rep.existence_holds = rep.existence_C > 0.0;
  rep.noncon1_holds = rep.noncon1_min >= 0.0;
  rep.noncon2_C = std::max(0.0, -inc2_min);
  rep.noncon2_holds = std::isfinite(rep.noncon2_C);
  rep.noncon3_holds = std::isfinite(rep.noncon3_D);
  return rep;
}

}  // namespace nhwalk
