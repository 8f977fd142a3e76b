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

// Walk families: the simple symmetric walk with its e1 probabilities tilted
// by a position-dependent amount eps(x). The tilt sets the drift regime;
// the covariance stays exactly diag(1/2, 1/2).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nhwalk/geometry.hpp"

namespace nhwalk {

enum class Family { zero_drift, critical, subcritical };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::zero_drift: return "zero_drift";
    case Family::critical: return "critical";
    case Family::subcritical: return "subcritical";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  if (s == "zero_drift") return Family::zero_drift;
  if (s == "critical") return Family::critical;
  if (s == "subcritical") return Family::subcritical;
  return std::nullopt;
}

struct ModelSpec {
  Family family = Family::zero_drift;
  double c = 0.0;         // drift strength
  std::int64_t b = 1;     // jump bound
  double eps_cap = 0.125; // clip for the e1 tilt

  void validate() const {
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("model: c must be >= 0");
    if (b != 1) throw std::invalid_argument("model: nearest-neighbour families have b = 1");
    if (!(eps_cap > 0.0 && eps_cap < 0.25)) {
      throw std::invalid_argument("model: eps_cap must lie in (0, 1/4)");
    }
  }
};

struct Jump {
  Lattice step;
  double prob = 0.0;
};

/// Finite-support jump law at one site.
struct JumpKernel {
  std::vector<Jump> jumps;

  double total() const {
    double t = 0.0;
    for (const auto& j : jumps) t += j.prob;
    return t;
  }
  double prob_of(Lattice step) const {
    double p = 0.0;
    for (const auto& j : jumps) {
      if (j.step == step) p += j.prob;
    }
    return p;
  }
};

/// Support order used everywhere for inverse-CDF sampling.
inline constexpr std::array<Lattice, 4> kUnitSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

/// The e1 tilt eps(x). At the origin the tilt is eps_cap (zero when c = 0).
inline double tilt_at(const ModelSpec& m, Lattice x) {
  if (m.family == Family::zero_drift || m.c == 0.0) return 0.0;
  if (x.x1 == 0 && x.x2 == 0) return m.eps_cap;
  const double r = norm(x);
  double raw = m.c / (2.0 * r);
  if (m.family == Family::subcritical) raw /= std::log(std::numbers::e + r);
  return std::min(raw, m.eps_cap);
}

/// Probability of +e1. The -e1 probability is 1/2 minus this, which is
/// exact in binary floating point for values in [1/4, 1/2].
inline double forward_prob(const ModelSpec& m, Lattice x) { return 0.25 + tilt_at(m, x); }

inline JumpKernel kernel_at(const ModelSpec& m, Lattice x) {
  const double p = forward_prob(m, x);
  return {{{kUnitSteps[0], p}, {kUnitSteps[1], 0.5 - p}, {kUnitSteps[2], 0.25}, {kUnitSteps[3], 0.25}}};
}

/// Inverse-CDF draw from the kernel at x for a uniform u in [0, 1). Only the
/// quarter u in [1/4, 1/2) depends on the tilt, so eps(x) is evaluated there
/// only; the result coincides with inverse_cdf(kernel_at(m, x), u).
inline Lattice sample_step(const ModelSpec& m, Lattice x, double u) {
  if (u >= 0.5) return u < 0.75 ? kUnitSteps[2] : kUnitSteps[3];
  if (u < 0.25) return kUnitSteps[0];
  return u < forward_prob(m, x) ? kUnitSteps[0] : kUnitSteps[1];
}

/// Same draw from 64 random bits, with u = (bits >> 11) * 2^-53. The top
/// two bits select the quarter of [0, 1) directly.
inline Lattice sample_step_bits(const ModelSpec& m, Lattice x, std::uint64_t bits) {
  const unsigned quarter = static_cast<unsigned>(bits >> 62);
  Lattice d = kUnitSteps[quarter];
  if (m.family != Family::zero_drift && quarter == 1) {
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    if (u < forward_prob(m, x)) d = kUnitSteps[0];
  }
  return d;
}

/// Generic inverse-CDF over a kernel's listed order.
inline Lattice inverse_cdf(const JumpKernel& k, double u) {
  double cum = 0.0;
  for (const auto& j : k.jumps) {
    cum += j.prob;
    if (u < cum) return j.step;
  }
  return k.jumps.back().step;
}

inline Vec2d drift_at(const ModelSpec& m, Lattice x) {
  Vec2d mu{};
  for (const auto& j : kernel_at(m, x).jumps) {
    mu.x1 += j.prob * static_cast<double>(j.step.x1);
    mu.x2 += j.prob * static_cast<double>(j.step.x2);
  }
  return mu;
}

struct Mat2 {
  double m11 = 0.0, m12 = 0.0, m21 = 0.0, m22 = 0.0;
  double trace() const { return m11 + m22; }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Second-moment matrix E[theta^T theta].
inline Mat2 covariance_at(const ModelSpec& m, Lattice x) {
  Mat2 M;
  for (const auto& j : kernel_at(m, x).jumps) {
    const double a = static_cast<double>(j.step.x1);
    const double b = static_cast<double>(j.step.x2);
    M.m11 += j.prob * a * a;
    M.m12 += j.prob * a * b;
    M.m21 += j.prob * b * a;
    M.m22 += j.prob * b * b;
  }
  return M;
}

// ---------------------------------------------------------------------------
// Assumption checks: weak isotropy with n0 = k = 1 and bounded jumps.

struct AssumptionViolation {
  std::string assumption;  // "sum", "A1" or "A2"
  Lattice state;
  std::string detail;
};

struct AssumptionReport {
  bool pass = true;
  double kappa = 0.0;  // min over sample of the four axial probabilities
  int k = 1;
  int n0 = 1;
  std::int64_t b = 1;
  double worst_margin = 0.0;  // kappa for A1 (the tightest of the three checks)
  std::vector<AssumptionViolation> violations;
};

template <class KernelFn>
AssumptionReport check_assumptions_with(KernelFn&& kernel_of, std::span<const Lattice> states,
                                        std::int64_t b) {
  if (states.empty()) throw std::invalid_argument("check_assumptions: empty state sample");
  AssumptionReport rep;
  rep.b = b;
  rep.kappa = 1.0;
  for (const Lattice& x : states) {
    const JumpKernel k = kernel_of(x);
    const double total = k.total();
    if (std::fabs(total - 1.0) > 1e-15) {
      rep.violations.push_back({"sum", x, "probabilities sum to " + std::to_string(total)});
    }
    for (const auto& j : k.jumps) {
      if (j.prob > 0.0 && norm(j.step) > static_cast<double>(b)) {
        rep.violations.push_back({"A2", x, "jump exceeds bound b"});
      }
    }
    for (const Lattice& d : kUnitSteps) {
      const double p = k.prob_of(d);
      if (p < rep.kappa) rep.kappa = p;
      if (!(p > 0.0)) {
        rep.violations.push_back(
            {"A1", x, "zero probability of step (" + std::to_string(d.x1) + "," + std::to_string(d.x2) + ")"});
      }
    }
  }
  rep.worst_margin = rep.kappa;
  rep.pass = rep.violations.empty();
  return rep;
}

inline AssumptionReport check_assumptions(const ModelSpec& m, std::span<const Lattice> states) {
  return check_assumptions_with([&m](Lattice x) { return kernel_at(m, x); }, states, m.b);
}

}  // namespace nhwalk
