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

// Survival curves of censored exit times and log-log tail fits.
//
// All paths of a batch share one censoring time t_max, so for t < t_max
// the empirical survival S(t) = #{tau > t} / n is exact; no product-limit
// reweighting is needed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhwalk/geometry.hpp"
#include "nhwalk/simulate.hpp"

namespace nhwalk {

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SurvivalPoint {
  std::uint64_t t = 0;
  double S = 1.0;
  std::uint64_t n_at_risk = 0;  // number of paths with tau > t
};

struct SurvivalCurve {
  std::vector<SurvivalPoint> points;
  std::uint64_t n_paths = 0;
  std::uint64_t t_max = 0;
};

/// Integer times lo * 2^(k / per_doubling) within [lo, hi], deduplicated.
inline std::vector<std::uint64_t> geometric_grid(std::uint64_t lo, std::uint64_t hi,
                                                 int per_doubling = 8) {
  if (lo < 1 || hi < lo) throw std::invalid_argument("geometric_grid: need 1 <= lo <= hi");
  std::vector<std::uint64_t> out;
  const double ratio = std::exp2(1.0 / per_doubling);
  for (int k = 0;; ++k) {
    const double t = static_cast<double>(lo) * std::pow(ratio, k);
    const auto ti = static_cast<std::uint64_t>(std::llround(t));
    if (ti > hi) break;
    if (out.empty() || ti != out.back()) out.push_back(ti);
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

inline SurvivalCurve survival_curve(std::span<const ExitSample> samples,
                                    std::span<const std::uint64_t> grid) {
  if (samples.empty()) throw std::invalid_argument("survival_curve: no samples");
  std::uint64_t t_max = samples.front().t_max;
  for (const auto& s : samples) t_max = std::min(t_max, s.t_max);
  std::vector<std::uint64_t> ts(grid.begin(), grid.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  if (!ts.empty() && ts.back() >= t_max) {
    throw std::invalid_argument("survival_curve: grid time " + std::to_string(ts.back()) +
                                " is not below t_max " + std::to_string(t_max));
  }
  std::vector<std::uint64_t> taus;
  taus.reserve(samples.size());
  for (const auto& s : samples) taus.push_back(s.tau);
  std::sort(taus.begin(), taus.end());
  SurvivalCurve c;
  c.n_paths = samples.size();
  c.t_max = t_max;
  const double n = static_cast<double>(samples.size());
  for (std::uint64_t t : ts) {
    const auto above = static_cast<std::uint64_t>(taus.end() - std::upper_bound(taus.begin(), taus.end(), t));
    c.points.push_back({t, static_cast<double>(above) / n, above});
  }
  return c;
}

struct FitWindow {
  std::uint64_t t_lo = 0;
  std::uint64_t t_hi = 0;
};

/// Default window [t_max^0.3, t_max^0.8].
inline FitWindow default_window(std::uint64_t t_max) {
  const double tm = static_cast<double>(t_max);
  return {static_cast<std::uint64_t>(std::llround(std::pow(tm, 0.3))),
          static_cast<std::uint64_t>(std::llround(std::pow(tm, 0.8)))};
}

struct TailFit {
  double gamma_hat = 0.0;
  double std_error = 0.0;  // nominal: survival points are positively correlated
  double r_squared = 0.0;
  FitWindow window;
  std::size_t n_points = 0;
  std::uint64_t n_paths = 0;
};

/// Least-squares slope of log S on log t over the curve points in the
/// window; gamma_hat = -slope.
inline TailFit fit_tail_exponent(const SurvivalCurve& curve, FitWindow window) {
  if (window.t_lo >= window.t_hi) throw std::invalid_argument("tail fit: need t_lo < t_hi");
  if (curve.t_max != 0 && window.t_hi >= curve.t_max) {
    throw std::invalid_argument("tail fit: window must end below t_max");
  }
  std::vector<double> lx, ly;
  std::uint64_t last_at_risk = 0;
  for (const auto& p : curve.points) {
    if (p.t < window.t_lo || p.t > window.t_hi) continue;
    if (!(p.S > 0.0)) {
      throw InsufficientDataError("tail fit: zero survival at t=" + std::to_string(p.t) +
                                  " inside the window (window too wide)");
    }
    lx.push_back(std::log(static_cast<double>(p.t)));
    ly.push_back(std::log(p.S));
    last_at_risk = p.n_at_risk;
  }
  if (lx.size() < 5) {
    throw InsufficientDataError("tail fit: " + std::to_string(lx.size()) +
                                " grid points in window, need at least 5");
  }
  if (last_at_risk < 50) {
    throw InsufficientDataError("tail fit: only " + std::to_string(last_at_risk) +
                                " paths at risk at the window end, need at least 50");
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (my + slope * (lx[i] - mx));
    sse += e * e;
  }
  TailFit fit;
  fit.gamma_hat = -slope;
  fit.std_error = std::sqrt(sse / (n - 2.0) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.window = window;
  fit.n_points = lx.size();
  fit.n_paths = curve.n_paths;
  return fit;
}

/// Survival curve on the geometric grid over the window, then the fit.
inline TailFit fit_samples(std::span<const ExitSample> samples, FitWindow window,
                           SurvivalCurve* curve_out = nullptr) {
  const auto grid = geometric_grid(window.t_lo, window.t_hi);
  auto curve = survival_curve(samples, grid);
  auto fit = fit_tail_exponent(curve, window);
  if (curve_out != nullptr) *curve_out = std::move(curve);
  return fit;
}

/// Critical moment order pi / (4 alpha).
inline double spitzer_exponent(double alpha) {
  if (!(alpha > 0.0 && alpha <= std::numbers::pi)) {
    throw DomainError("spitzer_exponent: alpha must lie in (0, pi]");
  }
  return std::numbers::pi / (4.0 * alpha);
}

inline double spitzer_exponent(const PiFraction& alpha) {
  return static_cast<double>(alpha.denominator()) / (4.0 * static_cast<double>(alpha.numerator()));
}

enum class MomentTrend { converging, diverging, inconclusive };

inline const char* to_string(MomentTrend t) {
  switch (t) {
    case MomentTrend::converging: return "converging";
    case MomentTrend::diverging: return "diverging";
    case MomentTrend::inconclusive: return "inconclusive";
  }
  return "?";
}

struct MomentProbe {
  MomentTrend trend = MomentTrend::inconclusive;
  std::vector<double> truncated_moments;  // m(T) for each ladder rung
};

/// m(T) = mean of min(tau, T)^s. Diverging when the top step grows by at
/// least 20% per doubling of T; converging when the top two rungs differ by
/// less than 2%.
inline MomentProbe moment_probe(std::span<const ExitSample> samples, double s,
                                std::span<const std::uint64_t> ladder) {
  if (ladder.size() < 2) throw std::invalid_argument("moment_probe: need at least two rungs");
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (ladder[i] <= ladder[i - 1]) throw std::invalid_argument("moment_probe: ladder must increase");
  }
  MomentProbe out;
  for (std::uint64_t T : ladder) {
    double acc = 0.0;
    for (const auto& smp : samples) {
      acc += std::pow(static_cast<double>(std::min(smp.tau, T)), s);
    }
    out.truncated_moments.push_back(samples.empty() ? 0.0 : acc / static_cast<double>(samples.size()));
  }
  const std::size_t k = ladder.size() - 1;
  const double lo = out.truncated_moments[k - 1];
  const double hi = out.truncated_moments[k];
  const double doublings = std::log2(static_cast<double>(ladder[k]) / static_cast<double>(ladder[k - 1]));
  if (lo > 0.0 && hi / lo >= std::pow(1.2, doublings)) {
    out.trend = MomentTrend::diverging;
  } else if (lo > 0.0 && std::fabs(hi / lo - 1.0) < 0.02) {
    out.trend = MomentTrend::converging;
  } else if (lo == 0.0 && hi == 0.0) {
    out.trend = MomentTrend::converging;
  }
  return out;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: size mismatch");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace nhwalk
