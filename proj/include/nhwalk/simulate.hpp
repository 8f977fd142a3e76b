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

// Walk engine: single steps, exit-time runs, deterministic parallel
// batches, and the rectangle / boundary-scaling experiments.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nhwalk/geometry.hpp"
#include "nhwalk/models.hpp"
#include "nhwalk/rng.hpp"

namespace nhwalk {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExitSample {
  std::uint64_t path_id = 0;
  std::uint64_t tau = 0;
  bool censored = false;
  Lattice x0;
  std::uint64_t t_max = 1;

  friend bool operator==(const ExitSample&, const ExitSample&) = default;
};

struct BatchConfig {
  ModelSpec model;
  WedgeSpec wedge;
  Lattice x0{30, 0};
  std::uint64_t n_paths = 0;
  std::uint64_t t_max = 1;
  std::uint64_t master_seed = 0;

  void validate() const {
    model.validate();
    wedge.validate();
    if (t_max < 1) throw ConfigError("batch: t_max must be positive");
  }
};

/// Configuration warnings that do not stop a run.
inline std::vector<std::string> batch_warnings(const BatchConfig& cfg) {
  std::vector<std::string> out;
  if (!WedgeTest(cfg.wedge).in_modified_wedge(cfg.x0)) {
    out.emplace_back("start point lies outside W_A(alpha): every exit time is 0");
  }
  return out;
}

inline Lattice step(const ModelSpec& m, Lattice x, Xoshiro256pp& rng) {
  return x + sample_step_bits(m, x, rng());
}

/// Exit time from W_A(alpha), censored at t_max. tau = 0 when x0 is outside.
inline ExitSample run_exit(const ModelSpec& m, const WedgeTest& wedge, Lattice x0,
                           std::uint64_t t_max, Xoshiro256pp& rng) {
  ExitSample s;
  s.x0 = x0;
  s.t_max = t_max;
  if (!wedge.in_modified_wedge(x0)) return s;
  Lattice x = x0;
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    x = step(m, x, rng);
    if (!wedge.in_modified_wedge(x)) {
      s.tau = t;
      return s;
    }
  }
  s.tau = t_max;
  s.censored = true;
  return s;
}

inline ExitSample run_exit(const BatchConfig& cfg, std::uint64_t path_id) {
  auto rng = path_stream(cfg.master_seed, path_id);
  auto s = run_exit(cfg.model, WedgeTest(cfg.wedge), cfg.x0, cfg.t_max, rng);
  s.path_id = path_id;
  return s;
}

inline unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1u : n;
}

/// Runs body(i) for i in [0, n) across `workers` threads. Work is handed out
/// in fixed chunks; body must only write to slot i of its output.
template <class Body>
void parallel_for(std::uint64_t n, unsigned workers, Body&& body) {
  if (n == 0) return;
  constexpr std::uint64_t chunk = 64;
  workers = std::max(1u, workers);
  const std::uint64_t chunks = (n + chunk - 1) / chunk;
  if (workers == 1 || chunks == 1) {
    for (std::uint64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      const std::uint64_t hi = std::min(n, (c + 1) * chunk);
      for (std::uint64_t i = c * chunk; i < hi; ++i) body(i);
    }
  };
  std::vector<std::jthread> pool;
  const unsigned spawn = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
  pool.reserve(spawn - 1);
  for (unsigned k = 1; k < spawn; ++k) pool.emplace_back(worker);
  worker();
}

/// Exit samples for paths 0..n_paths-1, sorted by path_id. Output does not
/// depend on the worker count.
inline std::vector<ExitSample> run_batch(const BatchConfig& cfg, unsigned workers) {
  cfg.validate();
  std::vector<ExitSample> out(cfg.n_paths);
  const WedgeTest wedge(cfg.wedge);
  parallel_for(cfg.n_paths, workers, [&](std::uint64_t i) {
    auto rng = path_stream(cfg.master_seed, i);
    out[i] = run_exit(cfg.model, wedge, cfg.x0, cfg.t_max, rng);
    out[i].path_id = i;
  });
  return out;
}

/// Replays a sample's path from its seed and confirms the exit record:
/// all states before tau lie in W_A(alpha), the state at tau does not
/// (uncensored), or the path survives all t_max steps (censored).
inline bool validate_exit(const BatchConfig& cfg, const ExitSample& s) {
  if (s.x0 != cfg.x0 || s.t_max != cfg.t_max) return false;
  const WedgeTest wedge(cfg.wedge);
  auto rng = path_stream(cfg.master_seed, s.path_id);
  Lattice x = cfg.x0;
  if (!wedge.in_modified_wedge(x)) return s.tau == 0 && !s.censored;
  for (std::uint64_t t = 1; t <= s.tau; ++t) {
    x = step(cfg.model, x, rng);
    const bool inside = wedge.in_modified_wedge(x);
    if (t < s.tau && !inside) return false;
    if (t == s.tau) return s.censored ? (inside && s.tau == s.t_max) : !inside;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Rectangle exit: does the walk reach U2(N) before U1(N)?

struct RectExitEstimate {
  std::int64_t N = 0;
  std::uint64_t n_paths = 0;
  std::uint64_t hit_u1 = 0;
  std::uint64_t hit_u2 = 0;
  std::uint64_t unreached = 0;
  std::uint64_t step_cap = 0;
  double delta = 0.0;   // hit_u2 / n_paths
  double std_error = 0.0; // binomial standard error of delta

  double unreached_fraction() const {
    return n_paths == 0 ? 0.0 : static_cast<double>(unreached) / static_cast<double>(n_paths);
  }
};

inline RectExitEstimate rect_exit_experiment(const ModelSpec& m, const RectFrame& frame,
                                             std::int64_t y, std::int64_t z, std::uint64_t n_paths,
                                             std::uint64_t master_seed, unsigned workers) {
  m.validate();
  frame.validate();
  if (std::fabs(static_cast<double>(y)) > 2.0 * frame.h * static_cast<double>(frame.N)) {
    throw ConfigError("rect-exit: |y| must not exceed 2 h N");
  }
  if (std::llabs(z) > m.b) throw ConfigError("rect-exit: |z| must not exceed b");
  const Lattice x0 = rect_start(frame, y, z);
  const std::uint64_t cap = 100ULL * static_cast<std::uint64_t>(frame.N) * static_cast<std::uint64_t>(frame.N);
  std::vector<RectRegion> result(n_paths, RectRegion::interior);
  parallel_for(n_paths, workers, [&](std::uint64_t i) {
    auto rng = path_stream(master_seed, i);
    Lattice x = x0;
    RectRegion where = rect_classify(frame, x);
    for (std::uint64_t t = 0; t < cap && where != RectRegion::U1 && where != RectRegion::U2; ++t) {
      x = step(m, x, rng);
      where = rect_classify(frame, x);
    }
    result[i] = where;
  });
  RectExitEstimate est;
  est.N = frame.N;
  est.n_paths = n_paths;
  est.step_cap = cap;
  for (RectRegion r : result) {
    if (r == RectRegion::U1) ++est.hit_u1;
    else if (r == RectRegion::U2) ++est.hit_u2;
    else ++est.unreached;
  }
  if (n_paths > 0) {
    const double n = static_cast<double>(n_paths);
    est.delta = static_cast<double>(est.hit_u2) / n;
    est.std_error = std::sqrt(est.delta * (1.0 - est.delta) / n);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Boundary scaling: P[tau_{alpha,A} > eps1 r^2] along an arc of radius r.

struct BoundaryScalingPoint {
  double phi = 0.0;
  Lattice x0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double cos_wphi = 0.0;
};

struct BoundaryScalingResult {
  std::vector<BoundaryScalingPoint> points;
  std::vector<std::string> notes;
  std::uint64_t horizon = 0;  // floor(eps1 r^2)
};

inline BoundaryScalingResult boundary_scaling_experiment(const ModelSpec& m, const WedgeSpec& wedge,
                                                         double r, std::span<const double> phis,
                                                         double eps1, std::uint64_t n_paths,
                                                         std::uint64_t master_seed, unsigned workers) {
  m.validate();
  wedge.validate();
  if (!(r > 0.0) || !(eps1 > 0.0)) throw ConfigError("boundary-scaling: r and eps1 must be positive");
  const double w = static_cast<double>(wedge.alpha.denominator()) /
                   (2.0 * static_cast<double>(wedge.alpha.numerator()));
  const WedgeTest test(wedge);
  BoundaryScalingResult out;
  out.horizon = static_cast<std::uint64_t>(std::floor(eps1 * r * r));
  for (std::size_t k = 0; k < phis.size(); ++k) {
    const double phi = phis[k];
    const Lattice x0 = lattice_at(r, phi);
    if (!test.in_modified_wedge(x0)) {
      out.notes.push_back("phi=" + std::to_string(phi) + ": rounded start outside W_A(alpha), skipped");
      continue;
    }
    std::vector<std::uint8_t> survived(n_paths, 0);
    const std::uint64_t seed = derive_seed(master_seed, 0x5eed0000ULL + k);
    parallel_for(n_paths, workers, [&](std::uint64_t i) {
      auto rng = path_stream(seed, i);
      const ExitSample s = run_exit(m, test, x0, std::max<std::uint64_t>(out.horizon, 1), rng);
      survived[i] = s.censored ? 1 : 0;
    });
    std::uint64_t count = 0;
    for (auto v : survived) count += v;
    BoundaryScalingPoint pt;
    pt.phi = phi;
    pt.x0 = x0;
    if (n_paths > 0) {
      const double n = static_cast<double>(n_paths);
      pt.p_hat = static_cast<double>(count) / n;
      pt.std_error = std::sqrt(pt.p_hat * (1.0 - pt.p_hat) / n);
    }
    pt.cos_wphi = std::cos(w * phi);
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace nhwalk
