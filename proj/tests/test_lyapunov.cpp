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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nhwalk/lyapunov.hpp"

namespace nhwalk {
namespace {

constexpr double kPi = std::numbers::pi;

ModelSpec make(Family f, double c) {
  ModelSpec m;
  m.family = f;
  m.c = c;
  return m;
}

WedgeSpec wedge(std::int64_t p, std::int64_t q) {
  WedgeSpec w;
  w.alpha = PiFraction(p, q);
  return w;
}

double rel(double a, double b) { return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300}); }

// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(std::fabs(y[i]));
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(std::fabs(y[i])) - my);
  }
  return sxy / sxx;
}

// --------------------------------------------------------------------------
// f_w

TEST(F, Examples) {
  EXPECT_NEAR(f_eval(2.0, Lattice{3, 1}), 8.0, 1e-12);
  EXPECT_NEAR(f_eval(2.0, Lattice{1, 1}), 0.0, 1e-15);
  EXPECT_EQ(f_eval(1.7, Lattice{0, 0}), 0.0);
  for (double phi : {0.1, -0.7, 2.0}) {
    const Vec2d x = from_polar({3.5, phi});
    EXPECT_NEAR(f_eval(1.0, x), x.x1, 1e-12);
  }
}

TEST(F, GradientExamples) {
  const Vec2d g = f_grad(2.0, Lattice{3, 1});
  EXPECT_NEAR(g.x1, 6.0, 1e-12);
  EXPECT_NEAR(g.x2, -2.0, 1e-12);
  for (double w : {0.5, 1.5, 2.0, 3.0}) {
    const Vec2d a = f_grad(w, Vec2d{7.0, 0.0});
    EXPECT_NEAR(a.x1, w * std::pow(7.0, w - 1.0), 1e-12);
    EXPECT_EQ(a.x2, 0.0);
  }
  EXPECT_THROW(f_grad(1.5, Lattice{0, 0}), DomainError);
}

TEST(F, HessianOfQuadratic) {
  for (const Lattice x : {Lattice{3, 1}, Lattice{-4, 9}, Lattice{100, -1}}) {
    const Mat2 h = f_hessian(2.0, x);
    EXPECT_NEAR(h.m11, 2.0, 1e-12);
    EXPECT_NEAR(h.m22, -2.0, 1e-12);
    EXPECT_NEAR(h.m12, 0.0, 1e-12);
    EXPECT_EQ(h.trace(), 0.0);
  }
  const Mat2 h0 = f_hessian(2.0, Lattice{0, 0});
  EXPECT_EQ(h0.m11, 2.0);
  EXPECT_EQ(h0.m22, -2.0);
  EXPECT_THROW(f_hessian(1.5, Lattice{0, 0}), DomainError);
}

TEST(F, Harmonicity) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> rad(1.0, 1e3), ang(-kPi, kPi);
  for (double w : {1.5, 2.0, 3.0}) {
    for (int k = 0; k < 5000; ++k) {
      const Vec2d x = from_polar({rad(gen), ang(gen)});
      const Mat2 h = f_hessian(w, x);
      const double scale = std::max({std::fabs(h.m11), std::fabs(h.m22), std::fabs(h.m12)});
      ASSERT_LE(std::fabs(h.trace()), 1e-10 * scale);
    }
  }
}

TEST(F, DiscreteLaplacianOfQuadraticIsZero) {
  // x1^2 - x2^2 in exact integer arithmetic.
  const auto f2 = [](std::int64_t a, std::int64_t b) { return a * a - b * b; };
  for (std::int64_t a = -50; a <= 50; ++a) {
    for (std::int64_t b = -50; b <= 50; ++b) {
      ASSERT_EQ(f2(a + 1, b) + f2(a - 1, b) + f2(a, b + 1) + f2(a, b - 1) - 4 * f2(a, b), 0);
      ASSERT_NEAR(f_eval(2.0, Lattice{a, b}), static_cast<double>(f2(a, b)), 1e-9 * (1.0 + a * a + b * b));
    }
  }
}

TEST(F, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> rad(1.0, 1e3), ang(-1.2, 1.2);
  for (double w : {0.7, 1.5, 1.9, 2.0, 3.0}) {
    for (int k = 0; k < 2000; ++k) {
      const double r = rad(gen);
      const Vec2d x = from_polar({r, ang(gen)});
      const double h = 1e-6 * r;
      const Vec2d g = f_grad(w, x);
      const double d1 = (f_eval(w, Vec2d{x.x1 + h, x.x2}) - f_eval(w, Vec2d{x.x1 - h, x.x2})) / (2 * h);
      const double d2 = (f_eval(w, Vec2d{x.x1, x.x2 + h}) - f_eval(w, Vec2d{x.x1, x.x2 - h})) / (2 * h);
      const double scale = std::hypot(g.x1, g.x2);
      ASSERT_LE(std::fabs(d1 - g.x1), 1e-5 * scale) << w << " r=" << r;
      ASSERT_LE(std::fabs(d2 - g.x2), 1e-5 * scale) << w << " r=" << r;
    }
  }
}

TEST(F, LowerBoundExamples) {
  EXPECT_NEAR(eps_lower(kPi / 4, 1.0), 0.70710678, 1e-8);
  EXPECT_NEAR(eps_lower(kPi / 2, 1e-9), 1.0, 1e-12);
  EXPECT_THROW(eps_lower(kPi / 4, 2.0), DomainError);
  EXPECT_THROW(eps_lower(kPi / 4, 0.0), DomainError);
}

TEST(F, WedgeBounds) {
  std::mt19937_64 gen(3);
  const std::pair<WedgeSpec, double> cases[] = {
      {wedge(1, 4), 1.0}, {wedge(1, 4), 1.9}, {wedge(1, 2), 0.9}, {wedge(1, 3), 1.2}, {wedge(3, 4), 0.5}};
  for (const auto& [w, pw] : cases) {
    const WedgeTest test(w);
    const double alpha = w.alpha.radians();
    const double eps = eps_lower(alpha, pw);
    std::uniform_real_distribution<double> rad(0.5, 1e4), ang(-alpha, alpha);
    int n = 0;
    while (n < 10000) {
      const Vec2d x = from_polar({rad(gen), ang(gen)});
      if (!test.in_wedge(x)) continue;
      ++n;
      const double r = norm(x);
      const double f = f_eval(pw, x);
      const double rw = std::pow(r, pw);
      ASSERT_LE(eps * rw, f * (1 + 1e-12));
      ASSERT_LE(f, rw * (1 + 1e-12));
    }
  }
}

TEST(F, HatExamples) {
  const auto w = wedge(1, 4);
  EXPECT_NEAR(f_hat_eval(2.0, w, Lattice{3, 1}), 8.0, 1e-12);
  EXPECT_EQ(f_hat_eval(2.0, w, Lattice{1, 3}), 0.0);
  EXPECT_EQ(f_hat_eval(2.0, w, Lattice{1, 1}), 0.0);
}

TEST(F, BoundedIncrements) {
  // max |f_w(x + e) - f_w(x)| / (1 + |x|)^(w - 1): the constant fitted on
  // r <= 100 covers r up to 1e4.
  for (double w : {0.5, 1.5, 1.9, 2.0, 3.0}) {
    const auto ratio = [w](Lattice x) {
      double m = 0.0;
      for (const Lattice& d : kUnitSteps) m = std::max(m, std::fabs(f_eval(w, x + d) - f_eval(w, x)));
      return m / std::pow(1.0 + norm(x), w - 1.0);
    };
    double c_fit = 0.0, c_val = 0.0;
    for (double r = 1.0; r <= 1e4; r *= 1.25) {
      for (int k = 0; k < 64; ++k) {
        const Lattice x = lattice_at(r, -kPi + 2 * kPi * k / 64.0);
        if (r <= 100.0) c_fit = std::max(c_fit, ratio(x));
        else c_val = std::max(c_val, ratio(x));
      }
    }
    EXPECT_TRUE(std::isfinite(c_fit));
    EXPECT_LE(c_val, 1.1 * c_fit) << "w=" << w;
  }
}

// --------------------------------------------------------------------------
// g

TEST(G, AxisExample) {
  const GFunctionParams p(kPi / 3);
  const double expect = std::sqrt(3.0) / (4.0 - std::sqrt(3.0));
  EXPECT_NEAR(g_eval(p, Vec2d{1.0, 0.0}), expect, 1e-12);
  EXPECT_NEAR(expect, 0.763708, 1e-6);
  EXPECT_EQ(g_region(p, Vec2d{1.0, 0.0}), GRegion::arc);
}

TEST(G, VanishesOnAndOutsideBoundary) {
  const GFunctionParams p(kPi / 4);
  EXPECT_NEAR(g_eval(p, Lattice{2, 2}), 0.0, 1e-15);
  EXPECT_EQ(g_eval(p, Lattice{-3, 0}), 0.0);
  EXPECT_EQ(g_eval(p, Lattice{1, 5}), 0.0);
  EXPECT_EQ(g_eval(p, Lattice{0, 0}), 0.0);
}

TEST(G, MirrorSymmetry) {
  const GFunctionParams p(kPi / 5);
  for (std::int64_t a = 1; a < 60; a += 3) {
    for (std::int64_t b = 0; b < 60; b += 2) {
      ASSERT_EQ(g_eval(p, Lattice{a, b}), g_eval(p, Lattice{a, -b}));
    }
  }
}

TEST(G, ParamsAndDomain) {
  const GFunctionParams p(kPi / 4);
  EXPECT_GT(p.slope, 0.0);
  EXPECT_LE(p.slope, 0.5);
  EXPECT_THROW(GFunctionParams(kPi / 2), DomainError);
  EXPECT_THROW(GFunctionParams(0.0), DomainError);
}

TEST(G, OuterGradientIsUnit) {
  const GFunctionParams p(kPi / 4);
  const Vec2d g = g_grad(p, Vec2d{10.0, 6.0});
  EXPECT_EQ(g_region(p, Vec2d{10.0, 6.0}), GRegion::linear);
  EXPECT_NEAR(g.x1, p.s, 1e-15);
  EXPECT_NEAR(g.x2, -p.c, 1e-15);
  EXPECT_NEAR(std::hypot(g.x1, g.x2), 1.0, 1e-15);
  const Vec2d gm = g_grad(p, Vec2d{10.0, -6.0});
  EXPECT_NEAR(gm.x2, p.c, 1e-15);
  EXPECT_EQ(g_grad(p, Vec2d{-1.0, 0.0}), (Vec2d{0.0, 0.0}));
}

TEST(G, AxisGradientMatchesDifferences) {
  // On the axis g = x1 / ((2/s) - 1), so D1 g = 1 / ((2/s) - 1).
  const GFunctionParams p(kPi / 3);
  const Vec2d g = g_grad(p, Vec2d{1.0, 0.0});
  EXPECT_NEAR(g.x1, 1.0 / (2.0 / p.s - 1.0), 1e-12);
  EXPECT_NEAR(g.x1, 0.763708, 1e-6);
  EXPECT_EQ(g.x2, 0.0);
  const double h = 1e-6;
  const double fd = (g_eval(p, Vec2d{1.0 + h, 0.0}) - g_eval(p, Vec2d{1.0 - h, 0.0})) / (2 * h);
  EXPECT_LE(rel(fd, g.x1), 1e-5);
}

class GAngles : public ::testing::TestWithParam<double> {};

TEST_P(GAngles, GradientMatchesFiniteDifferences) {
  const double alpha = GetParam();
  const GFunctionParams p(alpha);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> rad(1.0, 1e4), ang(-0.98 * alpha, 0.98 * alpha);
  for (int k = 0; k < 5000; ++k) {
    const double r = rad(gen);
    const Vec2d x = from_polar({r, ang(gen)});
    // Stay off the region boundary ray, where g is only C^1.
    if (std::fabs(std::fabs(x.x2) - p.slope * x.x1) < 1e-3 * r) continue;
    const double h = 1e-6 * r;
    const Vec2d g = g_grad(p, x);
    const double d1 = (g_eval(p, Vec2d{x.x1 + h, x.x2}) - g_eval(p, Vec2d{x.x1 - h, x.x2})) / (2 * h);
    const double d2 = (g_eval(p, Vec2d{x.x1, x.x2 + h}) - g_eval(p, Vec2d{x.x1, x.x2 - h})) / (2 * h);
    const double scale = std::hypot(g.x1, g.x2);
    ASSERT_LE(std::fabs(d1 - g.x1), 1e-5 * scale);
    ASSERT_LE(std::fabs(d2 - g.x2), 1e-5 * scale);
  }
}

TEST_P(GAngles, ContinuousAcrossRegionBoundary) {
  const double alpha = GetParam();
  const GFunctionParams p(alpha);
  for (int k = 0; k < 1000; ++k) {
    const double x1 = std::pow(10.0, -2.0 + 6.0 * k / 999.0);
    const double x2 = p.slope * x1;
    const double lin = p.s * x1 - p.c * x2;
    const double arc = detail::g_arc_root(p, x1, x2);
    ASSERT_LE(std::fabs(lin - arc), 1e-9 * (1.0 + arc)) << x1;
    // Gradients agree on the ray too.
    const double g = arc;
    const double D = g + (2.0 / p.s) * (x1 - 2.0 * g / p.s);
    ASSERT_NEAR(-(2.0 * g / p.s - x1) / D, p.s, 1e-8);
    ASSERT_NEAR(x2 / D, -p.c, 1e-8);
  }
}

TEST_P(GAngles, GlobalBounds) {
  const double alpha = GetParam();
  const GFunctionParams p(alpha);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> rad(0.1, 1e5), ang(-kPi, kPi);
  int arc_points = 0;
  for (int k = 0; k < 20000; ++k) {
    const Vec2d x = from_polar({rad(gen), ang(gen)});
    const double r = norm(x);
    const double g = g_eval(p, x);
    ASSERT_GE(g, 0.0);
    ASSERT_LE(g, r * (1 + 1e-12));
    const GRegion region = g_region(p, x);
    if (region == GRegion::outside) {
      ASSERT_EQ(g, 0.0);
      continue;
    }
    if (region == GRegion::arc) {
      ++arc_points;
      ASSERT_GE(g, 0.5 * p.s * r * (1 - 1e-12));
      ASSERT_LE(g * (2.0 / p.s - 1.0), x.x1 * (1 + 1e-9));
      ASSERT_LE(x.x1, g * (2.0 / p.s - p.s) * (1 + 1e-9));
    }
    const Vec2d gr = g_grad(p, x);
    const double n = std::hypot(gr.x1, gr.x2);
    ASSERT_GE(n, p.s / (2.0 - p.s) * (1 - 1e-12));
    ASSERT_GE(n, 0.5 * p.s);
    ASSERT_LE(n, 1.0 + 1e-12);
    ASSERT_GE(gr.x1, p.d1_lower() * (1 - 1e-12));
  }
  EXPECT_GT(arc_points, 0);
}

TEST_P(GAngles, HessianDecaysLikeInverseRadius) {
  const double alpha = GetParam();
  const GFunctionParams p(alpha);
  // Angles away from the region boundary ray and the wedge edge.
  const double ray = std::atan(p.slope);
  std::vector<double> phis;
  for (int k = -20; k <= 20; ++k) {
    const double phi = 0.95 * alpha * k / 20.0;
    if (std::fabs(std::fabs(phi) - ray) > 0.02) phis.push_back(phi);
  }
  const auto max_second = [&](double r) {
    double m = 0.0;
    for (double phi : phis) {
      const Vec2d x = from_polar({r, phi});
      const double h = 1e-4 * r;
      const auto G = [&](double a, double b) { return g_eval(p, Vec2d{x.x1 + a, x.x2 + b}); };
      const double g0 = G(0, 0);
      const double d11 = (G(h, 0) - 2 * g0 + G(-h, 0)) / (h * h);
      const double d22 = (G(0, h) - 2 * g0 + G(0, -h)) / (h * h);
      const double d12 = (G(h, h) - G(h, -h) - G(-h, h) + G(-h, -h)) / (4 * h * h);
      m = std::max({m, std::fabs(d11), std::fabs(d22), std::fabs(d12)});
    }
    return m;
  };
  const double C = 1.05 * max_second(1e2) * 1e2;
  for (double r : {1e3, 1e4}) EXPECT_LE(max_second(r), C / r) << "r=" << r;
}

INSTANTIATE_TEST_SUITE_P(Angles, GAngles, ::testing::Values(kPi / 4, kPi / 3, kPi / 6, 0.3, 1.4));

// --------------------------------------------------------------------------
// Exact increments and expansions

TEST(Increment, Examples) {
  const auto zero = make(Family::zero_drift, 0.0);
  const auto f2 = [](Lattice x) { return f_eval(2.0, x); };
  EXPECT_NEAR(exact_increment_moment(zero, f2, Lattice{3, 1}, 1), 0.0, 1e-12);
  EXPECT_NEAR(exact_increment_moment(zero, f2, Lattice{3, 1}, 2), 21.0, 1e-12);
  const auto crit = make(Family::critical, 2.0);
  const auto first = [](Lattice x) { return static_cast<double>(x.x1); };
  EXPECT_NEAR(exact_increment_moment(crit, first, Lattice{6, 8}, 1), 0.2, 1e-15);
  EXPECT_THROW(exact_increment_moment(crit, first, Lattice{6, 8}, 4), std::invalid_argument);
  EXPECT_THROW(exact_increment_moment(crit, first, Lattice{6, 8}, 0), std::invalid_argument);
}

TEST(Expansion, Examples) {
  const Mat2 half{0.5, 0.0, 0.0, 0.5};
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> rad(1.0, 1e3), ang(-kPi, kPi);
  for (int k = 0; k < 200; ++k) {
    const Vec2d x = from_polar({rad(gen), ang(gen)});
    for (double w : {0.5, 1.0, 2.0, 3.0}) EXPECT_EQ(expansion_mean(w, x, Vec2d{}, half), 0.0);
  }
  EXPECT_NEAR(expansion_second(2.0, Lattice{3, 1}, half), 20.0, 1e-12);
  const auto crit = make(Family::critical, 2.0);
  for (double r : {20.0, 100.0, 1000.0}) {
    const Lattice x{static_cast<std::int64_t>(r), 0};
    EXPECT_NEAR(expansion_mean(1.0, x, drift_at(crit, x), covariance_at(crit, x)), 2.0 / r, 1e-15);
  }
}

TEST(Expansion, GammaOneIsMeanBitForBit) {
  const auto crit = make(Family::critical, 3.0);
  for (double r : {30.0, 300.0}) {
    for (double phi : {0.0, 0.2, -0.3}) {
      const Lattice x = lattice_at(r, phi);
      const Vec2d mu = drift_at(crit, x);
      const Mat2 M = covariance_at(crit, x);
      for (double w : {0.8, 1.5, 1.9}) EXPECT_EQ(expansion_gamma(w, 1.0, x, mu, M), expansion_mean(w, x, mu, M));
    }
  }
}

TEST(Expansion, GammaSigns) {
  const Mat2 half{0.5, 0.0, 0.0, 0.5};
  const double w = 1.9, gamma = 0.9;
  for (double r : {10.0, 100.0, 1000.0}) {
    for (double phi : {0.0, 0.3, -0.6}) {
      const Vec2d x = from_polar({r, phi});
      const double f = f_eval(w, x);
      const double expect = 0.5 * gamma * (gamma - 1.0) * w * w * 0.5 * std::pow(f, gamma - 2.0) *
                            std::pow(r, 2.0 * w - 2.0);
      const double got = expansion_gamma(w, gamma, x, Vec2d{}, half);
      EXPECT_LT(got, 0.0);
      EXPECT_LE(rel(got, expect), 1e-10);
      EXPECT_GT(expansion_gamma(w, 2.0, x, Vec2d{}, half), 0.0);
    }
  }
  EXPECT_THROW(expansion_gamma(2.0, 0.5, Lattice{1, 3}, Vec2d{}, half), DomainError);
}

TEST(Expansion, ResidualDecayOrders) {
  const std::vector<double> radii{50, 100, 200, 400, 800};
  for (auto fam : {Family::critical, Family::subcritical}) {
    const auto m = make(fam, 2.0);
    for (double w : {0.7, 1.5, 1.9, 2.5}) {
      const auto f = [w](Lattice x) { return f_eval(w, x); };
      for (double phi : {0.0, 0.25, -0.5}) {
        std::vector<double> res1, res2;
        for (double r : radii) {
          const Lattice x = lattice_at(r, phi);
          const Vec2d mu = drift_at(m, x);
          const Mat2 M = covariance_at(m, x);
          res1.push_back(exact_increment_moment(m, f, x, 1) - expansion_mean(w, x, mu, M));
          res2.push_back(exact_increment_moment(m, f, x, 2) - expansion_second(w, x, M));
        }
        EXPECT_LE(loglog_slope(radii, res1), -(3.0 - w) + 0.2) << "w=" << w << " phi=" << phi;
        EXPECT_LE(loglog_slope(radii, res2), (2.0 * w - 3.0) + 0.2) << "w=" << w << " phi=" << phi;
      }
    }
  }
}

// --------------------------------------------------------------------------
// Checkers

const std::vector<double> kAxis{0.0};

std::vector<double> fractions_of(double alpha, std::initializer_list<double> fr) {
  std::vector<double> out;
  for (double f : fr) out.push_back(f * alpha);
  return out;
}

TEST(Supermartingale, ZeroDriftHolds) {
  const auto res = check_supermartingale_subcritical(make(Family::zero_drift, 0.0), wedge(1, 4), 1.9, 0.9,
                                                     std::vector<double>{50, 100, 200, 400}, kAxis);
  ASSERT_EQ(res.rows.size(), 4u);
  EXPECT_TRUE(res.holds);
  EXPECT_LT(res.worst_margin, 0.0);
  for (const auto& row : res.rows) {
    EXPECT_EQ(row.residual, row.exact - row.analytic);
    EXPECT_NEAR(row.order, 1.9 * 0.9 - 3.0, 1e-15);
  }
}

TEST(Supermartingale, ZeroDriftHoldsOnFullGrid) {
  const double alpha = kPi / 4;
  const auto res = check_supermartingale_subcritical(
      make(Family::zero_drift, 0.0), wedge(1, 4), 1.9, 0.9, std::vector<double>{50, 100, 200, 400, 800},
      fractions_of(alpha, {0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75, 0.95, -0.95}));
  EXPECT_EQ(res.rows.size(), 45u);
  EXPECT_TRUE(res.holds);
}

TEST(Supermartingale, GammaTwoFails) {
  const auto res = check_supermartingale_subcritical(make(Family::zero_drift, 0.0), wedge(1, 4), 1.9, 2.0,
                                                     std::vector<double>{50, 100, 200, 400}, kAxis);
  EXPECT_FALSE(res.holds);
  for (const auto& row : res.rows) EXPECT_GT(row.margin, 0.0);
}

TEST(Supermartingale, PreconditionsAndSkips) {
  const std::vector<double> r{100};
  EXPECT_THROW(check_supermartingale_subcritical(ModelSpec{}, wedge(1, 4), 2.0, 0.9, r, kAxis), DomainError);
  EXPECT_THROW(check_supermartingale_subcritical(ModelSpec{}, wedge(1, 4), 1.9, 1.0, r, kAxis), DomainError);
  const std::vector<double> outside{1.2};
  const auto res = check_supermartingale_subcritical(ModelSpec{}, wedge(1, 4), 1.9, 0.9, r, outside);
  EXPECT_TRUE(res.rows.empty());
  EXPECT_EQ(res.notes.size(), 1u);
  EXPECT_FALSE(res.holds);
}

TEST(Submartingale, ZeroDriftAndSubcriticalNonnegative) {
  const double alpha = kPi / 4;
  const auto angles = fractions_of(alpha, {0.0, 0.7, -0.7, 0.95, -0.95, 0.999, -0.999});
  for (const auto& m : {make(Family::zero_drift, 0.0), make(Family::subcritical, 2.0)}) {
    const auto res = check_submartingale_fhat(m, wedge(1, 4), 1.5, std::vector<double>{100, 200, 400}, angles);
    EXPECT_GE(res.rows.size(), 15u);
    EXPECT_TRUE(res.holds);
    EXPECT_GE(res.worst_margin, 0.0);
    for (const auto& row : res.rows) EXPECT_TRUE(std::isnan(row.analytic));
  }
}

TEST(Submartingale, SmallRadiusIsOnlyRecorded) {
  const double alpha = kPi / 4;
  const auto res = check_submartingale_fhat(make(Family::zero_drift, 0.0), wedge(1, 4), 1.5,
                                            std::vector<double>{2}, fractions_of(alpha, {0.0, 0.7, -0.7}));
  EXPECT_FALSE(res.rows.empty());
  EXPECT_THROW(check_submartingale_fhat(ModelSpec{}, wedge(1, 4), 1.0, std::vector<double>{2}, kAxis),
               DomainError);
}

TEST(Lamperti, CriticalStrongDriftIsNonconfining) {
  const GFunctionParams gp(kPi / 4);
  const WedgeTest test(wedge(1, 4));
  std::vector<Lattice> states;
  for (std::int64_t r = 100; r <= 800; r += 50) states.push_back({r, 0});
  const auto rep = check_lamperti(make(Family::critical, 16.0), [&gp](Lattice x) { return g_eval(gp, x); },
                                  [&test](Lattice x) { return test.in_wedge(x); }, 0.5, 2.0, states);
  EXPECT_EQ(rep.rows.size(), states.size());
  EXPECT_TRUE(rep.noncon1_holds);
  EXPECT_GE(rep.noncon1_min, 0.0);
}

TEST(Lamperti, ZeroDriftRootOfQuadraticHasNegativeDrift) {
  const WedgeTest test(wedge(1, 4));
  std::vector<Lattice> states;
  for (double r : {50.0, 100.0, 200.0, 400.0}) {
    for (double phi : {0.0, 0.3, -0.3, 0.6}) states.push_back(lattice_at(r, phi));
  }
  const auto rep = check_lamperti(make(Family::zero_drift, 0.0),
                                  [](Lattice x) { return std::sqrt(std::max(f_eval(2.0, x), 0.0)); },
                                  [&test](Lattice x) { return test.in_wedge(x); }, 0.5, 2.0, states);
  EXPECT_TRUE(rep.existence_holds);
  EXPECT_GT(rep.existence_C, 0.0);
  EXPECT_FALSE(rep.noncon1_holds);
}

TEST(Lamperti, ConstantFieldIsFlat) {
  const std::vector<Lattice> states{{10, 0}, {20, 3}};
  const auto rep = check_lamperti(make(Family::critical, 2.0), [](Lattice) { return 3.0; },
                                  [](Lattice) { return true; }, 0.5, 2.0, states);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.inc_p0, 0.0);
    EXPECT_EQ(row.inc_2, 0.0);
    EXPECT_EQ(row.inc_r, 0.0);
  }
  EXPECT_TRUE(rep.noncon1_holds);
  EXPECT_FALSE(rep.existence_holds);
  EXPECT_TRUE(rep.noncon2_holds);
  EXPECT_TRUE(rep.noncon3_holds);
}

}  // namespace
}  // namespace nhwalk
