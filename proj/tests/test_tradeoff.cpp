// Copyright 2026 The dpcate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dpcate/normal.hpp"
#include "dpcate/tradeoff.hpp"
#include "test_util.hpp"

namespace {

using dpcate::normal_cdf;
using dpcate::tradeoff::LineEnvelope;
using dpcate::tradeoff::Line;
using dpcate::tradeoff::PiecewiseLinear;
using dpcate::tradeoff::Point;
using dpcate::tradeoff::TradeoffCurve;

std::vector<double> unit_grid(int n) {
  std::vector<double> xs;
  xs.reserve(n + 1);
  for (int i = 0; i <= n; ++i) xs.push_back(static_cast<double>(i) / n);
  return xs;
}

TEST_CASE("piecewise linear evaluation interpolates and clamps") {
  PiecewiseLinear f({{0.0, 1.0}, {0.5, 0.2}, {1.0, 0.0}});
  CHECK(f(0.0) == 1.0);
  CHECK(f(0.25) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(f(0.5) == 0.2);
  CHECK(f(0.75) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(f(1.0) == 0.0);
  CHECK(f(-3.0) == 1.0);
  CHECK(f(4.0) == 0.0);
}

TEST_CASE("piecewise linear rejects malformed breakpoint lists") {
  CHECK_THROWS_AS(PiecewiseLinear({{0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseLinear({{0.5, 1.0}, {0.2, 0.0}}), std::invalid_argument);
  // Duplicate x with distinct y is a jump discontinuity.
  CHECK_THROWS_AS(PiecewiseLinear({{0.0, 1.0}, {0.5, 0.4}, {0.5, 0.1}, {1.0, 0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseLinear({{0.0, std::nan("")}, {1.0, 0.0}}), std::invalid_argument);
  // Exact duplicates merge instead of failing.
  PiecewiseLinear f({{0.0, 1.0}, {0.5, 0.4}, {0.5, 0.4}, {1.0, 0.0}});
  CHECK(f.points().size() == 3);
}

TEST_CASE("pointwise_min agrees with direct evaluation") {
  PiecewiseLinear f({{0.0, 1.0}, {0.2, 0.1}, {1.0, 0.0}});
  PiecewiseLinear g({{0.0, 0.6}, {1.0, 0.05}});
  PiecewiseLinear m = dpcate::tradeoff::pointwise_min(f, g);
  for (double x : unit_grid(2000)) {
    CHECK(m(x) == doctest::Approx(std::min(f(x), g(x))).epsilon(1e-14));
  }
}

TEST_CASE("pointwise_min captures crossings as breakpoints") {
  // The two lines cross at x = 2/3; the minimum must kink exactly there.
  PiecewiseLinear f({{0.0, 1.0}, {1.0, 0.0}});
  PiecewiseLinear g({{0.0, 0.4}, {1.0, 0.3}});
  PiecewiseLinear m = dpcate::tradeoff::pointwise_min(f, g);
  bool has_crossing = false;
  for (const Point& p : m.points()) {
    if (std::fabs(p.x - 2.0 / 3.0) < 1e-12) has_crossing = true;
  }
  CHECK(has_crossing);
  CHECK(m(2.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("line envelope equals brute-force maximum over lines") {
  std::vector<Line> lines = {{-2.0, 0.3}, {-0.5, 0.0}, {1.0, -1.2}, {3.0, -4.0}, {-0.5, -0.1}};
  LineEnvelope env = LineEnvelope::from_lines(lines);
  for (double y = -5.0; y <= 5.0; y += 0.01) {
    double best = lines[0].at(y);
    for (const Line& l : lines) best = std::max(best, l.at(y));
    CHECK(env(y) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("randomized trade-off curve has the documented kink") {
  TradeoffCurve f = dpcate::tradeoff::make_eps_delta({1.0, 0.0});
  double kink = 1.0 / (1.0 + std::exp(1.0));
  CHECK(f.function()(kink) == doctest::Approx(kink).epsilon(1e-12));
  CHECK(f.function()(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.function()(1.0) == 0.0);
  // Left of the kink the steep branch is active, right of it the flat one.
  CHECK(f.function()(kink / 2) == doctest::Approx(1.0 - std::exp(1.0) * kink / 2).epsilon(1e-12));
  CHECK(f.function()(0.8) ==
        doctest::Approx(std::exp(-1.0) * (1.0 - 0.8)).epsilon(1e-12));
}

TEST_CASE("randomized trade-off curve handles failure probability") {
  double eps = 2.0, delta = 1e-5;
  TradeoffCurve f = dpcate::tradeoff::make_eps_delta({eps, delta});
  CHECK(f.function()(0.0) == doctest::Approx(1.0 - delta).epsilon(1e-15));
  double kink = (1.0 - delta) / (1.0 + std::exp(eps));
  CHECK(f.function()(kink) == doctest::Approx(kink).epsilon(1e-12));
  CHECK(f.function()(1.0 - delta) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f.function()(1.0) == 0.0);
  CHECK(f.function().points().size() <= 4);
  for (double x : unit_grid(500)) {
    double expected = std::max({0.0, 1.0 - delta - std::exp(eps) * x,
                                std::exp(-eps) * (1.0 - delta - x)});
    CHECK(f.function()(x) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("degenerate budgets give the identity and zero curves") {
  TradeoffCurve perfect = dpcate::tradeoff::make_eps_delta({0.0, 0.0});
  for (double x : unit_grid(100)) {
    CHECK(perfect.function()(x) == doctest::Approx(1.0 - x).epsilon(1e-15));
  }
  TradeoffCurve blatant = dpcate::tradeoff::make_eps_delta({1.0, 1.0});
  for (double x : unit_grid(100)) {
    CHECK(blatant.function()(x) == 0.0);
  }
}

TEST_CASE("privacy parameters are validated") {
  CHECK_THROWS_AS(dpcate::tradeoff::make_eps_delta({-1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(dpcate::tradeoff::make_eps_delta({1.0, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(dpcate::tradeoff::make_eps_delta({1.0, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(dpcate::tradeoff::make_eps_delta({200.0, 1e-5}), std::invalid_argument);
  CHECK_THROWS_AS(dpcate::tradeoff::make_gaussian(-0.5), std::invalid_argument);
  CHECK_THROWS_AS(dpcate::tradeoff::make_gaussian(1.0, 8), std::invalid_argument);
}

TEST_CASE("gaussian curve with zero shift is the identity") {
  TradeoffCurve g = dpcate::tradeoff::make_gaussian(0.0);
  CHECK(g.function().points().size() == 2);
  CHECK(g.function()(0.37) == doctest::Approx(0.63).epsilon(1e-15));
}

TEST_CASE("gaussian curve is exact at grid nodes and a lower bound between them") {
  double mu = 1.0;
  TradeoffCurve g = dpcate::tradeoff::make_gaussian(mu);
  auto exact = [&](double a) {
    return normal_cdf(dpcate::normal_quantile(1.0 - a) - mu);
  };
  // alpha = 1/2 sits at the center node of the odd-sized grid.
  CHECK(g.function()(0.5) == doctest::Approx(normal_cdf(-1.0)).epsilon(1e-12));
  double max_gap = 0.0;
  for (double x : unit_grid(4000)) {
    if (x <= 0.0 || x >= 1.0) continue;
    double approx = g.function()(x);
    double truth = exact(x);
    CHECK(approx <= truth + 1e-12);
    max_gap = std::max(max_gap, truth - approx);
  }
  // The default grid keeps the geometric gap far below statistical relevance.
  CHECK(max_gap < 2e-4);
}

TEST_CASE("strong gaussian privacy loses little power") {
  TradeoffCurve g = dpcate::tradeoff::make_gaussian(0.05);
  // Nearly private: the curve stays close to the identity.
  for (double x : unit_grid(200)) {
    CHECK(g.function()(x) >= 1.0 - x - 0.03);
  }
}

TEST_CASE("weak gaussian privacy is near-zero power") {
  TradeoffCurve g = dpcate::tradeoff::make_gaussian(50.0);
  for (double x : {1e-3, 0.01, 0.1, 0.5, 0.9}) {
    CHECK(g.function()(x) <= 1e-6);
  }
}

TEST_CASE("gaussian curves are ordered by the shift parameter") {
  TradeoffCurve a = dpcate::tradeoff::make_gaussian(0.5);
  TradeoffCurve b = dpcate::tradeoff::make_gaussian(1.5);
  CHECK(dpcate::tradeoff::dominates(a, b));
  CHECK_FALSE(dpcate::tradeoff::dominates(b, a));
}

TEST_CASE("conjugate of the identity curve matches the closed form") {
  // g(x) = 1 - x on [0, 1] has conjugate g*(y) = max(y, -1).
  LineEnvelope conj =
      dpcate::tradeoff::convex_conjugate(dpcate::tradeoff::identity_curve().function());
  for (double y : {-5.0, -1.0, -0.3, 0.0, 0.7, 2.0}) {
    CHECK(conj(y) == doctest::Approx(std::max(y, -1.0)).epsilon(1e-14));
  }
}

TEST_CASE("conjugate of the zero curve matches the closed form") {
  // g = 0 on [0, 1] has conjugate g*(y) = max(0, y).
  LineEnvelope conj =
      dpcate::tradeoff::convex_conjugate(dpcate::tradeoff::zero_curve().function());
  for (double y : {-5.0, -1.0, 0.0, 0.7, 2.0}) {
    CHECK(conj(y) == doctest::Approx(std::max(0.0, y)).epsilon(1e-14));
  }
}

TEST_CASE("double conjugation restores convex curves") {
  std::vector<TradeoffCurve> curves;
  curves.push_back(dpcate::tradeoff::identity_curve());
  curves.push_back(dpcate::tradeoff::make_eps_delta({1.0, 0.0}));
  curves.push_back(dpcate::tradeoff::make_eps_delta({1.0, 1e-5}));
  curves.push_back(dpcate::tradeoff::make_eps_delta({4.0, 1e-5}));
  curves.push_back(dpcate::tradeoff::make_gaussian(1.0));
  curves.push_back(dpcate::tradeoff::make_gaussian(2.0, 257));
  for (const TradeoffCurve& f : curves) {
    PiecewiseLinear back = dpcate::tradeoff::biconjugate(f.function());
    for (const Point& p : f.function().points()) {
      CHECK(back(p.x) == doctest::Approx(p.y).epsilon(1e-12));
    }
    for (double x : unit_grid(997)) {
      CHECK(back(x) == doctest::Approx(f.function()(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("conjugation swaps minimum and maximum") {
  PiecewiseLinear f = dpcate::tradeoff::make_eps_delta({1.0, 1e-3}).function();
  PiecewiseLinear g = dpcate::tradeoff::make_gaussian(1.5, 129).function();
  LineEnvelope cf = dpcate::tradeoff::convex_conjugate(f);
  LineEnvelope cg = dpcate::tradeoff::convex_conjugate(g);
  PiecewiseLinear m = dpcate::tradeoff::pointwise_min(f, g);
  LineEnvelope cm = dpcate::tradeoff::convex_conjugate(m);
  for (double y = -10.0; y <= 2.0; y += 0.017) {
    CHECK(cm(y) == doctest::Approx(std::max(cf(y), cg(y))).epsilon(1e-9));
  }
}

TEST_CASE("convex envelope leaves convex functions unchanged") {
  PiecewiseLinear f = dpcate::tradeoff::make_eps_delta({2.0, 1e-4}).function();
  TradeoffCurve env = dpcate::tradeoff::lower_convex_envelope(f);
  for (const Point& p : f.points()) {
    CHECK(env.function()(p.x) == doctest::Approx(p.y).epsilon(1e-15));
  }
}

TEST_CASE("convex envelope of a concave kink is the chord") {
  // min of two crossing lines kinks concavely at x = 2/3; the envelope
  // replaces both segments by the chord from (0, 0.4) to (1, 0).
  PiecewiseLinear f({{0.0, 1.0}, {1.0, 0.0}});
  PiecewiseLinear g({{0.0, 0.4}, {1.0, 0.3}});
  PiecewiseLinear m = dpcate::tradeoff::pointwise_min(f, g);
  TradeoffCurve env = dpcate::tradeoff::lower_convex_envelope(m);
  CHECK(env.function().points().size() == 2);
  CHECK(env.function()(2.0 / 3.0) == doctest::Approx(0.4 / 3.0).epsilon(1e-12));
}

TEST_CASE("parallel composition is idempotent on a single mechanism") {
  for (double eps : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    TradeoffCurve f = dpcate::tradeoff::make_eps_delta({eps, 1e-5});
    TradeoffCurve composed = dpcate::tradeoff::compose_parallel({f, f, f});
    CHECK(dpcate::tradeoff::max_abs_difference(composed, f) <= 1e-12);
  }
}

TEST_CASE("parallel composition keeps the weakest mechanism") {
  TradeoffCurve strong = dpcate::tradeoff::identity_curve();
  TradeoffCurve weak = dpcate::tradeoff::make_eps_delta({3.0, 1e-4});
  TradeoffCurve composed = dpcate::tradeoff::compose_parallel({strong, weak});
  CHECK(dpcate::tradeoff::max_abs_difference(composed, weak) <= 1e-12);
}

TEST_CASE("adding a mechanism never strengthens the guarantee") {
  TradeoffCurve f = dpcate::tradeoff::make_eps_delta({1.0, 1e-3});
  TradeoffCurve g = dpcate::tradeoff::make_gaussian(2.0, 129);
  TradeoffCurve h = dpcate::tradeoff::make_eps_delta({2.0, 1e-6});
  TradeoffCurve two = dpcate::tradeoff::compose_parallel({f, g});
  TradeoffCurve three = dpcate::tradeoff::compose_parallel({f, g, h});
  CHECK(dpcate::tradeoff::dominates(two, three, 1e-12));
}

TEST_CASE("parallel composition matches the transform oracle") {
  TradeoffCurve f = dpcate::tradeoff::make_eps_delta({1.0, 1e-3});
  TradeoffCurve g = dpcate::tradeoff::make_gaussian(2.0, 65);
  TradeoffCurve h = dpcate::tradeoff::make_gaussian(0.7, 65);
  std::vector<TradeoffCurve> curves = {f, g, h};
  PiecewiseLinear m = dpcate::tradeoff::pointwise_min(curves);
  TradeoffCurve composed = dpcate::tradeoff::compose_parallel(curves);

  std::vector<double> xs;
  for (const Point& p : composed.function().points()) xs.push_back(p.x);
  for (double x : unit_grid(400)) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  std::vector<double> oracle = dpcate::testutil::double_legendre_envelope(m, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(composed.function()(xs[i]) == doctest::Approx(oracle[i]).epsilon(1e-9));
  }
}

TEST_CASE("composition requires at least one curve") {
  CHECK_THROWS_AS(dpcate::tradeoff::compose_parallel(std::vector<TradeoffCurve>{}),
                  std::invalid_argument);
}

TEST_CASE("dominance is reflexive and orders privacy levels") {
  TradeoffCurve f1 = dpcate::tradeoff::make_eps_delta({1.0, 1e-5});
  TradeoffCurve f2 = dpcate::tradeoff::make_eps_delta({2.0, 1e-5});
  CHECK(dpcate::tradeoff::dominates(f1, f1));
  CHECK(dpcate::tradeoff::dominates(f1, f2));
  CHECK_FALSE(dpcate::tradeoff::dominates(f2, f1));
  CHECK(dpcate::tradeoff::dominates(dpcate::tradeoff::identity_curve(), f1));
}

TEST_CASE("certified failure probability recovers the construction input") {
  TradeoffCurve f = dpcate::tradeoff::make_eps_delta({2.0, 1e-5});
  CHECK(dpcate::tradeoff::delta_for_epsilon(f, 2.0) == doctest::Approx(1e-5).epsilon(1e-9));
  // More privacy than the curve offers needs more failure probability.
  CHECK(dpcate::tradeoff::delta_for_epsilon(f, 1.0) > 1e-5);
  CHECK(dpcate::tradeoff::delta_for_epsilon(f, 3.0) < 1e-5);
  CHECK(dpcate::tradeoff::delta_for_epsilon(dpcate::tradeoff::identity_curve(), 0.0) ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("certified epsilon inverts certified delta") {
  TradeoffCurve f = dpcate::tradeoff::make_eps_delta({2.0, 1e-5});
  CHECK(dpcate::tradeoff::epsilon_for_delta(f, 1e-5) == doctest::Approx(2.0).epsilon(1e-9));
  TradeoffCurve g = dpcate::tradeoff::make_gaussian(1.0);
  double eps = dpcate::tradeoff::epsilon_for_delta(g, 1e-5);
  CHECK(dpcate::tradeoff::delta_for_epsilon(g, eps) == doctest::Approx(1e-5).epsilon(1e-6));
}

}  // namespace
