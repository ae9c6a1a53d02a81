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

#include "dpcate/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpcate/normal.hpp"

namespace dpcate::tradeoff {
namespace {

constexpr double kSnapTol = 1e-9;
constexpr double kMaxEpsilon = 100.0;

// Union of the x coordinates of both curves' breakpoints.
std::vector<double> merged_breakpoints(const TradeoffCurve& f, const TradeoffCurve& g) {
  std::vector<double> xs;
  xs.reserve(f.points().size() + g.points().size());
  for (const Point& p : f.points()) xs.push_back(p.x);
  for (const Point& p : g.points()) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

TradeoffCurve TradeoffCurve::from_points(std::vector<Point> points) {
  if (points.size() < 2) {
    throw std::invalid_argument("TradeoffCurve: need at least two breakpoints");
  }
  if (std::fabs(points.front().x) > kSnapTol || std::fabs(points.back().x - 1.0) > kSnapTol) {
    throw std::invalid_argument("TradeoffCurve: domain must be [0, 1]");
  }
  points.front().x = 0.0;
  points.back().x = 1.0;
  for (const Point& p : points) {
    if (p.x < 0.0 || p.x > 1.0) {
      throw std::invalid_argument("TradeoffCurve: breakpoint outside [0, 1]");
    }
    if (p.y < -kSnapTol || p.y > 1.0 + kSnapTol) {
      throw std::invalid_argument("TradeoffCurve: value outside [0, 1]");
    }
  }
  for (Point& p : points) p.y = std::clamp(p.y, 0.0, 1.0);

  // Non-increasing, with snapping of sub-tolerance rounding noise.
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].y > points[i - 1].y + kSnapTol) {
      throw std::invalid_argument("TradeoffCurve: values must be non-increasing");
    }
    points[i].y = std::min(points[i].y, points[i - 1].y);
  }

  PiecewiseLinear f(std::move(points));

  // Convexity: segment slopes must be non-decreasing. The slack is relative
  // to the slope magnitudes, which can be as large as e^epsilon.
  const std::vector<Point>& pts = f.points();
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    double s1 = (pts[i].y - pts[i - 1].y) / (pts[i].x - pts[i - 1].x);
    double s2 = (pts[i + 1].y - pts[i].y) / (pts[i + 1].x - pts[i].x);
    double slack = kSnapTol * std::max({1.0, std::fabs(s1), std::fabs(s2)});
    if (s2 < s1 - slack) {
      throw std::invalid_argument("TradeoffCurve: breakpoints are not convex");
    }
  }
  return TradeoffCurve(std::move(f));
}

TradeoffCurve identity_curve() {
  return TradeoffCurve::from_points({{0.0, 1.0}, {1.0, 0.0}});
}

TradeoffCurve zero_curve() {
  return TradeoffCurve::from_points({{0.0, 0.0}, {1.0, 0.0}});
}

TradeoffCurve make_eps_delta(const EpsDelta& ed) {
  if (!(ed.epsilon >= 0.0) || ed.epsilon > kMaxEpsilon) {
    throw std::invalid_argument("make_eps_delta: epsilon must lie in [0, 100]");
  }
  if (!(ed.delta >= 0.0 && ed.delta <= 1.0)) {
    throw std::invalid_argument("make_eps_delta: delta must lie in [0, 1]");
  }
  if (ed.delta == 1.0) return zero_curve();

  double mass = 1.0 - ed.delta;
  std::vector<Point> pts;
  pts.push_back({0.0, mass});
  if (ed.epsilon > 0.0) {
    // The two non-trivial branches intersect where both equal their common
    // value: alpha* = (1 - delta) / (1 + e^eps), and f(alpha*) = alpha*.
    double alpha_star = mass / (1.0 + std::exp(ed.epsilon));
    pts.push_back({alpha_star, alpha_star});
  }
  pts.push_back({mass, 0.0});
  pts.push_back({1.0, 0.0});
  return TradeoffCurve::from_points(std::move(pts));
}

TradeoffCurve make_gaussian(double mu, int grid_size) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("make_gaussian: mu must be finite and >= 0");
  }
  if (grid_size < 16) {
    throw std::invalid_argument("make_gaussian: grid_size must be at least 16");
  }
  if (mu == 0.0) return identity_curve();

  // Tangent lines of G_mu at probit-spaced nodes. With z = Phi^{-1}(1-alpha):
  //   G_mu(alpha) = Phi(z - mu),
  //   G_mu'(alpha) = -phi(z - mu) / phi(z) = -exp(mu z - mu^2 / 2).
  // Sampling z uniformly concentrates nodes near alpha in {0, 1}, where the
  // curve has all its curvature. Tangents of a convex function lie below it,
  // so the envelope is a pointwise lower bound of G_mu, exact at the nodes.
  int nodes = grid_size | 1;  // odd, so z = 0 (alpha = 1/2) is a node
  constexpr double kZMax = 8.0;
  std::vector<Line> lines;
  lines.reserve(static_cast<std::size_t>(nodes) + 1);
  for (int j = 0; j < nodes; ++j) {
    double z = kZMax - (2.0 * kZMax * j) / (nodes - 1);
    double alpha = normal_cdf(-z);
    double value = normal_cdf(z - mu);
    double slope = -std::exp(mu * z - 0.5 * mu * mu);
    lines.push_back({slope, value - slope * alpha});
  }
  lines.push_back({0.0, 0.0});  // tangent at alpha = 1, and a floor at 0

  LineEnvelope env = LineEnvelope::from_lines(std::move(lines));
  std::vector<Point> pts;
  pts.reserve(env.vertices().size() + 2);
  pts.push_back({0.0, env(0.0)});
  for (const Point& v : env.vertices()) {
    if (v.x > 0.0 && v.x < 1.0) pts.push_back(v);
  }
  pts.push_back({1.0, env(1.0)});
  // Deep in the tails adjacent tangents are nearly parallel, so their
  // computed crossings can jitter out of convex order by a few ulps. A hull
  // pass over the vertices removes the jitter without moving the curve.
  return TradeoffCurve::from_points(lower_hull(pts));
}

PiecewiseLinear pointwise_min(std::span<const TradeoffCurve> curves) {
  if (curves.empty()) {
    throw std::invalid_argument("pointwise_min: empty curve list");
  }
  PiecewiseLinear acc = curves[0].function();
  for (std::size_t i = 1; i < curves.size(); ++i) {
    acc = pointwise_min(acc, curves[i].function());
  }
  return acc;
}

LineEnvelope convex_conjugate(const PiecewiseLinear& g) {
  std::vector<Line> lines;
  lines.reserve(g.points().size());
  for (const Point& p : g.points()) {
    lines.push_back({p.x, -p.y});
  }
  return LineEnvelope::from_lines(std::move(lines));
}

PiecewiseLinear convex_conjugate(const LineEnvelope& h, double lo, double hi) {
  if (!(lo < hi)) {
    throw std::invalid_argument("convex_conjugate: empty restriction interval");
  }
  if (h.vertices().empty()) {
    // A single affine function has a conjugate finite at one point only;
    // envelopes built by convex_conjugate(PiecewiseLinear) always keep at
    // least two lines, so this indicates caller error.
    throw std::invalid_argument("convex_conjugate: envelope must have at least two lines");
  }
  std::vector<Line> lines;
  lines.reserve(h.vertices().size());
  for (const Point& v : h.vertices()) {
    lines.push_back({v.x, -v.y});
  }
  LineEnvelope env = LineEnvelope::from_lines(std::move(lines));
  std::vector<Point> pts;
  pts.push_back({lo, env(lo)});
  for (const Point& v : env.vertices()) {
    if (v.x > lo && v.x < hi) pts.push_back(v);
  }
  pts.push_back({hi, env(hi)});
  return PiecewiseLinear(std::move(pts));
}

PiecewiseLinear biconjugate(const PiecewiseLinear& g) {
  return convex_conjugate(convex_conjugate(g), g.domain_lo(), g.domain_hi());
}

TradeoffCurve lower_convex_envelope(const PiecewiseLinear& f) {
  return TradeoffCurve::from_points(lower_hull(f.points()));
}

TradeoffCurve compose_parallel(std::span<const TradeoffCurve> curves) {
  if (curves.empty()) {
    throw std::invalid_argument("compose_parallel: empty curve list");
  }
  return lower_convex_envelope(pointwise_min(curves));
}

bool dominates(const TradeoffCurve& f, const TradeoffCurve& g, double tol) {
  for (double x : merged_breakpoints(f, g)) {
    if (f(x) < g(x) - tol) return false;
  }
  return true;
}

double max_abs_difference(const TradeoffCurve& f, const TradeoffCurve& g) {
  double worst = 0.0;
  for (double x : merged_breakpoints(f, g)) {
    worst = std::max(worst, std::fabs(f(x) - g(x)));
  }
  return worst;
}

double delta_for_epsilon(const TradeoffCurve& f, double epsilon) {
  if (!(epsilon >= 0.0) || epsilon > kMaxEpsilon) {
    throw std::invalid_argument("delta_for_epsilon: epsilon must lie in [0, 100]");
  }
  // delta(eps) = sup_alpha (1 - e^eps * alpha - f(alpha)) = 1 + f*(-e^eps);
  // the supremum of an affine objective over a segment sits at a breakpoint.
  double scale = std::exp(epsilon);
  double best = 0.0;
  for (const Point& p : f.points()) {
    best = std::max(best, 1.0 - scale * p.x - p.y);
  }
  return best;
}

double epsilon_for_delta(const TradeoffCurve& f, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::invalid_argument("epsilon_for_delta: delta must lie in [0, 1)");
  }
  if (delta_for_epsilon(f, 0.0) <= delta) return 0.0;
  if (delta_for_epsilon(f, kMaxEpsilon) > delta) {
    throw std::invalid_argument(
        "epsilon_for_delta: curve cannot certify the requested delta at any "
        "epsilon <= 100");
  }
  double lo = 0.0, hi = kMaxEpsilon;
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++iter) {
    double mid = 0.5 * (lo + hi);
    if (delta_for_epsilon(f, mid) <= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace dpcate::tradeoff
