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

#include "dpcate/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpcate::tradeoff {
namespace {

bool finite_point(const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

double cross(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

PiecewiseLinear::PiecewiseLinear(std::vector<Point> points) {
  for (const Point& p : points) {
    if (!finite_point(p)) {
      throw std::invalid_argument("PiecewiseLinear: non-finite breakpoint");
    }
  }
  if (!std::is_sorted(points.begin(), points.end(),
                      [](const Point& a, const Point& b) { return a.x < b.x; })) {
    throw std::invalid_argument("PiecewiseLinear: breakpoints must be sorted by x");
  }
  // Merge exact duplicates; reject jumps.
  points_.reserve(points.size());
  for (const Point& p : points) {
    if (!points_.empty() && points_.back().x == p.x) {
      if (points_.back().y != p.y) {
        throw std::invalid_argument("PiecewiseLinear: two breakpoints share an x");
      }
      continue;
    }
    points_.push_back(p);
  }
  if (points_.size() < 2) {
    throw std::invalid_argument("PiecewiseLinear: need at least two distinct breakpoints");
  }
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= points_.front().x) return points_.front().y;
  if (x >= points_.back().x) return points_.back().y;
  // First breakpoint strictly right of x.
  auto it = std::upper_bound(points_.begin(), points_.end(), x,
                             [](double v, const Point& p) { return v < p.x; });
  const Point& hi = *it;
  const Point& lo = *(it - 1);
  double t = (x - lo.x) / (hi.x - lo.x);
  return lo.y + t * (hi.y - lo.y);
}

PiecewiseLinear pointwise_min(const PiecewiseLinear& f, const PiecewiseLinear& g) {
  if (f.domain_lo() != g.domain_lo() || f.domain_hi() != g.domain_hi()) {
    throw std::invalid_argument("pointwise_min: domains differ");
  }
  // Merged breakpoint grid.
  std::vector<double> xs;
  xs.reserve(f.points().size() + g.points().size());
  for (const Point& p : f.points()) xs.push_back(p.x);
  for (const Point& p : g.points()) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // Both functions are affine between consecutive grid values, so the minimum
  // can only change hands at a sign change of the difference; insert that
  // crossing as an extra breakpoint.
  std::vector<Point> out;
  out.reserve(2 * xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double x = xs[i];
    if (i > 0) {
      double a = xs[i - 1];
      double da = f(a) - g(a);
      double db = f(x) - g(x);
      if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
        double t = da / (da - db);
        double xc = a + t * (x - a);
        if (xc > a && xc < x) {
          out.push_back({xc, std::min(f(xc), g(xc))});
        }
      }
    }
    out.push_back({x, std::min(f(x), g(x))});
  }
  return PiecewiseLinear(std::move(out));
}

std::vector<Point> lower_hull(const std::vector<Point>& points) {
  if (points.size() < 2) {
    throw std::invalid_argument("lower_hull: need at least two points");
  }
  std::vector<Point> hull;
  hull.reserve(points.size());
  for (const Point& p : points) {
    // Pop while the previous vertex lies on or above the chord to p.
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return hull;
}

LineEnvelope::LineEnvelope(std::vector<Line> lines, std::vector<Point> vertices)
    : lines_(std::move(lines)), vertices_(std::move(vertices)) {}

LineEnvelope LineEnvelope::from_lines(std::vector<Line> lines) {
  if (lines.empty()) {
    throw std::invalid_argument("LineEnvelope: need at least one line");
  }
  for (const Line& l : lines) {
    if (!std::isfinite(l.slope) || !std::isfinite(l.intercept)) {
      throw std::invalid_argument("LineEnvelope: non-finite line");
    }
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    return a.intercept < b.intercept;
  });

  // Of parallel lines only the highest can appear on a maximum.
  std::vector<Line> unique_slope;
  unique_slope.reserve(lines.size());
  for (const Line& l : lines) {
    if (!unique_slope.empty() && unique_slope.back().slope == l.slope) {
      unique_slope.back() = l;  // sorted so l has the larger intercept
      continue;
    }
    unique_slope.push_back(l);
  }

  // Crossing abscissa of two non-parallel lines.
  auto crossing = [](const Line& a, const Line& b) {
    return (a.intercept - b.intercept) / (b.slope - a.slope);
  };

  // Standard convex-hull-trick pass: a candidate line is dominated when it
  // meets the previous kept line at or left of where that line entered the
  // envelope.
  std::vector<Line> kept;
  kept.reserve(unique_slope.size());
  for (const Line& l : unique_slope) {
    while (kept.size() >= 2 &&
           crossing(kept[kept.size() - 1], l) <= crossing(kept[kept.size() - 2], kept[kept.size() - 1])) {
      kept.pop_back();
    }
    kept.push_back(l);
  }

  std::vector<Point> vertices;
  vertices.reserve(kept.size() > 0 ? kept.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
    double x = crossing(kept[i], kept[i + 1]);
    // Evaluate through the shallower line: with a steep neighbour the product
    // slope*x loses absolute precision to cancellation.
    const Line& stable =
        std::fabs(kept[i].slope) <= std::fabs(kept[i + 1].slope) ? kept[i] : kept[i + 1];
    vertices.push_back({x, stable.at(x)});
  }
  return LineEnvelope(std::move(kept), std::move(vertices));
}

double LineEnvelope::operator()(double x) const {
  if (lines_.size() == 1) return lines_[0].at(x);
  // The line active at x is determined by which vertex interval contains x.
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), x,
                             [](const Point& v, double value) { return v.x < value; });
  std::size_t idx = static_cast<std::size_t>(it - vertices_.begin());
  return lines_[idx].at(x);
}

}  // namespace dpcate::tradeoff
