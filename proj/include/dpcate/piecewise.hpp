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

#ifndef DPCATE_PIECEWISE_H_
#define DPCATE_PIECEWISE_H_

#include <cstddef>
#include <vector>

// Exact piecewise-linear geometry: continuous piecewise-linear functions on an
// interval, upper envelopes of affine families, pointwise minima and lower
// convex hulls. All operations work on breakpoints and line coefficients
// directly; there is no quadrature or grid discretization anywhere, so results
// are exact up to floating-point rounding.
namespace dpcate::tradeoff {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// y = slope * x + intercept.
struct Line {
  double slope = 0.0;
  double intercept = 0.0;

  double at(double x) const { return slope * x + intercept; }
};

// Twice the signed area of the triangle (a, b, c); positive when c lies to the
// left of the directed segment a->b.
double cross(const Point& a, const Point& b, const Point& c);

// A continuous piecewise-linear function on [points.front().x,
// points.back().x], not necessarily convex or monotone. Breakpoints must be
// strictly increasing in x; exact duplicates are merged, and two points that
// share an x with different y (a jump) are rejected.
class PiecewiseLinear {
 public:
  explicit PiecewiseLinear(std::vector<Point> points);

  // Evaluates the function; x is clamped into the domain.
  double operator()(double x) const;

  const std::vector<Point>& points() const { return points_; }
  double domain_lo() const { return points_.front().x; }
  double domain_hi() const { return points_.back().x; }

 private:
  std::vector<Point> points_;
};

// Exact pointwise minimum of two piecewise-linear functions on the same
// domain. The result's breakpoints are the union of both breakpoint sets plus
// every crossing of the two graphs, so it is the true minimum everywhere, not
// just on a sampling grid.
PiecewiseLinear pointwise_min(const PiecewiseLinear& f, const PiecewiseLinear& g);

// Lower convex hull of a set of points sorted by strictly increasing x
// (Andrew's monotone chain, lower half only). Collinear interior points are
// dropped, which changes the breakpoint list but not the hull as a function.
std::vector<Point> lower_hull(const std::vector<Point>& points);

// The upper envelope (pointwise maximum) of a finite family of affine
// functions: a convex piecewise-linear function on the whole real line.
// Construction prunes dominated lines in one stack pass over the family
// sorted by slope.
class LineEnvelope {
 public:
  static LineEnvelope from_lines(std::vector<Line> lines);

  double operator()(double x) const;

  // Lines that actually appear on the envelope, in ascending slope order.
  const std::vector<Line>& lines() const { return lines_; }

  // Crossings of consecutive envelope lines, in ascending x order; the
  // envelope is a convex polyline through these vertices, extended by the
  // first and last line beyond them. Empty when only one line survives.
  const std::vector<Point>& vertices() const { return vertices_; }

 private:
  LineEnvelope(std::vector<Line> lines, std::vector<Point> vertices);

  std::vector<Line> lines_;
  std::vector<Point> vertices_;
};

}  // namespace dpcate::tradeoff

#endif  // DPCATE_PIECEWISE_H_
