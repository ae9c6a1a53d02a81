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

#ifndef DPCATE_TRADEOFF_H_
#define DPCATE_TRADEOFF_H_

#include <span>
#include <vector>

#include "dpcate/piecewise.hpp"

// Trade-off curves for f-differential privacy.
//
// A trade-off curve f maps a type-I error level alpha in [0, 1] to the
// smallest achievable type-II error of any test distinguishing a mechanism's
// outputs on two neighbouring datasets. A mechanism is f-DP when its true
// trade-off function lies on or above f everywhere, so any curve that is a
// pointwise lower bound of the true one is a valid (conservative) guarantee.
//
// Every curve here is a convex, non-increasing piecewise-linear function on
// [0, 1] with values in [0, 1]. The two generator families are the classical
// (epsilon, delta) curve, which is exactly piecewise-linear, and the Gaussian
// curve G_mu, which is transcendental and enters as an explicit piecewise-
// linear lower bound (see make_gaussian).
//
// The composition rule implemented by compose_parallel: when an algorithm
// runs k+1 modules on disjoint parts of the data, each module f_i-DP, the
// whole algorithm is f-DP for f = the greatest convex lower bound of the
// pointwise minimum min_i f_i. The greatest convex lower bound is computed
// two independent ways, as the lower convex hull of the minimum's breakpoints
// (production path) and as the double convex conjugate (Legendre transform
// applied twice); the two must agree and the test suite holds them to that.
namespace dpcate::tradeoff {

// An (epsilon, delta) differential-privacy parameter pair.
struct EpsDelta {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Validated trade-off curve: convex, non-increasing, values in [0, 1],
// domain exactly [0, 1].
class TradeoffCurve {
 public:
  // Validates and normalizes a breakpoint list. Tiny floating-point
  // excursions (1e-9 and below) outside the invariants are snapped back;
  // anything larger is rejected with std::invalid_argument.
  static TradeoffCurve from_points(std::vector<Point> points);

  double operator()(double alpha) const { return f_(alpha); }
  const std::vector<Point>& points() const { return f_.points(); }
  const PiecewiseLinear& function() const { return f_; }

 private:
  explicit TradeoffCurve(PiecewiseLinear f) : f_(std::move(f)) {}
  PiecewiseLinear f_;
};

// f(alpha) = 1 - alpha: perfect privacy (outputs carry no information).
TradeoffCurve identity_curve();

// f identically 0: no guarantee.
TradeoffCurve zero_curve();

// The trade-off curve of (epsilon, delta)-DP:
//   f(alpha) = max{0, 1 - delta - e^eps * alpha, e^-eps * (1 - delta - alpha)}.
// At most four breakpoints; the interior kink sits at
// alpha* = (1 - delta) / (1 + e^eps) with f(alpha*) = alpha*.
// Requires epsilon in [0, 100] and delta in [0, 1].
TradeoffCurve make_eps_delta(const EpsDelta& ed);

// Piecewise-linear lower bound of the Gaussian trade-off curve
//   G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu).
// The curve is the upper envelope of tangent lines of G_mu at grid_size
// probit-spaced sample points (plus the zero line), so it never exceeds G_mu:
// reporting it as a guarantee is always valid. It touches G_mu exactly at the
// sample points, which include alpha = 1/2 (grid sizes are rounded up to odd
// to keep the midpoint a node). Requires mu >= 0 and grid_size >= 16.
TradeoffCurve make_gaussian(double mu, int grid_size = 513);

// Exact pointwise minimum of a non-empty list of curves. Generally not
// convex, hence returned as a plain piecewise-linear function.
PiecewiseLinear pointwise_min(std::span<const TradeoffCurve> curves);

// Convex conjugate g*(y) = sup_{x in dom g} (x y - g(x)) of a piecewise-
// linear function. The supremum of an affine objective over a segment is
// attained at an endpoint, so g* is exactly the upper envelope of one line
// per breakpoint (slope x_i, intercept -g(x_i)), finite on all of R.
LineEnvelope convex_conjugate(const PiecewiseLinear& g);

// Conjugate of a conjugate, restricted to [lo, hi]: h*(x) = sup_y (x y -
// h(y)). For an envelope h whose slopes span the original domain, the
// supremum is attained at a vertex of h, so the result is again exact.
PiecewiseLinear convex_conjugate(const LineEnvelope& h, double lo, double hi);

// Double conjugate of g on its own domain: the greatest convex function
// below g (Fenchel-Moreau). Used as the independent cross-check of
// lower_convex_envelope.
PiecewiseLinear biconjugate(const PiecewiseLinear& g);

// Greatest convex lower bound of f, computed as the lower convex hull of
// f's breakpoints. Must coincide with biconjugate(f) up to floating-point
// rounding; the two code paths are kept separate deliberately.
TradeoffCurve lower_convex_envelope(const PiecewiseLinear& f);

// Privacy guarantee of k+1 modules run on disjoint slices of one dataset:
// the greatest convex lower bound of the pointwise minimum of their curves.
// Composing identical copies of a curve returns that curve unchanged.
TradeoffCurve compose_parallel(std::span<const TradeoffCurve> curves);

inline TradeoffCurve compose_parallel(std::initializer_list<TradeoffCurve> curves) {
  return compose_parallel(std::span<const TradeoffCurve>(curves.begin(), curves.size()));
}

// True when f >= g - tol at every breakpoint of either curve (piecewise-
// linear functions can only achieve extrema of their difference there).
bool dominates(const TradeoffCurve& f, const TradeoffCurve& g, double tol = 1e-12);

// max |f - g| over the union of both breakpoint sets.
double max_abs_difference(const TradeoffCurve& f, const TradeoffCurve& g);

// Smallest delta such that the curve certifies (epsilon, delta)-DP:
// delta(eps) = 1 + f*(-e^eps), evaluated exactly over breakpoints.
double delta_for_epsilon(const TradeoffCurve& f, double epsilon);

// Smallest epsilon (within 1e-12) such that the curve certifies
// (epsilon, delta)-DP, by bisection on the monotone delta_for_epsilon.
// Throws when even epsilon = 100 cannot certify the requested delta.
double epsilon_for_delta(const TradeoffCurve& f, double delta);

}  // namespace dpcate::tradeoff

#endif  // DPCATE_TRADEOFF_H_
