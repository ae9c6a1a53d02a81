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

#ifndef DPCATE_NORMAL_H_
#define DPCATE_NORMAL_H_

// Standard normal distribution functions used by the privacy calculus.
// The CDF is computed through erfc so that tail values keep relative accuracy,
// which matters when converting between Gaussian-DP and (epsilon, delta)
// guarantees at small delta.
namespace dpcate {

// Standard normal density.
double normal_pdf(double x);

// Standard normal CDF, accurate in both tails.
double normal_cdf(double x);

// Inverse standard normal CDF for p in (0, 1). Rational initial estimate
// (Acklam's approximation, |error| < 1.2e-9) refined by one Halley step
// against normal_cdf, giving close to full double precision. Throws
// std::invalid_argument outside (0, 1).
double normal_quantile(double p);

}  // namespace dpcate

#endif  // DPCATE_NORMAL_H_
