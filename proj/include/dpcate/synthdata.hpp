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

#ifndef DPCATE_SYNTHDATA_H_
#define DPCATE_SYNTHDATA_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dpcate/dataset.hpp"
#include "dpcate/dpgam.hpp"

// Seeded benchmark generators for heterogeneous-treatment-effect estimation.
//
// Five data-generating processes over six covariates, each defined by a
// covariate law P_X, a baseline b(x), a propensity e(x), and an effect tau(x):
//
//   Y = b(X) + T * tau(X) + N(0, 1),   T | X ~ Bernoulli(e(X)).
//
//   A: X ~ U(0,1)^6
//      b = sin(pi x1 x2) + 2 (x3 - 1/2)^2 + x4 + x5 / 2
//      e = trim_{0.1}(sin(pi x1 x2)),  tau = (x1 + x2) / 2
//   B: X ~ N(0, I)   (a randomized trial)
//      b = max(x1 + x2, x3, 0) + max(x4 + x5, 0)
//      e = 1/2,  tau = x1 + softplus(x2)
//   C: X ~ N(0, I)   (a constant effect)
//      b = 2 softplus(x1 + x2 + x3),  e = sigmoid(-(x2 + x3)),  tau = 1
//   D: X ~ N(0, I)   (a kinked, non-differentiable effect)
//      b = max(x1 + x2 + x3, 0) + max(x4 + x5, 0)
//      e = 1 / (1 + exp(-x1) + exp(-x2))
//      tau = max(x1 + x2 + x3, 0) - max(x4 + x5, 0)
//   E: X ~ N(0, Sigma), Sigma a fixed random correlation matrix
//      b = sum_i i * x_i + x1 x6 + 1(-1/2 < x3 < 1/2)   (strict inequalities)
//      e = sigmoid(-(x1 + x6)),  tau = sigmoid(-x1) - x2 + x3 + x4 + x5 + x6
//
// Generation is bit-reproducible per seed, and every draw carries the true
// tau and propensity for evaluation; learners never see them.
namespace dpcate::synthdata {

inline constexpr int kNumFeatures = 6;

enum class Setup { kA, kB, kC, kD, kE };

// Accepts "A".."E" (or lowercase); throws std::invalid_argument otherwise.
Setup setup_from_string(std::string_view name);
const char* to_string(Setup setup);

// min(max(lo, v), 1 - lo): clamps a propensity away from 0 and 1.
double trim(double v, double lo = 0.1);

// The Table entries, evaluated exactly on one covariate vector (size 6).
double baseline(Setup setup, std::span<const double> x);
double propensity(Setup setup, std::span<const double> x);
double treatment_effect(Setup setup, std::span<const double> x);

// Unit-diagonal correlation matrix Sigma = normalize(A A^T) from a d x d
// seeded standard normal A, retrying nearly singular draws on successive
// substreams (at most 10) before giving up.
std::vector<std::vector<double>> random_correlation(int d, std::uint64_t seed);

// The fixed correlation matrix behind setup E. Constant for the lifetime of
// the library so that setup E names one reproducible data law.
const std::vector<std::vector<double>>& setup_e_correlation();

struct Draw {
  data::ObservationSet obs;
  std::vector<double> tau_true;  // effect tau(X_i) per row
  std::vector<double> e_true;    // propensity e(X_i) per row
};

// n rows from the setup's law. Per row the stream is consumed as covariates,
// then treatment, then outcome noise.
Draw generate(Setup setup, std::size_t n, std::uint64_t seed);

// Public binning bounds for the learners: [0, 1] for setup A's uniform
// covariates, [-5, 5] (five standard deviations) for the normal laws.
std::vector<dpgam::FeatureSpec> feature_specs(Setup setup, int num_bins);

}  // namespace dpcate::synthdata

#endif  // DPCATE_SYNTHDATA_H_
