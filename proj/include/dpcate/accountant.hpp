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

#ifndef DPCATE_ACCOUNTANT_H_
#define DPCATE_ACCOUNTANT_H_

#include "dpcate/tradeoff.hpp"

// Gaussian differential-privacy accounting.
//
// A mechanism is mu-GDP when its trade-off curve dominates the Gaussian curve
// G_mu. GDP composes by root-sum-of-squares: K releases at mu_r each are
// jointly (sqrt(K) * mu_r)-GDP, which makes it the natural currency for an
// iterative trainer that emits many noisy statistics. The accountant converts
// a user-facing (epsilon, delta) budget into the largest mu that still
// satisfies it, then splits mu across the planned releases and returns the
// per-release Gaussian noise scale.
namespace dpcate::accountant {

// The exact delta for which mu-GDP implies (epsilon, delta)-DP:
//   delta(eps; mu) = Phi(-eps/mu + mu/2) - e^eps * Phi(-eps/mu - mu/2).
// Increasing in mu, decreasing in epsilon.
double delta_for_mu(double epsilon, double mu);

// Largest mu whose implied delta at this epsilon does not exceed ed.delta,
// located by bisection on [1e-6, 100]. The returned mu satisfies
//   delta_for_mu(eps, mu) in [delta * (1 - 1e-6), delta],
// so the budget is met tightly but never exceeded. Throws when the bracket
// cannot satisfy the budget (delta too small for any mu >= 1e-6).
double mu_from_eps_delta(const tradeoff::EpsDelta& ed);

inline double mu_from_eps_delta(double epsilon, double delta) {
  return mu_from_eps_delta(tradeoff::EpsDelta{epsilon, delta});
}

// An (epsilon, delta) budget together with its GDP equivalent.
struct PrivacyBudget {
  tradeoff::EpsDelta eps_delta;
  double mu = 0.0;

  static PrivacyBudget from_eps_delta(const tradeoff::EpsDelta& ed);
};

// Noise plan for a batch of Gaussian releases under a common budget.
struct ReleasePlan {
  int num_releases = 0;
  double l2_sensitivity = 0.0;  // sqrt(2) * clip, substitution neighbours
  double sigma = 0.0;           // per-release Gaussian noise scale
};

// Splits mu evenly over num_releases vector releases whose entries change by
// at most clip in two coordinates when one record is substituted (L2
// sensitivity sqrt(2) * clip). Each release gets mu_r = mu / sqrt(K), hence
//   sigma = sqrt(2) * clip * sqrt(K) / mu.
ReleasePlan plan_releases(double mu, int num_releases, double clip);
ReleasePlan plan_releases(const PrivacyBudget& budget, int num_releases, double clip);

}  // namespace dpcate::accountant

#endif  // DPCATE_ACCOUNTANT_H_
