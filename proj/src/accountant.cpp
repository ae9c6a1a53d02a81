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

#include "dpcate/accountant.hpp"

#include <cmath>
#include <stdexcept>

#include "dpcate/normal.hpp"

namespace dpcate::accountant {
namespace {

constexpr double kMuLo = 1e-6;
constexpr double kMuHi = 100.0;
constexpr double kRelTol = 1e-6;

void validate_eps_delta(const tradeoff::EpsDelta& ed) {
  if (!(ed.epsilon >= 0.0) || !std::isfinite(ed.epsilon)) {
    throw std::invalid_argument("accountant: epsilon must be finite and >= 0");
  }
  if (!(ed.delta > 0.0 && ed.delta < 1.0)) {
    throw std::invalid_argument("accountant: delta must lie in (0, 1)");
  }
}

}  // namespace

double delta_for_mu(double epsilon, double mu) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("delta_for_mu: mu must be positive");
  }
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("delta_for_mu: epsilon must be >= 0");
  }
  // Both terms are tail probabilities; normal_cdf keeps relative accuracy
  // there, so the difference is reliable down to delta near 1e-300.
  return normal_cdf(-epsilon / mu + 0.5 * mu) -
         std::exp(epsilon) * normal_cdf(-epsilon / mu - 0.5 * mu);
}

double mu_from_eps_delta(const tradeoff::EpsDelta& ed) {
  validate_eps_delta(ed);
  if (delta_for_mu(ed.epsilon, kMuLo) > ed.delta) {
    throw std::invalid_argument(
        "mu_from_eps_delta: budget unsatisfiable, delta too small for the "
        "supported mu range");
  }
  if (delta_for_mu(ed.epsilon, kMuHi) <= ed.delta) {
    return kMuHi;
  }
  // Invariant: delta(lo) <= delta < delta(hi). The lower end is always a
  // valid (conservative) answer; iterate until it is also tight.
  double lo = kMuLo, hi = kMuHi;
  for (int iter = 0; iter < 200; ++iter) {
    if (delta_for_mu(ed.epsilon, lo) >= ed.delta * (1.0 - kRelTol)) break;
    double mid = 0.5 * (lo + hi);
    if (delta_for_mu(ed.epsilon, mid) <= ed.delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

PrivacyBudget PrivacyBudget::from_eps_delta(const tradeoff::EpsDelta& ed) {
  return PrivacyBudget{ed, mu_from_eps_delta(ed)};
}

ReleasePlan plan_releases(double mu, int num_releases, double clip) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("plan_releases: mu must be positive");
  }
  if (num_releases < 1) {
    throw std::invalid_argument("plan_releases: need at least one release");
  }
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    throw std::invalid_argument("plan_releases: clip must be positive");
  }
  double sensitivity = std::sqrt(2.0) * clip;
  double mu_per_release = mu / std::sqrt(static_cast<double>(num_releases));
  return ReleasePlan{num_releases, sensitivity, sensitivity / mu_per_release};
}

ReleasePlan plan_releases(const PrivacyBudget& budget, int num_releases, double clip) {
  return plan_releases(budget.mu, num_releases, clip);
}

}  // namespace dpcate::accountant
