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

#include "dpcate/synthdata.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dpcate/random.hpp"

namespace dpcate::synthdata {
namespace {

// Seed of the fixed correlation matrix behind setup E. Arbitrary but frozen:
// changing it would silently redefine the setup's data law.
constexpr std::uint64_t kSetupESeed = 1729;

// log(1 + e^x) without overflow for large |x|.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

void check_dim(std::span<const double> x) {
  if (x.size() != kNumFeatures) {
    throw std::invalid_argument("synthdata: expected " + std::to_string(kNumFeatures) +
                                " covariates");
  }
}

// Lower-triangular L with M = L L^T; false when M is not numerically
// positive definite.
bool cholesky(const std::vector<std::vector<double>>& m, std::vector<std::vector<double>>& l) {
  const std::size_t d = m.size();
  l.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (s <= 1e-9) return false;
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return true;
}

}  // namespace

Setup setup_from_string(std::string_view name) {
  if (name.size() == 1) {
    switch (name[0]) {
      case 'A': case 'a': return Setup::kA;
      case 'B': case 'b': return Setup::kB;
      case 'C': case 'c': return Setup::kC;
      case 'D': case 'd': return Setup::kD;
      case 'E': case 'e': return Setup::kE;
    }
  }
  throw std::invalid_argument("synthdata: unknown setup '" + std::string(name) +
                              "', expected A, B, C, D, or E");
}

const char* to_string(Setup setup) {
  switch (setup) {
    case Setup::kA: return "A";
    case Setup::kB: return "B";
    case Setup::kC: return "C";
    case Setup::kD: return "D";
    case Setup::kE: return "E";
  }
  return "?";
}

double trim(double v, double lo) { return std::min(std::max(lo, v), 1.0 - lo); }

double baseline(Setup setup, std::span<const double> x) {
  check_dim(x);
  switch (setup) {
    case Setup::kA:
      return std::sin(std::numbers::pi * x[0] * x[1]) + 2.0 * (x[2] - 0.5) * (x[2] - 0.5) +
             x[3] + 0.5 * x[4];
    case Setup::kB:
      return std::max({x[0] + x[1], x[2], 0.0}) + std::max(x[3] + x[4], 0.0);
    case Setup::kC:
      return 2.0 * softplus(x[0] + x[1] + x[2]);
    case Setup::kD:
      return std::max(x[0] + x[1] + x[2], 0.0) + std::max(x[3] + x[4], 0.0);
    case Setup::kE: {
      double sum = 0.0;
      for (int i = 0; i < kNumFeatures; ++i) sum += (i + 1) * x[i];
      double indicator = (x[2] > -0.5 && x[2] < 0.5) ? 1.0 : 0.0;
      return sum + x[0] * x[5] + indicator;
    }
  }
  throw std::logic_error("synthdata: unreachable");
}

double propensity(Setup setup, std::span<const double> x) {
  check_dim(x);
  switch (setup) {
    case Setup::kA:
      return trim(std::sin(std::numbers::pi * x[0] * x[1]));
    case Setup::kB:
      return 0.5;
    case Setup::kC:
      return dpgam::sigmoid(-(x[1] + x[2]));
    case Setup::kD:
      return 1.0 / (1.0 + std::exp(-x[0]) + std::exp(-x[1]));
    case Setup::kE:
      return dpgam::sigmoid(-(x[0] + x[5]));
  }
  throw std::logic_error("synthdata: unreachable");
}

double treatment_effect(Setup setup, std::span<const double> x) {
  check_dim(x);
  switch (setup) {
    case Setup::kA:
      return 0.5 * (x[0] + x[1]);
    case Setup::kB:
      return x[0] + softplus(x[1]);
    case Setup::kC:
      return 1.0;
    case Setup::kD:
      return std::max(x[0] + x[1] + x[2], 0.0) - std::max(x[3] + x[4], 0.0);
    case Setup::kE:
      return dpgam::sigmoid(-x[0]) - x[1] + x[2] + x[3] + x[4] + x[5];
  }
  throw std::logic_error("synthdata: unreachable");
}

std::vector<std::vector<double>> random_correlation(int d, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("random_correlation: d must be at least 2");
  for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
    rng::SplitMix64 g(rng::derive_seed(seed, {attempt}));
    std::vector<std::vector<double>> a(d, std::vector<double>(d));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) a[i][j] = g.normal();
    }
    // Gram matrix of the rows, normalized to unit diagonal.
    std::vector<std::vector<double>> sigma(d, std::vector<double>(d));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += a[i][k] * a[j][k];
        sigma[i][j] = s;
      }
    }
    bool ok = true;
    for (int i = 0; i < d && ok; ++i) ok = sigma[i][i] > 0.0;
    if (!ok) continue;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (i != j) sigma[i][j] /= std::sqrt(sigma[i][i] * sigma[j][j]);
      }
    }
    for (int i = 0; i < d; ++i) sigma[i][i] = 1.0;
    std::vector<std::vector<double>> l;
    if (cholesky(sigma, l)) return sigma;
  }
  throw std::runtime_error("random_correlation: no positive definite draw in 10 attempts");
}

const std::vector<std::vector<double>>& setup_e_correlation() {
  static const std::vector<std::vector<double>> sigma =
      random_correlation(kNumFeatures, kSetupESeed);
  return sigma;
}

Draw generate(Setup setup, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("generate: n must be at least 1");

  std::vector<std::vector<double>> chol;
  if (setup == Setup::kE && !cholesky(setup_e_correlation(), chol)) {
    throw std::logic_error("generate: setup E correlation lost positive definiteness");
  }

  Draw draw;
  draw.obs.x.assign(kNumFeatures, {});
  for (std::vector<double>& col : draw.obs.x) col.reserve(n);
  draw.obs.y.reserve(n);
  draw.obs.t.reserve(n);
  draw.tau_true.reserve(n);
  draw.e_true.reserve(n);

  rng::SplitMix64 g(seed);
  double x[kNumFeatures];
  double z[kNumFeatures];
  for (std::size_t i = 0; i < n; ++i) {
    switch (setup) {
      case Setup::kA:
        for (double& v : x) v = g.uniform();
        break;
      case Setup::kB:
      case Setup::kC:
      case Setup::kD:
        for (double& v : x) v = g.normal();
        break;
      case Setup::kE:
        for (double& v : z) v = g.normal();
        for (int r = 0; r < kNumFeatures; ++r) {
          double s = 0.0;
          for (int c = 0; c <= r; ++c) s += chol[r][c] * z[c];
          x[r] = s;
        }
        break;
    }
    double e = propensity(setup, x);
    double tau = treatment_effect(setup, x);
    int t = g.bernoulli(e) ? 1 : 0;
    double y = baseline(setup, x) + t * tau + g.normal();

    for (int j = 0; j < kNumFeatures; ++j) draw.obs.x[j].push_back(x[j]);
    draw.obs.y.push_back(y);
    draw.obs.t.push_back(static_cast<std::int8_t>(t));
    draw.tau_true.push_back(tau);
    draw.e_true.push_back(e);
  }
  return draw;
}

std::vector<dpgam::FeatureSpec> feature_specs(Setup setup, int num_bins) {
  double lo = setup == Setup::kA ? 0.0 : -5.0;
  double hi = setup == Setup::kA ? 1.0 : 5.0;
  return std::vector<dpgam::FeatureSpec>(kNumFeatures, dpgam::FeatureSpec{lo, hi, num_bins});
}

}  // namespace dpcate::synthdata
