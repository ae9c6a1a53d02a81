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

#ifndef DPCATE_METALEARN_H_
#define DPCATE_METALEARN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpcate/dataset.hpp"
#include "dpcate/dpgam.hpp"
#include "dpcate/tradeoff.hpp"

// Meta-learners for the conditional average treatment effect (CATE) under
// differential privacy.
//
// The estimators follow one sample-splitting recipe: partition the data
// uniformly at random into parts, fit nuisance models on the early parts,
// transform the last part's rows into a pseudo-regression using only those
// fitted models, and fit the second stage on the transformed rows. Each
// fitted module sees its own part of the data and nothing else, so when
// every module satisfies the same trade-off curve, the whole procedure
// satisfies the parallel composition of those curves, which for identical
// budgets is the single-module curve itself. Releasing the intermediate
// models is post-processing and costs no additional budget.
//
// Three instantiations:
//   DR: propensity e-hat on part 1, responses mu-hat(t, x) on part 2, then
//       regress the doubly robust pseudo-outcome on x over part 3.
//   R:  propensity e-hat on part 1, conditional mean eta-hat(x) on part 2,
//       then weighted regression on part 3 with weights (T - e-hat)^2 and
//       targets (Y - eta-hat) / (T - e-hat).
//   S:  one response fit mu-hat(t, x) on all rows with the treatment as an
//       ordinary feature; tau-hat = mu-hat(1, x) - mu-hat(0, x), which the
//       additive structure makes a constant (the treatment shape's gap).
namespace dpcate::metalearn {

using data::ObservationSet;

enum class Learner { kDr, kR, kS };

// Accepts "dr", "r", "s" in any case; throws std::invalid_argument otherwise.
Learner learner_from_string(std::string_view name);
const char* to_string(Learner learner);

// A random partition of {0, .., n-1}: part sizes are the ratios scaled by n
// with largest-remainder rounding, and the assignment is uniform over all
// partitions with those sizes (seeded shuffle, contiguous slices).
struct SplitPlan {
  std::vector<std::vector<std::uint32_t>> parts;
};
SplitPlan partition(std::size_t n, std::span<const double> ratios, std::uint64_t seed);

// The doubly robust score
//   psi = mu1 - mu0 + t (y - mu1) / e - (1 - t) (y - mu0) / (1 - e),
// an unbiased CATE pseudo-outcome when either the propensity e or the
// response pair (mu1, mu0) is correct. Requires e in (0, 1).
double dr_pseudo_outcome(double y, int t, double e, double mu1, double mu0);

// Residual pair (y - eta, t - e) feeding the R-learner's weighted stage.
std::pair<double, double> r_transform(double y, int t, double eta, double e);

struct CateOptions {
  // Coarser than the boosting engine's standalone default: each module sees
  // only its own part of the rows, and under privacy every histogram update
  // carries noise whose relative size grows as per-bin counts shrink, so the
  // meta-learner trades some shape resolution for markedly lower noise in
  // all four fits.
  int num_bins = 16;
  int rounds = 50;
  double learning_rate = 0.1;
  // The second stage regresses pseudo-outcomes whose inverse-propensity
  // terms inflate the target variance well beyond the raw outcome noise, so
  // it defaults to a coarser grid and fewer rounds than the nuisance fits:
  // the intercept (a plain target mean) is unaffected, while the per-bin
  // shapes absorb far less of that noise at the cost of a mild smoothing
  // bias on strongly heterogeneous effects.
  int second_stage_bins = 8;
  int second_stage_rounds = 5;
  // Public outcome bound: targets and pseudo-outcomes are clipped to
  // [-clip, clip] before any fit.
  double clip = 15.0;
  // Fitted propensities are clamped into [trim_lo, trim_hi] wherever they
  // are consumed, keeping the pseudo-outcome denominators bounded without
  // touching the propensity fit itself.
  double trim_lo = 0.05;
  double trim_hi = 0.95;
  // Part fractions for the two nuisance fits and the second stage.
  std::vector<double> ratios = {0.25, 0.25, 0.5};
  std::uint64_t seed = 0;
};

// What one fitted module touched and released.
struct ModuleAudit {
  std::string module;                // "propensity", "response", "outcome", "second_stage"
  std::size_t part = 0;              // index into the split plan
  std::vector<std::uint32_t> rows;   // training rows, sorted ascending
  dpgam::FitReport report;
};

// A fitted CATE estimator with its nuisance models, audit trail, and the
// trade-off curve certified for the whole procedure.
struct CateModel {
  Learner learner = Learner::kDr;
  std::size_t num_features = 0;

  std::optional<dpgam::AdditiveModel> propensity;    // logistic, over x
  std::optional<dpgam::AdditiveModel> response;      // identity, over (t, x)
  std::optional<dpgam::AdditiveModel> outcome;       // identity, over x
  std::optional<dpgam::AdditiveModel> second_stage;  // identity, over x
  double tau_constant = 0.0;                         // the S-learner's estimate

  std::vector<ModuleAudit> audits;
  tradeoff::TradeoffCurve composed_privacy = tradeoff::zero_curve();

  double predict(std::span<const double> x) const;
};

// Fits the chosen learner. A present budget grants each module the full
// (epsilon, delta) on its own disjoint part; absent budget means exact,
// non-private fits (and a zero composed curve, since nothing is certified).
CateModel fit_cate(const ObservationSet& data, Learner learner,
                   const std::optional<tradeoff::EpsDelta>& budget,
                   const std::vector<dpgam::FeatureSpec>& feature_specs,
                   const CateOptions& options);

}  // namespace dpcate::metalearn

#endif  // DPCATE_METALEARN_H_
