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

#ifndef DPCATE_DPGAM_H_
#define DPCATE_DPGAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpcate/accountant.hpp"

// Differentially private generalized additive models, trained by cyclic
// histogram boosting.
//
// Each feature is discretized into equal-width bins and carries a step
// function ("shape"). Training repeatedly sweeps the features; for each
// feature it releases the per-bin sums of clipped weighted residuals, divides
// by per-bin counts released once up front, and moves the shape a small step
// toward that average. Under a privacy budget every released statistic gets
// Gaussian noise calibrated by the accountant; because each training row
// falls in exactly one bin per feature, a released histogram is a single
// vector release whose L2 sensitivity under record substitution is sqrt(2)
// times the clipping bound, independent of the number of bins.
//
// The budget is split 10% (in squared GDP units) to the count histograms and
// 90% to the residual-sum histograms. Counts are noised once, floored at one,
// and reused every round, so the denominators spend budget only once; the
// per-round numerators dominate the cost. Small learning rates make each
// sweep's update an average of many noisy releases, which damps the injected
// noise roughly in proportion to 1 / (2 * learning_rate * rounds).
namespace dpcate::dpgam {

// Equal-width binning of one feature on [lo, hi]. Values outside the range
// fall into the nearest edge bin.
struct FeatureSpec {
  double lo = 0.0;
  double hi = 1.0;
  int num_bins = 32;

  int bin_of(double x) const;
};

enum class Link {
  kIdentity,
  kLogistic,
};

// One feature's fitted step function.
struct ShapeFunction {
  FeatureSpec spec;
  std::vector<double> values;  // one per bin

  double at(double x) const { return values[spec.bin_of(x)]; }
};

struct FitOptions {
  int rounds = 50;
  double learning_rate = 0.1;
  // Per-record clipping bound on the weighted residual entering each sum
  // release. Use 1 for logistic fits (residuals are probability differences)
  // and the target's bound for identity fits.
  double clip = 15.0;
  Link link = Link::kIdentity;
  std::uint64_t seed = 0;
};

// Columnar training data. features[j] holds feature j for all rows; weight
// is either empty (unit weights) or one non-negative value per row. Under a
// privacy budget weights must lie in [0, 1] so that the count histograms
// keep unit sensitivity.
struct TrainingSet {
  std::vector<std::vector<double>> features;
  std::vector<double> target;
  std::vector<double> weight;

  std::size_t num_rows() const { return target.size(); }
};

// Audit trail of one fit: what was released and at which noise scale.
struct FitReport {
  bool private_fit = false;
  double mu = 0.0;             // total GDP budget of this fit, 0 when non-private
  int planned_releases = 0;    // d count histograms + rounds * d sum histograms
  int noise_releases = 0;      // histograms actually noised; must equal the plan
  double sigma_count = 0.0;    // noise scale on each count histogram entry
  double sigma_sum = 0.0;      // noise scale on each residual-sum entry
  std::size_t rows_seen = 0;
};

// A fitted additive model. score() is the linear predictor; predict() applies
// the link's inverse (identity, or the logistic sigmoid).
class AdditiveModel {
 public:
  AdditiveModel(double intercept, std::vector<ShapeFunction> shapes, Link link);

  double intercept() const { return intercept_; }
  Link link() const { return link_; }
  const std::vector<ShapeFunction>& shapes() const { return shapes_; }

  double score(std::span<const double> row) const;
  double predict(std::span<const double> row) const;

  // Value the given feature's shape adds to the score at position x.
  double contribution(std::size_t feature, double x) const;

  nlohmann::json to_json() const;
  static AdditiveModel from_json(const nlohmann::json& j);

 private:
  double intercept_;
  std::vector<ShapeFunction> shapes_;
  Link link_;
};

struct FitResult {
  AdditiveModel model;
  FitReport report;
};

// Non-private fit: exact counts and sums, intercept seeded with the weighted
// target mean (its logit under the logistic link).
FitResult fit(const TrainingSet& data, const std::vector<FeatureSpec>& specs,
              const FitOptions& options);

// Private fit: one noisy count histogram per feature up front, one noisy
// clipped-residual-sum histogram per feature per round, intercept seeded at
// zero and recovered by the final centering step. The whole fit satisfies
// budget.mu-GDP on the training rows.
FitResult fit(const TrainingSet& data, const std::vector<FeatureSpec>& specs,
              const FitOptions& options, const accountant::PrivacyBudget& budget);

// Numerically stable logistic sigmoid, shared with the meta-learners.
double sigmoid(double x);

}  // namespace dpcate::dpgam

#endif  // DPCATE_DPGAM_H_
