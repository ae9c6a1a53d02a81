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

#include "dpcate/dpgam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpcate/random.hpp"

namespace dpcate::dpgam {
namespace {

// Share of the squared GDP budget spent on the one-time count histograms;
// the rest goes to the per-round residual-sum histograms.
constexpr double kCountBudgetShare = 0.1;

// Stream tag separating fit noise from every other consumer of a seed.
constexpr std::uint64_t kNoiseTag = 0x647067616d666974ULL;

double clip_to(double v, double bound) { return std::clamp(v, -bound, bound); }

void validate_inputs(const TrainingSet& data, const std::vector<FeatureSpec>& specs,
                     const FitOptions& options, bool private_fit) {
  const std::size_t n = data.num_rows();
  if (n == 0) throw std::invalid_argument("dpgam: training set is empty");
  if (specs.empty()) throw std::invalid_argument("dpgam: no features specified");
  if (data.features.size() != specs.size()) {
    throw std::invalid_argument("dpgam: feature column count does not match specs");
  }
  for (const FeatureSpec& s : specs) {
    if (!(s.lo < s.hi) || !std::isfinite(s.lo) || !std::isfinite(s.hi)) {
      throw std::invalid_argument("dpgam: feature range must be finite with lo < hi");
    }
    if (s.num_bins < 1) throw std::invalid_argument("dpgam: num_bins must be positive");
  }
  for (const std::vector<double>& col : data.features) {
    if (col.size() != n) throw std::invalid_argument("dpgam: ragged feature column");
    for (double v : col) {
      if (!std::isfinite(v)) throw std::invalid_argument("dpgam: non-finite feature value");
    }
  }
  for (double y : data.target) {
    if (!std::isfinite(y)) throw std::invalid_argument("dpgam: non-finite target value");
    if (options.link == Link::kLogistic && y != 0.0 && y != 1.0) {
      throw std::invalid_argument("dpgam: logistic link requires 0/1 targets");
    }
  }
  if (!data.weight.empty()) {
    if (data.weight.size() != n) throw std::invalid_argument("dpgam: weight length mismatch");
    double total = 0.0;
    for (double w : data.weight) {
      if (!std::isfinite(w) || w < 0.0) {
        throw std::invalid_argument("dpgam: weights must be finite and non-negative");
      }
      if (private_fit && w > 1.0) {
        throw std::invalid_argument("dpgam: weights must lie in [0, 1] under a privacy budget");
      }
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("dpgam: weights sum to zero");
  }
  if (options.rounds < 1) throw std::invalid_argument("dpgam: rounds must be positive");
  if (!(options.learning_rate > 0.0) || options.learning_rate > 1.0) {
    throw std::invalid_argument("dpgam: learning_rate must be in (0, 1]");
  }
  if (!(options.clip > 0.0) || !std::isfinite(options.clip)) {
    throw std::invalid_argument("dpgam: clip must be positive and finite");
  }
}

FitResult fit_impl(const TrainingSet& data, const std::vector<FeatureSpec>& specs,
                   const FitOptions& options, const accountant::PrivacyBudget* budget) {
  validate_inputs(data, specs, options, budget != nullptr);
  const std::size_t n = data.num_rows();
  const std::size_t d = specs.size();
  const bool logistic = options.link == Link::kLogistic;

  auto weight_of = [&](std::size_t i) {
    return data.weight.empty() ? 1.0 : data.weight[i];
  };

  std::vector<std::vector<int>> bin(d, std::vector<int>(n));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) bin[j][i] = specs[j].bin_of(data.features[j][i]);
  }

  std::vector<std::vector<double>> counts(d);
  for (std::size_t j = 0; j < d; ++j) {
    counts[j].assign(specs[j].num_bins, 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[j][bin[j][i]] += weight_of(i);
  }

  FitReport report;
  report.rows_seen = n;

  rng::SplitMix64 noise(rng::derive_seed(options.seed, {kNoiseTag}));
  if (budget != nullptr) {
    report.private_fit = true;
    report.mu = budget->mu;
    report.planned_releases = static_cast<int>(d) + options.rounds * static_cast<int>(d);
    // Squared GDP budgets add across releases on the same rows, so splitting
    // mu^2 gives each phase an independent sub-budget.
    double mu_counts = std::sqrt(kCountBudgetShare) * budget->mu;
    double mu_sums = std::sqrt(1.0 - kCountBudgetShare) * budget->mu;
    report.sigma_count =
        accountant::plan_releases(mu_counts, static_cast<int>(d), 1.0).sigma;
    report.sigma_sum =
        accountant::plan_releases(mu_sums, options.rounds * static_cast<int>(d), options.clip)
            .sigma;
    // Counts are released once and flooring is post-processing, so reusing
    // them every round costs nothing further. The floor keeps denominators
    // positive and the per-bin steps bounded.
    for (std::size_t j = 0; j < d; ++j) {
      for (double& c : counts[j]) {
        c = std::max(c + report.sigma_count * noise.normal(), 1.0);
      }
      report.noise_releases++;
    }
  }

  // Without privacy the intercept starts at the weighted target mean (its
  // logit under the logistic link), which makes the fit exact on constant
  // targets. A private fit starts at zero and recovers the level through the
  // centering step below, paid for by the already-released counts.
  double intercept = 0.0;
  if (budget == nullptr) {
    double sw = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sw += weight_of(i);
      swy += weight_of(i) * data.target[i];
    }
    double ybar = swy / sw;
    if (logistic) {
      double p = std::clamp(ybar, 1e-6, 1.0 - 1e-6);
      intercept = std::log(p / (1.0 - p));
    } else {
      intercept = ybar;
    }
  }

  std::vector<std::vector<double>> shape(d);
  for (std::size_t j = 0; j < d; ++j) shape[j].assign(specs[j].num_bins, 0.0);
  std::vector<double> eta(n, intercept);

  std::vector<double> sums;
  std::vector<double> steps;
  for (int r = 0; r < options.rounds; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      const int num_bins = specs[j].num_bins;
      sums.assign(num_bins, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double resid = data.target[i] - (logistic ? sigmoid(eta[i]) : eta[i]);
        sums[bin[j][i]] += clip_to(weight_of(i) * resid, options.clip);
      }
      if (budget != nullptr) {
        for (double& s : sums) s += report.sigma_sum * noise.normal();
        report.noise_releases++;
      }
      steps.assign(num_bins, 0.0);
      for (int b = 0; b < num_bins; ++b) {
        if (counts[j][b] > 0.0) {
          steps[b] = options.learning_rate * sums[b] / counts[j][b];
        }
      }
      for (int b = 0; b < num_bins; ++b) shape[j][b] += steps[b];
      for (std::size_t i = 0; i < n; ++i) eta[i] += steps[bin[j][i]];
    }
  }

  // Move each shape's count-weighted mean into the intercept. Predictions are
  // unchanged; the decomposition becomes identifiable, and a private fit gets
  // its level term without an extra release.
  for (std::size_t j = 0; j < d; ++j) {
    double total = 0.0, mean = 0.0;
    for (int b = 0; b < specs[j].num_bins; ++b) {
      total += counts[j][b];
      mean += counts[j][b] * shape[j][b];
    }
    if (total > 0.0) {
      mean /= total;
      for (double& v : shape[j]) v -= mean;
      intercept += mean;
    }
  }

  std::vector<ShapeFunction> shapes;
  shapes.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    shapes.push_back({specs[j], std::move(shape[j])});
  }
  return {AdditiveModel(intercept, std::move(shapes), options.link), report};
}

}  // namespace

int FeatureSpec::bin_of(double x) const {
  double scaled = (x - lo) / (hi - lo) * num_bins;
  // The comparisons also reroute NaN and infinities to an edge bin, keeping
  // the double-to-int cast in defined territory.
  if (!(scaled > 0.0)) return 0;
  if (scaled >= num_bins) return num_bins - 1;
  return static_cast<int>(scaled);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

AdditiveModel::AdditiveModel(double intercept, std::vector<ShapeFunction> shapes, Link link)
    : intercept_(intercept), shapes_(std::move(shapes)), link_(link) {
  if (!std::isfinite(intercept_)) {
    throw std::invalid_argument("AdditiveModel: non-finite intercept");
  }
  for (const ShapeFunction& s : shapes_) {
    if (s.values.size() != static_cast<std::size_t>(s.spec.num_bins)) {
      throw std::invalid_argument("AdditiveModel: shape size does not match num_bins");
    }
    for (double v : s.values) {
      if (!std::isfinite(v)) throw std::invalid_argument("AdditiveModel: non-finite shape value");
    }
  }
}

double AdditiveModel::score(std::span<const double> row) const {
  if (row.size() != shapes_.size()) {
    throw std::invalid_argument("AdditiveModel: row has wrong number of features");
  }
  double s = intercept_;
  for (std::size_t j = 0; j < shapes_.size(); ++j) s += shapes_[j].at(row[j]);
  return s;
}

double AdditiveModel::predict(std::span<const double> row) const {
  double s = score(row);
  return link_ == Link::kLogistic ? sigmoid(s) : s;
}

double AdditiveModel::contribution(std::size_t feature, double x) const {
  if (feature >= shapes_.size()) {
    throw std::invalid_argument("AdditiveModel: feature index out of range");
  }
  return shapes_[feature].at(x);
}

nlohmann::json AdditiveModel::to_json() const {
  nlohmann::json features = nlohmann::json::array();
  for (const ShapeFunction& s : shapes_) {
    features.push_back({{"lo", s.spec.lo},
                        {"hi", s.spec.hi},
                        {"num_bins", s.spec.num_bins},
                        {"values", s.values}});
  }
  return {{"link", link_ == Link::kLogistic ? "logistic" : "identity"},
          {"intercept", intercept_},
          {"features", std::move(features)}};
}

AdditiveModel AdditiveModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("link") || !j.contains("intercept") ||
      !j.contains("features") || !j["features"].is_array()) {
    throw std::invalid_argument("AdditiveModel: malformed model JSON");
  }
  std::string link_name = j["link"].get<std::string>();
  Link link;
  if (link_name == "identity") {
    link = Link::kIdentity;
  } else if (link_name == "logistic") {
    link = Link::kLogistic;
  } else {
    throw std::invalid_argument("AdditiveModel: unknown link '" + link_name + "'");
  }
  std::vector<ShapeFunction> shapes;
  for (const nlohmann::json& f : j["features"]) {
    if (!f.contains("lo") || !f.contains("hi") || !f.contains("num_bins") ||
        !f.contains("values")) {
      throw std::invalid_argument("AdditiveModel: malformed feature entry");
    }
    FeatureSpec spec{f["lo"].get<double>(), f["hi"].get<double>(), f["num_bins"].get<int>()};
    std::vector<double> values = f["values"].get<std::vector<double>>();
    shapes.push_back({spec, std::move(values)});
  }
  return AdditiveModel(j["intercept"].get<double>(), std::move(shapes), link);
}

FitResult fit(const TrainingSet& data, const std::vector<FeatureSpec>& specs,
              const FitOptions& options) {
  return fit_impl(data, specs, options, nullptr);
}

FitResult fit(const TrainingSet& data, const std::vector<FeatureSpec>& specs,
              const FitOptions& options, const accountant::PrivacyBudget& budget) {
  return fit_impl(data, specs, options, &budget);
}

}  // namespace dpcate::dpgam
