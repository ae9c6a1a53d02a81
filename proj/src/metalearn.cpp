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

#include "dpcate/metalearn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dpcate/accountant.hpp"
#include "dpcate/random.hpp"

namespace dpcate::metalearn {
namespace {

// Substream tags under the caller's seed: one for the partition shuffle and
// one per fitted module, so no two consumers share noise.
constexpr std::uint64_t kTagPartition = 1;
constexpr std::uint64_t kTagModuleBase = 2;

constexpr double kTreatmentLo = 0.0;
constexpr double kTreatmentHi = 1.0;

double clip_to(double v, double bound) { return std::clamp(v, -bound, bound); }

void validate_options(const CateOptions& options) {
  if (options.num_bins < 1) throw std::invalid_argument("fit_cate: num_bins must be positive");
  if (options.second_stage_bins < 1) {
    throw std::invalid_argument("fit_cate: second_stage_bins must be positive");
  }
  if (options.second_stage_rounds < 1) {
    throw std::invalid_argument("fit_cate: second_stage_rounds must be positive");
  }
  if (!(options.trim_lo > 0.0) || !(options.trim_hi < 1.0) ||
      !(options.trim_lo < options.trim_hi)) {
    throw std::invalid_argument("fit_cate: trim bounds must satisfy 0 < lo < hi < 1");
  }
  if (!(options.clip > 0.0) || !std::isfinite(options.clip)) {
    throw std::invalid_argument("fit_cate: clip must be positive and finite");
  }
}

dpgam::FitOptions base_fit_options(const CateOptions& options, std::uint64_t module_seed) {
  dpgam::FitOptions fo;
  fo.rounds = options.rounds;
  fo.learning_rate = options.learning_rate;
  fo.seed = module_seed;
  return fo;
}

dpgam::FitResult run_fit(const dpgam::TrainingSet& training,
                         const std::vector<dpgam::FeatureSpec>& specs,
                         const dpgam::FitOptions& fo,
                         const std::optional<accountant::PrivacyBudget>& budget) {
  if (budget.has_value()) return dpgam::fit(training, specs, fo, *budget);
  return dpgam::fit(training, specs, fo);
}

// Training rows for a part, with features either x alone or (t, x).
dpgam::TrainingSet make_training(const ObservationSet& part, bool with_treatment) {
  dpgam::TrainingSet training;
  if (with_treatment) {
    std::vector<double> t_col;
    t_col.reserve(part.num_rows());
    for (std::int8_t t : part.t) t_col.push_back(static_cast<double>(t));
    training.features.push_back(std::move(t_col));
  }
  for (const std::vector<double>& col : part.x) training.features.push_back(col);
  return training;
}

void require_part_big_enough(std::size_t part_rows, std::size_t part_index,
                             const CateOptions& options) {
  if (part_rows < static_cast<std::size_t>(options.num_bins)) {
    throw std::invalid_argument(
        "fit_cate: part " + std::to_string(part_index) + " has " + std::to_string(part_rows) +
        " rows, fewer than num_bins = " + std::to_string(options.num_bins) +
        "; reduce num_bins or provide more data");
  }
}

}  // namespace

Learner learner_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dr") return Learner::kDr;
  if (lower == "r") return Learner::kR;
  if (lower == "s") return Learner::kS;
  throw std::invalid_argument("unknown learner '" + std::string(name) +
                              "', expected dr, r, or s");
}

const char* to_string(Learner learner) {
  switch (learner) {
    case Learner::kDr: return "dr";
    case Learner::kR: return "r";
    case Learner::kS: return "s";
  }
  return "?";
}

SplitPlan partition(std::size_t n, std::span<const double> ratios, std::uint64_t seed) {
  if (ratios.empty()) throw std::invalid_argument("partition: no ratios");
  double total = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw std::invalid_argument("partition: ratios must be positive");
    total += r;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("partition: ratios must sum to 1");
  }
  if (n < ratios.size()) throw std::invalid_argument("partition: more parts than rows");

  // Largest-remainder sizing: floor everything, then hand the leftover rows
  // to the largest fractional parts (ties to the earlier part).
  const std::size_t k = ratios.size();
  std::vector<std::size_t> sizes(k);
  std::vector<std::pair<double, std::size_t>> remainders(k);
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < k; ++p) {
    double exact = ratios[p] * static_cast<double>(n);
    sizes[p] = static_cast<std::size_t>(exact);
    remainders[p] = {exact - static_cast<double>(sizes[p]), p};
    assigned += sizes[p];
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t leftover = n - assigned, idx = 0; leftover > 0; --leftover, ++idx) {
    sizes[remainders[idx % k].second] += 1;
  }
  for (std::size_t p = 0; p < k; ++p) {
    if (sizes[p] == 0) {
      throw std::invalid_argument("partition: part " + std::to_string(p) +
                                  " would be empty; increase n or its ratio");
    }
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng::SplitMix64 g(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(g.below(i + 1));
    std::swap(order[i], order[j]);
  }

  SplitPlan plan;
  plan.parts.resize(k);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < k; ++p) {
    plan.parts[p].assign(order.begin() + offset, order.begin() + offset + sizes[p]);
    std::sort(plan.parts[p].begin(), plan.parts[p].end());
    offset += sizes[p];
  }
  return plan;
}

double dr_pseudo_outcome(double y, int t, double e, double mu1, double mu0) {
  if (!(e > 0.0) || !(e < 1.0)) {
    throw std::invalid_argument("dr_pseudo_outcome: propensity must lie in (0, 1)");
  }
  double psi = mu1 - mu0;
  if (t == 1) {
    psi += (y - mu1) / e;
  } else {
    psi -= (y - mu0) / (1.0 - e);
  }
  return psi;
}

std::pair<double, double> r_transform(double y, int t, double eta, double e) {
  return {y - eta, static_cast<double>(t) - e};
}

double CateModel::predict(std::span<const double> x) const {
  if (x.size() != num_features) {
    throw std::invalid_argument("CateModel: input has wrong number of features");
  }
  if (learner == Learner::kS) return tau_constant;
  return second_stage->predict(x);
}

CateModel fit_cate(const ObservationSet& data, Learner learner,
                   const std::optional<tradeoff::EpsDelta>& budget_spec,
                   const std::vector<dpgam::FeatureSpec>& feature_specs,
                   const CateOptions& options) {
  data.validate();
  validate_options(options);
  if (feature_specs.size() != data.num_features()) {
    throw std::invalid_argument("fit_cate: feature spec count does not match data");
  }

  std::optional<accountant::PrivacyBudget> budget;
  if (budget_spec.has_value()) {
    budget = accountant::PrivacyBudget::from_eps_delta(*budget_spec);
  }

  const std::size_t n = data.num_rows();
  CateModel model;
  model.learner = learner;
  model.num_features = data.num_features();

  // Feature layout of the response fit: treatment first, then x.
  std::vector<dpgam::FeatureSpec> response_specs;
  response_specs.push_back({kTreatmentLo, kTreatmentHi, 2});
  response_specs.insert(response_specs.end(), feature_specs.begin(), feature_specs.end());

  auto module_seed = [&](std::uint64_t index) {
    return rng::derive_seed(options.seed, {kTagModuleBase + index});
  };
  auto clip_targets = [&](std::vector<double> ys) {
    for (double& y : ys) y = clip_to(y, options.clip);
    return ys;
  };
  auto trim_propensity = [&](double e) {
    return std::clamp(e, options.trim_lo, options.trim_hi);
  };

  int num_modules = 0;

  if (learner == Learner::kS) {
    // One module over all rows, treatment as a feature; k = 0 splits.
    require_part_big_enough(n, 0, options);
    dpgam::TrainingSet training = make_training(data, true);
    training.target = clip_targets(data.y);
    dpgam::FitOptions fo = base_fit_options(options, module_seed(0));
    fo.clip = options.clip;
    dpgam::FitResult fitted = run_fit(training, response_specs, fo, budget);

    std::vector<std::uint32_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    model.audits.push_back({"response", 0, std::move(all_rows), fitted.report});
    model.tau_constant =
        fitted.model.contribution(0, kTreatmentHi) - fitted.model.contribution(0, kTreatmentLo);
    model.response = std::move(fitted.model);
    num_modules = 1;
  } else {
    if (options.ratios.size() != 3) {
      throw std::invalid_argument("fit_cate: DR and R learners need exactly 3 ratios");
    }
    SplitPlan plan =
        partition(n, options.ratios, rng::derive_seed(options.seed, {kTagPartition}));
    for (std::size_t p = 0; p < plan.parts.size(); ++p) {
      require_part_big_enough(plan.parts[p].size(), p, options);
    }
    ObservationSet part0 = data.subset(plan.parts[0]);
    ObservationSet part1 = data.subset(plan.parts[1]);
    ObservationSet part2 = data.subset(plan.parts[2]);

    // Module 1: logistic propensity on part 0.
    {
      dpgam::TrainingSet training = make_training(part0, false);
      training.target.reserve(part0.num_rows());
      for (std::int8_t t : part0.t) training.target.push_back(static_cast<double>(t));
      dpgam::FitOptions fo = base_fit_options(options, module_seed(0));
      fo.link = dpgam::Link::kLogistic;
      fo.clip = 1.0;
      dpgam::FitResult fitted = run_fit(training, feature_specs, fo, budget);
      model.audits.push_back({"propensity", 0, plan.parts[0], fitted.report});
      model.propensity = std::move(fitted.model);
    }

    // Module 2: the outcome-side nuisance on part 1. The DR learner models
    // the responses mu(t, x); the R learner models the mean eta(x).
    if (learner == Learner::kDr) {
      dpgam::TrainingSet training = make_training(part1, true);
      training.target = clip_targets(part1.y);
      dpgam::FitOptions fo = base_fit_options(options, module_seed(1));
      fo.clip = options.clip;
      dpgam::FitResult fitted = run_fit(training, response_specs, fo, budget);
      model.audits.push_back({"response", 1, plan.parts[1], fitted.report});
      model.response = std::move(fitted.model);
    } else {
      dpgam::TrainingSet training = make_training(part1, false);
      training.target = clip_targets(part1.y);
      dpgam::FitOptions fo = base_fit_options(options, module_seed(1));
      fo.clip = options.clip;
      dpgam::FitResult fitted = run_fit(training, feature_specs, fo, budget);
      model.audits.push_back({"outcome", 1, plan.parts[1], fitted.report});
      model.outcome = std::move(fitted.model);
    }

    // Module 3: second stage on part 2, built only from part-2 rows and the
    // fitted nuisance models.
    const std::size_t d = data.num_features();
    const std::size_t m = part2.num_rows();
    dpgam::TrainingSet training = make_training(part2, false);
    std::vector<double> row(d);
    std::vector<double> response_row(d + 1);
    if (learner == Learner::kDr) {
      training.target.reserve(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) row[j] = part2.x[j][i];
        double e = trim_propensity(model.propensity->predict(row));
        response_row[0] = kTreatmentHi;
        std::copy(row.begin(), row.end(), response_row.begin() + 1);
        double mu1 = model.response->predict(response_row);
        response_row[0] = kTreatmentLo;
        double mu0 = model.response->predict(response_row);
        double psi = dr_pseudo_outcome(part2.y[i], part2.t[i], e, mu1, mu0);
        training.target.push_back(clip_to(psi, options.clip));
      }
    } else {
      training.target.reserve(m);
      training.weight.reserve(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) row[j] = part2.x[j][i];
        double e = trim_propensity(model.propensity->predict(row));
        double eta = model.outcome->predict(row);
        auto [y_res, t_res] = r_transform(part2.y[i], part2.t[i], eta, e);
        training.weight.push_back(t_res * t_res);
        training.target.push_back(clip_to(y_res / t_res, options.clip));
      }
    }
    dpgam::FitOptions fo = base_fit_options(options, module_seed(2));
    fo.clip = options.clip;
    fo.rounds = options.second_stage_rounds;
    std::vector<dpgam::FeatureSpec> stage_specs = feature_specs;
    for (dpgam::FeatureSpec& spec : stage_specs) spec.num_bins = options.second_stage_bins;
    dpgam::FitResult fitted = run_fit(training, stage_specs, fo, budget);
    model.audits.push_back({"second_stage", 2, plan.parts[2], fitted.report});
    model.second_stage = std::move(fitted.model);
    num_modules = 3;
  }

  if (budget.has_value()) {
    // Every module enjoys the full budget on its own rows; the procedure as
    // a whole is governed by their parallel composition.
    std::vector<tradeoff::TradeoffCurve> curves(
        num_modules, tradeoff::make_eps_delta(budget->eps_delta));
    model.composed_privacy = tradeoff::compose_parallel(curves);
  } else {
    model.composed_privacy = tradeoff::zero_curve();
  }
  return model;
}

}  // namespace dpcate::metalearn
