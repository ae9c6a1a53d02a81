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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dpcate/accountant.hpp"
#include "dpcate/dpgam.hpp"
#include "dpcate/random.hpp"

namespace {

using dpcate::accountant::PrivacyBudget;
using dpcate::dpgam::AdditiveModel;
using dpcate::dpgam::FeatureSpec;
using dpcate::dpgam::FitOptions;
using dpcate::dpgam::FitResult;
using dpcate::dpgam::Link;
using dpcate::dpgam::TrainingSet;

TrainingSet grid_data(int n, int num_features, std::uint64_t seed) {
  dpcate::rng::SplitMix64 g(seed);
  TrainingSet data;
  data.features.resize(num_features);
  for (int j = 0; j < num_features; ++j) {
    data.features[j].resize(n);
    for (int i = 0; i < n; ++i) data.features[j][i] = g.uniform();
  }
  data.target.resize(n);
  return data;
}

TEST_CASE("bins cover the range and clamp outside it") {
  FeatureSpec s{0.0, 1.0, 4};
  CHECK(s.bin_of(0.0) == 0);
  CHECK(s.bin_of(0.24) == 0);
  CHECK(s.bin_of(0.25) == 1);
  CHECK(s.bin_of(0.999) == 3);
  CHECK(s.bin_of(1.0) == 3);
  CHECK(s.bin_of(-7.0) == 0);
  CHECK(s.bin_of(42.0) == 3);
  CHECK(s.bin_of(std::nan("")) == 0);
  FeatureSpec treatment{0.0, 1.0, 2};
  CHECK(treatment.bin_of(0.0) == 0);
  CHECK(treatment.bin_of(1.0) == 1);
}

TEST_CASE("constant targets are fitted exactly without privacy") {
  TrainingSet data = grid_data(200, 2, 1);
  for (double& y : data.target) y = 3.25;
  FitResult res = dpcate::dpgam::fit(data, {{0.0, 1.0, 8}, {0.0, 1.0, 8}}, FitOptions{});
  CHECK(res.model.intercept() == doctest::Approx(3.25).epsilon(1e-12));
  for (const auto& s : res.model.shapes()) {
    for (double v : s.values) CHECK(std::fabs(v) < 1e-12);
  }
  double row[2] = {0.3, 0.9};
  CHECK(res.model.predict(row) == doctest::Approx(3.25).epsilon(1e-12));
  CHECK_FALSE(res.report.private_fit);
  CHECK(res.report.planned_releases == 0);
  CHECK(res.report.rows_seen == 200);
}

TEST_CASE("boosting recovers a step function") {
  TrainingSet data = grid_data(2000, 1, 2);
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    data.target[i] = data.features[0][i] >= 0.5 ? 1.0 : -1.0;
  }
  FitResult res = dpcate::dpgam::fit(data, {{0.0, 1.0, 32}}, FitOptions{});
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    double row[1] = {data.features[0][i]};
    CHECK(std::fabs(res.model.predict(row) - data.target[i]) < 0.05);
  }
}

TEST_CASE("boosting recovers an additive surface") {
  TrainingSet data = grid_data(5000, 2, 3);
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    double x0 = data.features[0][i], x1 = data.features[1][i];
    data.target[i] = x0 + 2.0 * x1 * x1;
  }
  FitResult res =
      dpcate::dpgam::fit(data, {{0.0, 1.0, 32}, {0.0, 1.0, 32}}, FitOptions{});
  double mse = 0.0;
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    double row[2] = {data.features[0][i], data.features[1][i]};
    double e = res.model.predict(row) - data.target[i];
    mse += e * e;
  }
  mse /= static_cast<double>(data.target.size());
  // Residual error is dominated by within-bin variation of the true surface.
  CHECK(mse < 0.02);
}

TEST_CASE("separable effects land on separate shapes") {
  TrainingSet data = grid_data(4000, 2, 4);
  // Feature 0 acts like a binary treatment with additive effect 3.
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    data.features[0][i] = data.features[0][i] < 0.5 ? 0.0 : 1.0;
    data.target[i] = 3.0 * data.features[0][i] + data.features[1][i];
  }
  FitResult res =
      dpcate::dpgam::fit(data, {{0.0, 1.0, 2}, {0.0, 1.0, 32}}, FitOptions{});
  double effect = res.model.contribution(0, 1.0) - res.model.contribution(0, 0.0);
  CHECK(effect == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("logistic link yields calibrated probabilities") {
  TrainingSet data = grid_data(3000, 1, 5);
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    data.target[i] = data.features[0][i] >= 0.5 ? 1.0 : 0.0;
  }
  FitOptions opt;
  opt.link = Link::kLogistic;
  opt.clip = 1.0;
  FitResult res = dpcate::dpgam::fit(data, {{0.0, 1.0, 32}}, opt);
  double lo_row[1] = {0.2}, hi_row[1] = {0.8};
  CHECK(res.model.predict(lo_row) < 0.2);
  CHECK(res.model.predict(hi_row) > 0.8);
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    double row[1] = {x};
    double p = res.model.predict(row);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("logistic link rejects non-binary targets") {
  TrainingSet data = grid_data(100, 1, 6);
  for (double& y : data.target) y = 0.5;
  FitOptions opt;
  opt.link = Link::kLogistic;
  CHECK_THROWS_AS(dpcate::dpgam::fit(data, {{0.0, 1.0, 8}}, opt), std::invalid_argument);
}

TEST_CASE("clipping bounds the influence of one outlier") {
  TrainingSet data = grid_data(1000, 1, 7);
  for (double& y : data.target) y = 0.0;
  data.target[17] = 1000.0;
  FitOptions opt;
  opt.clip = 1.0;
  FitResult res = dpcate::dpgam::fit(data, {{0.0, 1.0, 32}}, opt);
  double row[1] = {data.features[0][17]};
  // Each round can move the outlier's bin by at most learning_rate * clip
  // divided by the bin count, so the fit cannot chase the outlier.
  CHECK(res.model.predict(row) < 10.0);
}

TEST_CASE("zero-weight rows leave the fit bit-for-bit unchanged") {
  TrainingSet with = grid_data(500, 1, 8);
  for (std::size_t i = 0; i < with.target.size(); ++i) {
    with.target[i] = 2.0 * with.features[0][i];
  }
  with.weight.assign(500, 1.0);
  // Corrupt some rows and mask them out.
  for (std::size_t i = 0; i < 100; ++i) {
    with.target[i * 5] = -99.0;
    with.weight[i * 5] = 0.0;
  }
  TrainingSet without;
  without.features.resize(1);
  for (std::size_t i = 0; i < 500; ++i) {
    if (with.weight[i] > 0.0) {
      without.features[0].push_back(with.features[0][i]);
      without.target.push_back(with.target[i]);
    }
  }
  FitResult a = dpcate::dpgam::fit(with, {{0.0, 1.0, 16}}, FitOptions{});
  FitResult b = dpcate::dpgam::fit(without, {{0.0, 1.0, 16}}, FitOptions{});
  CHECK(a.model.to_json().dump() == b.model.to_json().dump());
}

TEST_CASE("private fits are reproducible and seed-sensitive") {
  TrainingSet data = grid_data(1000, 2, 9);
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    data.target[i] = data.features[0][i] - data.features[1][i];
  }
  PrivacyBudget budget = PrivacyBudget::from_eps_delta({4.0, 1e-5});
  std::vector<FeatureSpec> specs = {{0.0, 1.0, 16}, {0.0, 1.0, 16}};
  FitOptions opt;
  opt.seed = 42;
  FitResult a = dpcate::dpgam::fit(data, specs, opt, budget);
  FitResult b = dpcate::dpgam::fit(data, specs, opt, budget);
  CHECK(a.model.to_json().dump() == b.model.to_json().dump());
  opt.seed = 43;
  FitResult c = dpcate::dpgam::fit(data, specs, opt, budget);
  CHECK(a.model.to_json().dump() != c.model.to_json().dump());
}

TEST_CASE("private fit reports its releases and noise scales") {
  TrainingSet data = grid_data(500, 3, 10);
  for (std::size_t i = 0; i < data.target.size(); ++i) data.target[i] = 1.0;
  PrivacyBudget budget{{4.0, 1e-5}, 2.0};
  FitOptions opt;
  opt.rounds = 50;
  opt.clip = 15.0;
  std::vector<FeatureSpec> specs(3, FeatureSpec{0.0, 1.0, 8});
  FitResult res = dpcate::dpgam::fit(data, specs, opt, budget);
  CHECK(res.report.private_fit);
  CHECK(res.report.mu == 2.0);
  CHECK(res.report.planned_releases == 3 + 50 * 3);
  CHECK(res.report.noise_releases == res.report.planned_releases);
  // Count histograms: 3 releases of unit clip from the sqrt(0.1) * mu slice.
  double sigma_count = std::sqrt(2.0) * std::sqrt(3.0) / (std::sqrt(0.1) * 2.0);
  // Sum histograms: 150 releases of clip 15 from the sqrt(0.9) * mu slice.
  double sigma_sum = std::sqrt(2.0) * 15.0 * std::sqrt(150.0) / (std::sqrt(0.9) * 2.0);
  CHECK(res.report.sigma_count == doctest::Approx(sigma_count).epsilon(1e-12));
  CHECK(res.report.sigma_sum == doctest::Approx(sigma_sum).epsilon(1e-12));
}

TEST_CASE("a huge budget reduces the private fit to the exact one") {
  TrainingSet data = grid_data(2000, 1, 11);
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    data.target[i] = 1.0 + 2.0 * data.features[0][i];
  }
  PrivacyBudget nearly_free{{100.0, 1e-5}, 1e7};
  FitResult priv = dpcate::dpgam::fit(data, {{0.0, 1.0, 16}}, FitOptions{}, nearly_free);
  FitResult exact = dpcate::dpgam::fit(data, {{0.0, 1.0, 16}}, FitOptions{});
  // The private path starts the intercept at zero, so after R rounds a level
  // residual of (1 - learning_rate)^R times the target mean (about 0.01 here)
  // remains. The two fits must agree up to that constant and nothing else.
  double min_diff = 1e300, max_diff = -1e300;
  for (double x = 0.01; x < 1.0; x += 0.04) {
    double row[1] = {x};
    double diff = exact.model.predict(row) - priv.model.predict(row);
    min_diff = std::min(min_diff, diff);
    max_diff = std::max(max_diff, diff);
  }
  CHECK(std::fabs(max_diff) < 0.02);
  CHECK(max_diff - min_diff < 1e-6);
}

TEST_CASE("noise shrinks as the sample grows") {
  // With a fixed budget the noise scale is constant while signal sums grow
  // linearly in n, so bigger samples must track the target better.
  PrivacyBudget budget = PrivacyBudget::from_eps_delta({4.0, 1e-5});
  auto fit_mse = [&](int n) {
    TrainingSet data = grid_data(n, 1, 12);
    for (std::size_t i = 0; i < data.target.size(); ++i) {
      data.target[i] = 4.0 * (data.features[0][i] - 0.5);
    }
    FitOptions opt;
    opt.seed = 7;
    FitResult res = dpcate::dpgam::fit(data, {{0.0, 1.0, 16}}, opt, budget);
    double mse = 0.0;
    for (std::size_t i = 0; i < data.target.size(); ++i) {
      double row[1] = {data.features[0][i]};
      double e = res.model.predict(row) - data.target[i];
      mse += e * e;
    }
    return mse / static_cast<double>(n);
  };
  CHECK(fit_mse(20000) < fit_mse(500));
}

TEST_CASE("private weights above one are rejected") {
  TrainingSet data = grid_data(100, 1, 13);
  for (double& y : data.target) y = 1.0;
  data.weight.assign(100, 1.5);
  PrivacyBudget budget{{4.0, 1e-5}, 2.0};
  CHECK_THROWS_AS(dpcate::dpgam::fit(data, {{0.0, 1.0, 8}}, FitOptions{}, budget),
                  std::invalid_argument);
  // The same weights are fine without a budget.
  CHECK_NOTHROW(dpcate::dpgam::fit(data, {{0.0, 1.0, 8}}, FitOptions{}));
}

TEST_CASE("malformed training inputs are rejected") {
  TrainingSet empty;
  empty.features.resize(1);
  CHECK_THROWS_AS(dpcate::dpgam::fit(empty, {{0.0, 1.0, 8}}, FitOptions{}),
                  std::invalid_argument);

  TrainingSet data = grid_data(50, 2, 14);
  for (double& y : data.target) y = 1.0;
  CHECK_THROWS_AS(dpcate::dpgam::fit(data, {{0.0, 1.0, 8}}, FitOptions{}),
                  std::invalid_argument);  // spec count mismatch

  TrainingSet ragged = grid_data(50, 2, 15);
  for (double& y : ragged.target) y = 1.0;
  ragged.features[1].pop_back();
  CHECK_THROWS_AS(dpcate::dpgam::fit(ragged, {{0.0, 1.0, 8}, {0.0, 1.0, 8}}, FitOptions{}),
                  std::invalid_argument);

  TrainingSet bad = grid_data(50, 1, 16);
  for (double& y : bad.target) y = 1.0;
  bad.target[3] = std::nan("");
  CHECK_THROWS_AS(dpcate::dpgam::fit(bad, {{0.0, 1.0, 8}}, FitOptions{}),
                  std::invalid_argument);

  TrainingSet zero_w = grid_data(50, 1, 17);
  for (double& y : zero_w.target) y = 1.0;
  zero_w.weight.assign(50, 0.0);
  CHECK_THROWS_AS(dpcate::dpgam::fit(zero_w, {{0.0, 1.0, 8}}, FitOptions{}),
                  std::invalid_argument);

  TrainingSet ok = grid_data(50, 1, 18);
  for (double& y : ok.target) y = 1.0;
  FitOptions bad_opt;
  bad_opt.rounds = 0;
  CHECK_THROWS_AS(dpcate::dpgam::fit(ok, {{0.0, 1.0, 8}}, bad_opt), std::invalid_argument);
  bad_opt = FitOptions{};
  bad_opt.learning_rate = 0.0;
  CHECK_THROWS_AS(dpcate::dpgam::fit(ok, {{0.0, 1.0, 8}}, bad_opt), std::invalid_argument);
  bad_opt = FitOptions{};
  bad_opt.clip = -1.0;
  CHECK_THROWS_AS(dpcate::dpgam::fit(ok, {{0.0, 1.0, 8}}, bad_opt), std::invalid_argument);
  CHECK_THROWS_AS(dpcate::dpgam::fit(ok, {{1.0, 0.0, 8}}, FitOptions{}), std::invalid_argument);
  CHECK_THROWS_AS(dpcate::dpgam::fit(ok, {{0.0, 1.0, 0}}, FitOptions{}), std::invalid_argument);
}

TEST_CASE("model JSON round-trips byte for byte") {
  TrainingSet data = grid_data(300, 2, 19);
  for (std::size_t i = 0; i < data.target.size(); ++i) {
    data.target[i] = data.features[0][i] * 0.77 - data.features[1][i];
  }
  FitResult res =
      dpcate::dpgam::fit(data, {{0.0, 1.0, 8}, {-1.0, 2.0, 5}}, FitOptions{});
  std::string first = res.model.to_json().dump();
  AdditiveModel restored = AdditiveModel::from_json(nlohmann::json::parse(first));
  CHECK(restored.to_json().dump() == first);
  double row[2] = {0.4, 1.1};
  CHECK(restored.predict(row) == res.model.predict(row));
}

TEST_CASE("malformed model JSON is rejected") {
  CHECK_THROWS_AS(AdditiveModel::from_json(nlohmann::json::parse("{}")),
                  std::invalid_argument);
  CHECK_THROWS_AS(AdditiveModel::from_json(nlohmann::json::parse(
                      R"({"link":"probit","intercept":0,"features":[]})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(AdditiveModel::from_json(nlohmann::json::parse(
                      R"({"link":"identity","intercept":0,
                          "features":[{"lo":0,"hi":1,"num_bins":3,"values":[1,2]}]})")),
                  std::invalid_argument);
}

TEST_CASE("prediction validates its inputs") {
  AdditiveModel m(1.0, {{{0.0, 1.0, 2}, {0.5, -0.5}}}, Link::kIdentity);
  double row[1] = {0.1};
  CHECK(m.predict(row) == doctest::Approx(1.5).epsilon(1e-15));
  double wide[2] = {0.1, 0.2};
  CHECK_THROWS_AS(m.score(std::span<const double>(wide, 2)), std::invalid_argument);
  CHECK_THROWS_AS(m.contribution(5, 0.1), std::invalid_argument);
}

}  // namespace
