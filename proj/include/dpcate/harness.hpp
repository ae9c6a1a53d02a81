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

#ifndef DPCATE_HARNESS_H_
#define DPCATE_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpcate/metalearn.hpp"
#include "dpcate/synthdata.hpp"

// Experiment runner: grids over setup x learner x n x epsilon, each cell
// fitting twice on independent draws and decomposing test error into
// integrated squared bias and integrated variance.
//
// Every cell's randomness is derived from the root seed and the cell's own
// coordinates, so results are identical no matter how cells are scheduled
// across workers.

namespace dpcate::harness {

struct ExperimentConfig {
  std::vector<synthdata::Setup> setups;
  std::vector<metalearn::Learner> learners;
  std::vector<std::size_t> sample_sizes;
  // Privacy levels; +infinity runs the exact, non-private fit.
  std::vector<double> epsilons;
  double delta = 1e-5;
  std::size_t reps = 5;
  // One fixed test draw of this size is shared by all cells of a setup.
  std::size_t test_size = 50000;
  std::uint64_t seed = 0;
  // Learner hyperparameters, shared by every cell.
  metalearn::CateOptions options;
};

// Desk-scale grid: setups {A,B,C}, all learners, n in {500, 2000, 8000},
// epsilon in {1, 4, 16}, 5 reps.
ExperimentConfig desk_config();

// Full-scale grid: all setups, all learners, n up to 16000, epsilon from 0.5
// to 16 plus the non-private limit, 25 reps.
ExperimentConfig full_config();

// Parses "key = value" lines (# comments, blank lines ignored). Keys mirror
// ExperimentConfig: setups, learners, sample_sizes, epsilons, delta, reps,
// test_size, seed, ratios, and the learner options num_bins, rounds,
// learning_rate, clip, trim_lo, trim_hi, second_stage_bins,
// second_stage_rounds. Unknown keys and malformed values throw. Omitted keys
// keep the desk-scale defaults.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& config);

// One grid cell: a single repetition at fixed coordinates.
struct CellSpec {
  synthdata::Setup setup = synthdata::Setup::kA;
  metalearn::Learner learner = metalearn::Learner::kDr;
  std::size_t n = 0;
  double epsilon = 0.0;  // +infinity for non-private
  std::size_t rep = 0;
};

struct MetricsRecord {
  CellSpec cell;
  double delta = 0.0;
  double mse = 0.0;       // average of the two predictors' test MSEs
  double bias = 0.0;      // integrated squared bias estimate
  double variance = 0.0;  // integrated variance estimate
  // "ok", or "neg_bias" / "neg_var" when an unbiased estimate fell below
  // zero, or "fit_error" when the cell failed (metrics are NaN then).
  std::string flag = "ok";
  std::uint64_t seed = 0;  // first training draw's seed
  std::string error;       // failure message for fit_error rows
};

// Two-model decomposition. With test MSEs of two independently trained
// predictors and of their pointwise average, the identities
//   E mse_avg = integrated squared bias + integrated variance / 2
//   E mse     = integrated squared bias + integrated variance
// invert to bias = 2 mse_avg - mse and variance = mse - bias, with
// mse = (mse1 + mse2) / 2. Either estimate can come out negative; callers
// flag such rows rather than clamping them.
struct Decomposition {
  double mse = 0.0;
  double bias = 0.0;
  double variance = 0.0;
};
Decomposition mse_bias_var(double mse1, double mse2, double mse_avg);

// Runs one cell: two fresh training draws, two fits, decomposition against
// the supplied test draw. Fit failures are captured in the returned record,
// never thrown.
MetricsRecord run_cell(const ExperimentConfig& config, const CellSpec& cell,
                       const synthdata::Draw& test);

// Same, with explicit training-draw seeds. Forcing seed1 == seed2 trains the
// same model twice and must yield a variance estimate of exactly zero.
MetricsRecord run_cell_with_seeds(const ExperimentConfig& config, const CellSpec& cell,
                                  const synthdata::Draw& test, std::uint64_t seed1,
                                  std::uint64_t seed2);

// Per-(setup, learner, n, epsilon) averages over the repetitions that fit
// successfully.
struct SummaryRecord {
  synthdata::Setup setup = synthdata::Setup::kA;
  metalearn::Learner learner = metalearn::Learner::kDr;
  std::size_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t reps = 0;  // successful repetitions averaged
  double mse_mean = 0.0;
  double bias_mean = 0.0;
  double variance_mean = 0.0;
};

struct ExperimentResult {
  // Cell rows in canonical order: setup, learner, n, epsilon, rep.
  std::vector<MetricsRecord> records;
  std::vector<SummaryRecord> summaries;
  // One line per failed cell: coordinates plus the fit error.
  std::vector<std::string> failures;
};

// Executes every cell of the grid on `workers` threads (0 picks a default,
// overridden by the DPCATE_WORKERS environment variable). Output is
// canonically ordered and bit-identical for any worker count.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers = 0);

// CSV emission. results: one row per cell,
//   setup,learner,n,epsilon,delta,rep,mse,bias,variance,flag,seed
// summary: one row per averaged coordinate,
//   setup,learner,n,epsilon,delta,reps,mse_mean,bias_mean,variance_mean
// plot: long format, one (coordinate, metric, value) row per summary metric,
//   setup,learner,n,epsilon,metric,value
void write_results_csv(const std::vector<MetricsRecord>& records, std::ostream& out);
void write_summary_csv(const std::vector<SummaryRecord>& summaries, std::ostream& out);
void write_plot_csv(const std::vector<SummaryRecord>& summaries, std::ostream& out);

// Writes results.csv, summary.csv, plot.csv, and failures.txt under dir
// (created if missing).
void write_outputs(const ExperimentResult& result, const std::string& dir);

}  // namespace dpcate::harness

#endif  // DPCATE_HARNESS_H_
