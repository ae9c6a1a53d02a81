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

#include "dpcate/harness.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dpcate/random.hpp"
#include "dpcate/tradeoff.hpp"

namespace dpcate::harness {
namespace {

// Substream tags so that test draws, training draws, and fit seeds never
// collide for any combination of cell coordinates.
constexpr std::uint64_t kTagTestDraw = 1;
constexpr std::uint64_t kTagTrainingDraw = 2;
constexpr std::uint64_t kTagFit = 3;

std::uint64_t cell_stream(std::uint64_t root, std::uint64_t tag, const CellSpec& cell,
                          std::uint64_t which) {
  return rng::derive_seed(root, {tag, static_cast<std::uint64_t>(cell.setup),
                                 static_cast<std::uint64_t>(cell.learner),
                                 static_cast<std::uint64_t>(cell.n),
                                 std::bit_cast<std::uint64_t>(cell.epsilon),
                                 static_cast<std::uint64_t>(cell.rep), which});
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

double mean_squared_error(const std::vector<double>& pred, const std::vector<double>& truth) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - truth[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

std::vector<double> predict_all(const metalearn::CateModel& model,
                                const data::ObservationSet& obs) {
  const std::size_t n = obs.num_rows();
  const std::size_t d = obs.num_features();
  std::vector<double> out(n);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) row[j] = obs.x[j][i];
    out[i] = model.predict(row);
  }
  return out;
}

std::string cell_label(const CellSpec& cell) {
  std::string s;
  s += "setup=";
  s += synthdata::to_string(cell.setup);
  s += " learner=";
  s += metalearn::to_string(cell.learner);
  s += " n=" + std::to_string(cell.n);
  s += " epsilon=" + format_double(cell.epsilon);
  s += " rep=" + std::to_string(cell.rep);
  return s;
}

// Tokenizes a comma-separated list, trimming whitespace around items.
std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::stringstream stream(value);
  while (std::getline(stream, item, ',')) {
    std::size_t first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    std::size_t last = item.find_last_not_of(" \t");
    items.push_back(item.substr(first, last - first + 1));
  }
  return items;
}

double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' has non-numeric value '" + text + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' needs a non-negative integer, got '" +
                                text + "'");
  }
}

int parse_int(const std::string& key, const std::string& text) {
  std::uint64_t v = parse_u64(key, text);
  if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw std::invalid_argument("config: key '" + key + "' is too large");
  }
  return static_cast<int>(v);
}

unsigned resolve_workers(unsigned requested, std::size_t num_cells) {
  unsigned workers = requested;
  if (workers == 0) {
    if (const char* env = std::getenv("DPCATE_WORKERS")) {
      try {
        workers = static_cast<unsigned>(parse_u64("DPCATE_WORKERS", env));
      } catch (const std::exception&) {
        throw std::invalid_argument("DPCATE_WORKERS must be a positive integer");
      }
      if (workers == 0) throw std::invalid_argument("DPCATE_WORKERS must be a positive integer");
    } else {
      workers = std::max(1u, std::thread::hardware_concurrency());
    }
  }
  if (num_cells > 0 && workers > num_cells) workers = static_cast<unsigned>(num_cells);
  return workers;
}

}  // namespace

ExperimentConfig desk_config() {
  ExperimentConfig config;
  config.setups = {synthdata::Setup::kA, synthdata::Setup::kB, synthdata::Setup::kC};
  config.learners = {metalearn::Learner::kDr, metalearn::Learner::kR, metalearn::Learner::kS};
  config.sample_sizes = {500, 2000, 8000};
  config.epsilons = {1.0, 4.0, 16.0};
  config.reps = 5;
  return config;
}

ExperimentConfig full_config() {
  ExperimentConfig config;
  config.setups = {synthdata::Setup::kA, synthdata::Setup::kB, synthdata::Setup::kC,
                   synthdata::Setup::kD, synthdata::Setup::kE};
  config.learners = {metalearn::Learner::kDr, metalearn::Learner::kR, metalearn::Learner::kS};
  config.sample_sizes = {500, 2000, 8000, 16000};
  config.epsilons = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, std::numeric_limits<double>::infinity()};
  config.reps = 25;
  return config;
}

void validate(const ExperimentConfig& config) {
  if (!(config.delta > 0.0) || !(config.delta < 1.0)) {
    throw std::invalid_argument("config: delta must lie in (0, 1)");
  }
  for (double eps : config.epsilons) {
    if (!(eps > 0.0)) throw std::invalid_argument("config: epsilons must be positive");
  }
  for (std::size_t n : config.sample_sizes) {
    if (n == 0) throw std::invalid_argument("config: sample_sizes must be positive");
  }
  if (config.reps == 0) throw std::invalid_argument("config: reps must be positive");
  if (config.test_size == 0) throw std::invalid_argument("config: test_size must be positive");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config = desk_config();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    std::size_t key_end = line.find_last_not_of(" \t", eq - 1);
    if (key_end == std::string::npos || key_end < first) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": missing key");
    }
    std::string key = line.substr(first, key_end - first + 1);
    std::size_t val_first = line.find_first_not_of(" \t", eq + 1);
    std::string value =
        val_first == std::string::npos ? std::string() : line.substr(val_first);
    if (std::size_t val_last = value.find_last_not_of(" \t"); val_last != std::string::npos) {
      value.resize(val_last + 1);
    }

    if (key == "setups") {
      config.setups.clear();
      for (const std::string& item : split_list(value)) {
        config.setups.push_back(synthdata::setup_from_string(item));
      }
    } else if (key == "learners") {
      config.learners.clear();
      for (const std::string& item : split_list(value)) {
        config.learners.push_back(metalearn::learner_from_string(item));
      }
    } else if (key == "sample_sizes") {
      config.sample_sizes.clear();
      for (const std::string& item : split_list(value)) {
        config.sample_sizes.push_back(parse_u64(key, item));
      }
    } else if (key == "epsilons") {
      config.epsilons.clear();
      for (const std::string& item : split_list(value)) {
        config.epsilons.push_back(parse_double(key, item));
      }
    } else if (key == "ratios") {
      config.options.ratios.clear();
      for (const std::string& item : split_list(value)) {
        config.options.ratios.push_back(parse_double(key, item));
      }
    } else if (key == "delta") {
      config.delta = parse_double(key, value);
    } else if (key == "reps") {
      config.reps = parse_u64(key, value);
    } else if (key == "test_size") {
      config.test_size = parse_u64(key, value);
    } else if (key == "seed") {
      config.seed = parse_u64(key, value);
    } else if (key == "num_bins") {
      config.options.num_bins = parse_int(key, value);
    } else if (key == "rounds") {
      config.options.rounds = parse_int(key, value);
    } else if (key == "second_stage_bins") {
      config.options.second_stage_bins = parse_int(key, value);
    } else if (key == "second_stage_rounds") {
      config.options.second_stage_rounds = parse_int(key, value);
    } else if (key == "learning_rate") {
      config.options.learning_rate = parse_double(key, value);
    } else if (key == "clip") {
      config.options.clip = parse_double(key, value);
    } else if (key == "trim_lo") {
      config.options.trim_lo = parse_double(key, value);
    } else if (key == "trim_hi") {
      config.options.trim_hi = parse_double(key, value);
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
    }
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  return parse_config(in);
}

Decomposition mse_bias_var(double mse1, double mse2, double mse_avg) {
  Decomposition d;
  d.mse = 0.5 * (mse1 + mse2);
  d.bias = 2.0 * mse_avg - d.mse;
  d.variance = d.mse - d.bias;
  return d;
}

MetricsRecord run_cell_with_seeds(const ExperimentConfig& config, const CellSpec& cell,
                                  const synthdata::Draw& test, std::uint64_t seed1,
                                  std::uint64_t seed2) {
  MetricsRecord record;
  record.cell = cell;
  record.delta = config.delta;
  record.seed = seed1;
  try {
    std::optional<tradeoff::EpsDelta> budget;
    if (!std::isinf(cell.epsilon)) budget = tradeoff::EpsDelta{cell.epsilon, config.delta};
    std::vector<dpgam::FeatureSpec> specs =
        synthdata::feature_specs(cell.setup, config.options.num_bins);

    std::vector<std::vector<double>> preds;
    const std::uint64_t draw_seeds[2] = {seed1, seed2};
    for (int k = 0; k < 2; ++k) {
      synthdata::Draw draw = synthdata::generate(cell.setup, cell.n, draw_seeds[k]);
      metalearn::CateOptions options = config.options;
      // The fit stream hangs off the draw seed so that forcing equal draw
      // seeds reproduces the entire fit, DP noise included.
      options.seed = rng::derive_seed(draw_seeds[k], {kTagFit});
      metalearn::CateModel model =
          metalearn::fit_cate(draw.obs, cell.learner, budget, specs, options);
      preds.push_back(predict_all(model, test.obs));
    }

    std::vector<double> avg(preds[0].size());
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = 0.5 * (preds[0][i] + preds[1][i]);
    Decomposition d = mse_bias_var(mean_squared_error(preds[0], test.tau_true),
                                   mean_squared_error(preds[1], test.tau_true),
                                   mean_squared_error(avg, test.tau_true));
    record.mse = d.mse;
    record.bias = d.bias;
    record.variance = d.variance;
    if (d.bias < 0.0) {
      record.flag = "neg_bias";
    } else if (d.variance < 0.0) {
      record.flag = "neg_var";
    }
  } catch (const std::exception& e) {
    record.mse = std::numeric_limits<double>::quiet_NaN();
    record.bias = std::numeric_limits<double>::quiet_NaN();
    record.variance = std::numeric_limits<double>::quiet_NaN();
    record.flag = "fit_error";
    record.error = e.what();
  }
  return record;
}

MetricsRecord run_cell(const ExperimentConfig& config, const CellSpec& cell,
                       const synthdata::Draw& test) {
  return run_cell_with_seeds(config, cell, test,
                             cell_stream(config.seed, kTagTrainingDraw, cell, 0),
                             cell_stream(config.seed, kTagTrainingDraw, cell, 1));
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers) {
  validate(config);

  std::vector<CellSpec> cells;
  for (synthdata::Setup setup : config.setups) {
    for (metalearn::Learner learner : config.learners) {
      for (std::size_t n : config.sample_sizes) {
        for (double epsilon : config.epsilons) {
          for (std::size_t rep = 0; rep < config.reps; ++rep) {
            cells.push_back({setup, learner, n, epsilon, rep});
          }
        }
      }
    }
  }

  // One fixed test draw per setup, independent of every training stream.
  std::map<synthdata::Setup, synthdata::Draw> tests;
  if (!cells.empty()) {
    for (synthdata::Setup setup : config.setups) {
      if (tests.count(setup)) continue;
      std::uint64_t seed =
          rng::derive_seed(config.seed, {kTagTestDraw, static_cast<std::uint64_t>(setup)});
      tests.emplace(setup, synthdata::generate(setup, config.test_size, seed));
    }
  }

  ExperimentResult result;
  result.records.resize(cells.size());

  // Each worker claims cells off a shared counter and writes into its own
  // slot; the output order is the canonical cell order by construction.
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      result.records[i] = run_cell(config, cells[i], tests.at(cells[i].setup));
    }
  };
  unsigned num_workers = resolve_workers(workers, cells.size());
  if (num_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(num_workers);
    for (unsigned w = 0; w < num_workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  // Records are grouped by coordinate already; each group is `reps` long.
  for (std::size_t start = 0; start < result.records.size(); start += config.reps) {
    SummaryRecord summary;
    const CellSpec& cell = result.records[start].cell;
    summary.setup = cell.setup;
    summary.learner = cell.learner;
    summary.n = cell.n;
    summary.epsilon = cell.epsilon;
    summary.delta = config.delta;
    double mse = 0.0, bias = 0.0, variance = 0.0;
    for (std::size_t r = 0; r < config.reps; ++r) {
      const MetricsRecord& record = result.records[start + r];
      if (record.flag == "fit_error") {
        result.failures.push_back(cell_label(record.cell) + ": " + record.error);
        continue;
      }
      ++summary.reps;
      mse += record.mse;
      bias += record.bias;
      variance += record.variance;
    }
    double count = static_cast<double>(summary.reps);
    summary.mse_mean = summary.reps ? mse / count : std::numeric_limits<double>::quiet_NaN();
    summary.bias_mean = summary.reps ? bias / count : std::numeric_limits<double>::quiet_NaN();
    summary.variance_mean =
        summary.reps ? variance / count : std::numeric_limits<double>::quiet_NaN();
    result.summaries.push_back(summary);
  }
  return result;
}

void write_results_csv(const std::vector<MetricsRecord>& records, std::ostream& out) {
  out << "setup,learner,n,epsilon,delta,rep,mse,bias,variance,flag,seed\n";
  for (const MetricsRecord& r : records) {
    out << synthdata::to_string(r.cell.setup) << ',' << metalearn::to_string(r.cell.learner)
        << ',' << r.cell.n << ',' << format_double(r.cell.epsilon) << ','
        << format_double(r.delta) << ',' << r.cell.rep << ',' << format_double(r.mse) << ','
        << format_double(r.bias) << ',' << format_double(r.variance) << ',' << r.flag << ','
        << r.seed << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRecord>& summaries, std::ostream& out) {
  out << "setup,learner,n,epsilon,delta,reps,mse_mean,bias_mean,variance_mean\n";
  for (const SummaryRecord& s : summaries) {
    out << synthdata::to_string(s.setup) << ',' << metalearn::to_string(s.learner) << ',' << s.n
        << ',' << format_double(s.epsilon) << ',' << format_double(s.delta) << ',' << s.reps
        << ',' << format_double(s.mse_mean) << ',' << format_double(s.bias_mean) << ','
        << format_double(s.variance_mean) << '\n';
  }
}

void write_plot_csv(const std::vector<SummaryRecord>& summaries, std::ostream& out) {
  out << "setup,learner,n,epsilon,metric,value\n";
  for (const SummaryRecord& s : summaries) {
    const std::pair<const char*, double> metrics[] = {
        {"mse_mean", s.mse_mean}, {"bias_mean", s.bias_mean}, {"variance_mean", s.variance_mean}};
    for (const auto& [name, value] : metrics) {
      out << synthdata::to_string(s.setup) << ',' << metalearn::to_string(s.learner) << ','
          << s.n << ',' << format_double(s.epsilon) << ',' << name << ',' << format_double(value)
          << '\n';
    }
  }
}

void write_outputs(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&dir](const char* name) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error(std::string("cannot write ") + name + " under " + dir);
    return out;
  };
  {
    std::ofstream out = open("results.csv");
    write_results_csv(result.records, out);
  }
  {
    std::ofstream out = open("summary.csv");
    write_summary_csv(result.summaries, out);
  }
  {
    std::ofstream out = open("plot.csv");
    write_plot_csv(result.summaries, out);
  }
  std::ofstream out = open("failures.txt");
  for (const std::string& line : result.failures) out << line << '\n';
}

}  // namespace dpcate::harness
