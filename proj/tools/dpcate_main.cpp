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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpcate/accountant.hpp"
#include "dpcate/dataset.hpp"
#include "dpcate/dpgam.hpp"
#include "dpcate/harness.hpp"
#include "dpcate/metalearn.hpp"
#include "dpcate/synthdata.hpp"
#include "dpcate/tradeoff.hpp"
#include "json.hpp"

namespace {

namespace da = dpcate::accountant;
namespace dd = dpcate::data;
namespace dg = dpcate::dpgam;
namespace dh = dpcate::harness;
namespace dm = dpcate::metalearn;
namespace ds = dpcate::synthdata;
namespace dt = dpcate::tradeoff;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(std::string(what) + ": expected comma-separated numbers, got '" +
                                 text + "'");
    }
  }
  if (values.empty()) {
    throw CLI::ValidationError(std::string(what) + ": empty list");
  }
  return values;
}

void print_curve_csv(const dt::TradeoffCurve& curve, std::ostream& out) {
  out << "alpha,beta\n";
  for (const auto& p : curve.points()) {
    out << format_double(p.x) << ',' << format_double(p.y) << '\n';
  }
}

nlohmann::json curve_breakpoints(const dt::TradeoffCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points()) points.push_back({p.x, p.y});
  return points;
}

// ---------------------------------------------------------------------------
// tradeoff subcommand

struct TradeoffArgs {
  std::vector<std::string> eps_delta_specs;
  std::vector<double> mus;
  std::vector<double> deltas{1e-5};
  bool to_gdp = false;
};

dt::EpsDelta parse_eps_delta(const std::string& spec) {
  std::vector<double> pair = parse_number_list(spec, "--eps-delta");
  if (pair.size() != 2) {
    throw CLI::ValidationError("--eps-delta: expected 'epsilon,delta', got '" + spec + "'");
  }
  return dt::EpsDelta{pair[0], pair[1]};
}

int run_tradeoff(const TradeoffArgs& args) {
  std::vector<dt::EpsDelta> eds;
  for (const std::string& spec : args.eps_delta_specs) eds.push_back(parse_eps_delta(spec));

  if (args.to_gdp) {
    if (eds.empty()) {
      throw CLI::ValidationError("--to-gdp needs at least one --eps-delta spec");
    }
    std::cout << "epsilon,delta,mu\n";
    for (const dt::EpsDelta& ed : eds) {
      std::cout << format_double(ed.epsilon) << ',' << format_double(ed.delta) << ','
                << format_double(da::mu_from_eps_delta(ed)) << '\n';
    }
    return 0;
  }

  std::vector<dt::TradeoffCurve> curves;
  for (const dt::EpsDelta& ed : eds) curves.push_back(dt::make_eps_delta(ed));
  for (double mu : args.mus) curves.push_back(dt::make_gaussian(mu));
  if (curves.empty()) {
    throw CLI::ValidationError("provide at least one --eps-delta or --mu spec");
  }

  dt::TradeoffCurve composed = dt::compose_parallel(curves);
  print_curve_csv(composed, std::cout);

  std::cout << "\nepsilon,delta\n";
  for (double delta : args.deltas) {
    // A curve whose modules each tolerate delta_i > delta certifies nothing
    // at this delta for any finite epsilon; report that as inf.
    std::string eps;
    try {
      eps = format_double(dt::epsilon_for_delta(composed, delta));
    } catch (const std::exception&) {
      eps = "inf";
    }
    std::cout << eps << ',' << format_double(delta) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// fit subcommand

struct FitArgs {
  std::string data_path;
  std::string test_path;
  std::string out_dir = ".";
  std::string learner = "dr";
  double epsilon = 0.0;
  double delta = 0.0;
  bool has_budget = false;
  std::string bounds_spec;
  std::string ratios_spec;
  dm::CateOptions options;
};

std::vector<dg::FeatureSpec> build_specs(const dd::ObservationSet& obs, const FitArgs& args) {
  const std::size_t d = obs.num_features();
  if (!args.bounds_spec.empty()) {
    std::vector<double> pair = parse_number_list(args.bounds_spec, "--bounds");
    if (pair.size() != 2 || !(pair[0] < pair[1])) {
      throw CLI::ValidationError("--bounds: expected 'lo,hi' with lo < hi");
    }
    return std::vector<dg::FeatureSpec>(d, dg::FeatureSpec{pair[0], pair[1], args.options.num_bins});
  }
  if (args.has_budget) {
    throw CLI::ValidationError(
        "--bounds is required for a private fit: binning edges must be public knowledge, not "
        "derived from the data");
  }
  // Non-private convenience: observed per-feature ranges.
  std::vector<dg::FeatureSpec> specs;
  specs.reserve(d);
  for (const std::vector<double>& col : obs.x) {
    double lo = col[0], hi = col[0];
    for (double v : col) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) hi = lo + 1.0;
    specs.push_back({lo, hi, args.options.num_bins});
  }
  return specs;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

int run_fit(FitArgs& args) {
  if (!args.ratios_spec.empty()) {
    args.options.ratios = parse_number_list(args.ratios_spec, "--ratios");
  }
  dd::LabeledTable table = dd::read_csv(args.data_path);
  dd::ObservationSet obs = dd::to_observations(table);

  std::optional<dt::EpsDelta> budget;
  if (args.has_budget) budget = dt::EpsDelta{args.epsilon, args.delta};
  std::vector<dg::FeatureSpec> specs = build_specs(obs, args);

  dm::Learner learner = dm::learner_from_string(args.learner);
  dm::CateModel model = dm::fit_cate(obs, learner, budget, specs, args.options);

  std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);

  // One shape document per fitted module, in the engine's own JSON format.
  std::vector<std::string> written;
  const std::pair<const char*, const std::optional<dg::AdditiveModel>*> modules[] = {
      {"propensity", &model.propensity},
      {"response", &model.response},
      {"outcome", &model.outcome},
      {"second_stage", &model.second_stage},
  };
  for (const auto& [name, fitted] : modules) {
    if (!fitted->has_value()) continue;
    std::string file = std::string("shape_") + name + ".json";
    write_text_file(dir / file, (*fitted)->to_json().dump(2) + "\n");
    written.push_back(file);
  }

  nlohmann::json report;
  report["learner"] = dm::to_string(learner);
  report["rows"] = obs.num_rows();
  report["features"] = obs.num_features();
  report["modules"] = model.audits.size();
  report["private"] = args.has_budget;
  report["options"] = {{"num_bins", args.options.num_bins},
                       {"rounds", args.options.rounds},
                       {"learning_rate", args.options.learning_rate},
                       {"clip", args.options.clip},
                       {"second_stage_bins", args.options.second_stage_bins},
                       {"second_stage_rounds", args.options.second_stage_rounds},
                       {"trim_lo", args.options.trim_lo},
                       {"trim_hi", args.options.trim_hi},
                       {"ratios", args.options.ratios},
                       {"seed", args.options.seed}};
  nlohmann::json bounds = nlohmann::json::array();
  for (const dg::FeatureSpec& spec : specs) bounds.push_back({spec.lo, spec.hi});
  report["bounds"] = std::move(bounds);
  report["composed_curve"] = curve_breakpoints(model.composed_privacy);
  if (args.has_budget) {
    report["budget"] = {{"epsilon", args.epsilon},
                        {"delta", args.delta},
                        {"gdp_mu", da::mu_from_eps_delta(args.epsilon, args.delta)}};
    report["certified"] = {
        {"delta", args.delta},
        {"epsilon", dt::epsilon_for_delta(model.composed_privacy, args.delta)}};
  }
  if (learner == dm::Learner::kS) report["tau_constant"] = model.tau_constant;
  write_text_file(dir / "privacy_report.json", report.dump(2) + "\n");
  written.push_back("privacy_report.json");

  if (!args.test_path.empty()) {
    dd::LabeledTable test = dd::read_csv(args.test_path);
    const std::size_t d = obs.num_features();
    std::vector<const std::vector<double>*> cols(d);
    for (std::size_t j = 0; j < d; ++j) {
      int idx = test.column_index("x" + std::to_string(j + 1));
      if (idx < 0) {
        throw std::invalid_argument("test file lacks column x" + std::to_string(j + 1));
      }
      cols[j] = &test.columns[idx];
    }
    dd::LabeledTable predictions;
    predictions.names = {"tau_hat"};
    predictions.columns.resize(1);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < test.num_rows(); ++i) {
      for (std::size_t j = 0; j < d; ++j) row[j] = (*cols[j])[i];
      predictions.columns[0].push_back(model.predict(row));
    }
    dd::write_csv((dir / "predictions.csv").string(), predictions);
    written.push_back("predictions.csv");
  }

  std::cout << "fitted " << dm::to_string(learner) << " on " << obs.num_rows() << " rows, "
            << obs.num_features() << " features (modules: " << model.audits.size() << ")\n";
  if (learner == dm::Learner::kS) {
    std::cout << "constant effect estimate: " << format_double(model.tau_constant) << '\n';
  }
  if (args.has_budget) {
    std::cout << "certified epsilon at delta=" << format_double(args.delta) << ": "
              << format_double(dt::epsilon_for_delta(model.composed_privacy, args.delta))
              << '\n';
  } else {
    std::cout << "non-private fit: no privacy guarantee certified\n";
  }
  std::cout << "wrote";
  for (const std::string& file : written) std::cout << ' ' << file;
  std::cout << " under " << dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// simulate subcommand

struct SimulateArgs {
  std::string setup = "A";
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_simulate(const SimulateArgs& args) {
  ds::Setup setup = ds::setup_from_string(args.setup);
  ds::Draw draw = ds::generate(setup, args.n, args.seed);
  dd::LabeledTable table = dd::from_observations(draw.obs, &draw.tau_true);
  dd::write_csv(args.out_path, table);
  std::cout << "wrote " << args.n << " rows of setup " << ds::to_string(setup) << " to "
            << args.out_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// experiment subcommand

struct ExperimentArgs {
  std::string config_path;
  std::string out_dir = "experiment_out";
  bool full_grid = false;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  dh::ExperimentConfig config;
  if (args.full_grid) {
    config = dh::full_config();
  } else if (!args.config_path.empty()) {
    config = dh::load_config(args.config_path);
  } else {
    config = dh::desk_config();
  }

  dh::ExperimentResult result = dh::run_experiment(config);
  dh::write_outputs(result, args.out_dir);

  if (result.records.empty()) {
    std::cerr << "warning: the grid is empty (no setups, learners, sizes, or epsilons); "
                 "wrote header-only outputs\n";
  }
  std::cout << "ran " << result.records.size() << " cells (" << result.failures.size()
            << " failed); outputs under " << args.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dpcate: differentially private estimation of conditional average treatment effects"};
  app.require_subcommand(1);

  TradeoffArgs tradeoff_args;
  CLI::App* tradeoff_cmd = app.add_subcommand(
      "tradeoff", "Compose trade-off curves of modules run on disjoint data");
  tradeoff_cmd->add_option("--eps-delta", tradeoff_args.eps_delta_specs,
                           "(epsilon,delta)-DP module spec, e.g. 1.0,1e-5 (repeatable)");
  tradeoff_cmd->add_option("--mu", tradeoff_args.mus,
                           "Gaussian-DP module spec: the mu parameter (repeatable)");
  tradeoff_cmd->add_option("--delta", tradeoff_args.deltas,
                           "delta at which to certify the tightest epsilon (repeatable)");
  tradeoff_cmd->add_flag("--to-gdp", tradeoff_args.to_gdp,
                         "convert each --eps-delta spec to its Gaussian-DP mu and exit");

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a CATE meta-learner on a CSV dataset");
  fit_cmd->add_option("--data", fit_args.data_path, "training CSV with columns y,t,x1..xd")
      ->required();
  fit_cmd->add_option("--learner", fit_args.learner, "meta-learner: dr, r, or s")->required();
  fit_cmd->add_option("--test", fit_args.test_path,
                      "CSV with columns x1..xd; writes predictions.csv of tau_hat");
  fit_cmd->add_option("--out-dir", fit_args.out_dir, "output directory (default .)");
  CLI::Option* eps_opt =
      fit_cmd->add_option("--epsilon", fit_args.epsilon, "privacy budget epsilon");
  CLI::Option* delta_opt =
      fit_cmd->add_option("--delta", fit_args.delta, "privacy budget delta");
  eps_opt->needs(delta_opt);
  delta_opt->needs(eps_opt);
  fit_cmd->add_option("--bounds", fit_args.bounds_spec,
                      "public feature range 'lo,hi' for binning (required when private)");
  fit_cmd->add_option("--ratios", fit_args.ratios_spec,
                      "sample-split fractions, e.g. 0.25,0.25,0.5");
  fit_cmd->add_option("--num-bins", fit_args.options.num_bins, "histogram bins per feature");
  fit_cmd->add_option("--rounds", fit_args.options.rounds, "boosting rounds");
  fit_cmd->add_option("--learning-rate", fit_args.options.learning_rate, "shrinkage per step");
  fit_cmd->add_option("--clip", fit_args.options.clip, "public outcome bound");
  fit_cmd->add_option("--second-stage-bins", fit_args.options.second_stage_bins,
                      "bins for the pseudo-outcome regression");
  fit_cmd->add_option("--second-stage-rounds", fit_args.options.second_stage_rounds,
                      "rounds for the pseudo-outcome regression");
  fit_cmd->add_option("--trim-lo", fit_args.options.trim_lo, "propensity floor");
  fit_cmd->add_option("--trim-hi", fit_args.options.trim_hi, "propensity ceiling");
  fit_cmd->add_option("--seed", fit_args.options.seed, "fit seed");

  SimulateArgs simulate_args;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Draw a synthetic benchmark dataset to CSV");
  simulate_cmd->add_option("--setup", simulate_args.setup, "setup letter A..E")->required();
  simulate_cmd->add_option("--n", simulate_args.n, "number of rows")->required();
  simulate_cmd->add_option("--seed", simulate_args.seed, "generator seed");
  simulate_cmd->add_option("--out", simulate_args.out_path, "output CSV path")->required();

  ExperimentArgs experiment_args;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "Run a metrics grid and write CSV outputs");
  CLI::Option* config_opt = experiment_cmd->add_option(
      "--config", experiment_args.config_path, "key = value config file (default: desk grid)");
  experiment_cmd
      ->add_flag("--full-grid", experiment_args.full_grid,
                 "run the full-scale grid instead of the desk-scale default")
      ->excludes(config_opt);
  experiment_cmd->add_option("--out-dir", experiment_args.out_dir,
                             "output directory (default experiment_out)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tradeoff_cmd) return run_tradeoff(tradeoff_args);
    if (*fit_cmd) {
      fit_args.has_budget = eps_opt->count() > 0;
      return run_fit(fit_args);
    }
    if (*simulate_cmd) return run_simulate(simulate_args);
    if (*experiment_cmd) return run_experiment_cmd(experiment_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "dpcate: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "dpcate: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
