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

#ifndef DPCATE_DATASET_H_
#define DPCATE_DATASET_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Observational data containers and the numeric CSV format shared by the
// generator, the learners, and the command-line tools.
namespace dpcate::data {

// Columnar causal dataset: outcome y, binary treatment t, covariates x
// stored one column per feature.
struct ObservationSet {
  std::vector<double> y;
  std::vector<std::int8_t> t;
  std::vector<std::vector<double>> x;

  std::size_t num_rows() const { return y.size(); }
  std::size_t num_features() const { return x.size(); }

  // Throws std::invalid_argument on empty data, ragged columns, non-finite
  // values, or a treatment outside {0, 1}.
  void validate() const;

  // Copy of the listed rows, in the given order.
  ObservationSet subset(std::span<const std::uint32_t> rows) const;
};

// A numeric table with named columns, the in-memory form of our CSV files.
struct LabeledTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t num_rows() const { return columns.empty() ? 0 : columns[0].size(); }
  // Index of the named column, or -1.
  int column_index(const std::string& name) const;
};

// Strict numeric CSV: one header row, comma separators, every cell parsed as
// a double (inf and nan spellings included). Throws std::runtime_error on
// unreadable files and std::invalid_argument on malformed content.
LabeledTable read_csv(const std::string& path);

// Writes with enough digits that reading back reproduces every double bit
// for bit.
void write_csv(const std::string& path, const LabeledTable& table);

// Interprets a table as observations: columns "y" and "t" are required, a
// "tau_true" column is ignored, and every other column becomes a feature in
// header order.
ObservationSet to_observations(const LabeledTable& table);

// Inverse of to_observations with columns y, t, x1..xd, and optionally
// tau_true appended.
LabeledTable from_observations(const ObservationSet& obs,
                               const std::vector<double>* tau_true = nullptr);

}  // namespace dpcate::data

#endif  // DPCATE_DATASET_H_
