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

#include "dpcate/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpcate::data {

void ObservationSet::validate() const {
  const std::size_t n = num_rows();
  if (n == 0) throw std::invalid_argument("ObservationSet: no rows");
  if (t.size() != n) throw std::invalid_argument("ObservationSet: treatment length mismatch");
  if (x.empty()) throw std::invalid_argument("ObservationSet: no features");
  for (const std::vector<double>& col : x) {
    if (col.size() != n) throw std::invalid_argument("ObservationSet: ragged feature column");
    for (double v : col) {
      if (!std::isfinite(v)) throw std::invalid_argument("ObservationSet: non-finite feature");
    }
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("ObservationSet: non-finite outcome");
  }
  for (std::int8_t v : t) {
    if (v != 0 && v != 1) throw std::invalid_argument("ObservationSet: treatment must be 0 or 1");
  }
}

ObservationSet ObservationSet::subset(std::span<const std::uint32_t> rows) const {
  ObservationSet out;
  out.y.reserve(rows.size());
  out.t.reserve(rows.size());
  out.x.resize(x.size());
  for (std::vector<double>& col : out.x) col.reserve(rows.size());
  for (std::uint32_t r : rows) {
    if (r >= num_rows()) throw std::invalid_argument("ObservationSet: row index out of range");
    out.y.push_back(y[r]);
    out.t.push_back(t[r]);
    for (std::size_t j = 0; j < x.size(); ++j) out.x[j].push_back(x[j][r]);
  }
  return out;
}

int LabeledTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return static_cast<int>(j);
  }
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_double(const std::string& cell, std::size_t line_no) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  // Trailing whitespace is tolerated, any other leftover text is an error.
  while (end != nullptr && (*end == ' ' || *end == '\t')) ++end;
  if (end == begin || end == nullptr || *end != '\0') {
    throw std::invalid_argument("csv: line " + std::to_string(line_no) +
                                ": cannot parse number '" + cell + "'");
  }
  return v;
}

}  // namespace

LabeledTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  LabeledTable table;
  table.names = split_line(line);
  if (table.names.empty()) throw std::invalid_argument("csv: '" + path + "' has no header");
  table.columns.resize(table.names.size());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != table.names.size()) {
      throw std::invalid_argument("csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(table.names.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      table.columns[j].push_back(parse_double(cells[j], line_no));
    }
  }
  return table;
}

void write_csv(const std::string& path, const LabeledTable& table) {
  if (table.names.size() != table.columns.size()) {
    throw std::invalid_argument("csv: header and column counts differ");
  }
  const std::size_t n = table.num_rows();
  for (const std::vector<double>& col : table.columns) {
    if (col.size() != n) throw std::invalid_argument("csv: ragged columns");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    if (j > 0) out << ',';
    out << table.names[j];
  }
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (j > 0) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", table.columns[j][i]);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("csv: write to '" + path + "' failed");
}

ObservationSet to_observations(const LabeledTable& table) {
  int yi = table.column_index("y");
  int ti = table.column_index("t");
  if (yi < 0 || ti < 0) {
    throw std::invalid_argument("csv: observation data needs 'y' and 't' columns");
  }
  ObservationSet obs;
  obs.y = table.columns[yi];
  obs.t.reserve(table.num_rows());
  for (double v : table.columns[ti]) {
    if (v != 0.0 && v != 1.0) {
      throw std::invalid_argument("csv: treatment column must contain only 0 or 1");
    }
    obs.t.push_back(static_cast<std::int8_t>(v));
  }
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    if (static_cast<int>(j) == yi || static_cast<int>(j) == ti) continue;
    if (table.names[j] == "tau_true") continue;
    obs.x.push_back(table.columns[j]);
  }
  obs.validate();
  return obs;
}

LabeledTable from_observations(const ObservationSet& obs, const std::vector<double>* tau_true) {
  obs.validate();
  LabeledTable table;
  table.names.push_back("y");
  table.columns.push_back(obs.y);
  table.names.push_back("t");
  std::vector<double> t_col;
  t_col.reserve(obs.t.size());
  for (std::int8_t v : obs.t) t_col.push_back(static_cast<double>(v));
  table.columns.push_back(std::move(t_col));
  for (std::size_t j = 0; j < obs.x.size(); ++j) {
    table.names.push_back("x" + std::to_string(j + 1));
    table.columns.push_back(obs.x[j]);
  }
  if (tau_true != nullptr) {
    if (tau_true->size() != obs.num_rows()) {
      throw std::invalid_argument("csv: tau_true length mismatch");
    }
    table.names.push_back("tau_true");
    table.columns.push_back(*tau_true);
  }
  return table;
}

}  // namespace dpcate::data
