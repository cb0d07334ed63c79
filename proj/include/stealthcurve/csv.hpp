// Copyright 2026 The Stealthcurve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stealthcurve/grid.hpp"
#include "stealthcurve/simulate.hpp"
#include "stealthcurve/spectra.hpp"
#include "stealthcurve/tradeoff.hpp"

namespace stealthcurve {
namespace cli {

// All CSVs use a header row, comma delimiters and %.17g doubles, which
// round-trip exactly through the loaders below.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes through a temp file plus rename so readers never observe a
// half-written table.
inline void atomic_write_text(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush())
      throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline void write_table_csv(const std::filesystem::path& path,
                            const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const std::vector<double>& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("write_table_csv: ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  atomic_write_text(path, out);
}

namespace internal {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

inline double parse_double(const std::string& text,
                           const std::filesystem::path& path,
                           std::size_t line_no) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                ": not a number: '" + text + "'");
  return value;
}

}  // namespace internal

inline CsvTable load_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::invalid_argument("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = internal::split_csv_line(line);
    if (line_no == 1) {
      table.header = fields;
      continue;
    }
    if (fields.size() != table.header.size())
      throw std::invalid_argument(path.string() + ":" +
                                  std::to_string(line_no) +
                                  ": wrong number of columns");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields)
      row.push_back(internal::parse_double(f, path, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty())
    throw std::invalid_argument(path.string() + ": empty file");
  return table;
}

namespace internal {

inline void expect_header(const CsvTable& table,
                          const std::vector<std::string>& expected,
                          const std::filesystem::path& path) {
  if (table.header != expected) {
    std::string want;
    for (const std::string& h : expected) {
      if (!want.empty()) want += ',';
      want += h;
    }
    throw std::invalid_argument(path.string() + ": expected header '" + want +
                                "'");
  }
}

}  // namespace internal

inline void write_spectrum_csv(const std::filesystem::path& path,
                               const spectra::SpectrumSamples& s) {
  CsvTable table;
  table.header = {"omega", "value"};
  table.rows.reserve(s.size());
  for (std::size_t j = 0; j < s.size(); ++j)
    table.rows.push_back({s.grid().omega(j), s[j]});
  write_table_csv(path, table);
}

inline spectra::SpectrumSamples load_spectrum_csv(
    const std::filesystem::path& path) {
  const CsvTable table = load_table_csv(path);
  internal::expect_header(table, {"omega", "value"}, path);
  FrequencyGrid grid(table.rows.size());
  std::vector<double> values(table.rows.size());
  for (std::size_t j = 0; j < table.rows.size(); ++j) {
    if (std::fabs(table.rows[j][0] - grid.omega(j)) > 1e-9)
      throw std::invalid_argument(
          path.string() + ": row " + std::to_string(j + 2) +
          ": omega off the uniform grid for " +
          std::to_string(table.rows.size()) + " bins");
    values[j] = table.rows[j][1];
  }
  return spectra::SpectrumSamples(grid, std::move(values));
}

// Per-target spectra of a solved operating point.
inline void write_point_spectra_csv(const std::filesystem::path& path,
                                    const spectra::SpectrumSamples& s_y,
                                    const tradeoff::TradeoffPoint& point) {
  CsvTable table;
  table.header = {"omega", "S_y", "S_nhat", "S_n"};
  table.rows.reserve(s_y.size());
  for (std::size_t j = 0; j < s_y.size(); ++j)
    table.rows.push_back({s_y.grid().omega(j), s_y[j],
                          point.output_deviation_spectrum[j],
                          point.attack_spectrum[j]});
  write_table_csv(path, table);
}

struct PointSpectra {
  spectra::SpectrumSamples s_y;
  spectra::SpectrumSamples output_deviation;
  spectra::SpectrumSamples attack;
};

inline PointSpectra load_point_spectra_csv(const std::filesystem::path& path) {
  const CsvTable table = load_table_csv(path);
  internal::expect_header(table, {"omega", "S_y", "S_nhat", "S_n"}, path);
  FrequencyGrid grid(table.rows.size());
  std::vector<double> s_y(table.rows.size());
  std::vector<double> dev(table.rows.size());
  std::vector<double> att(table.rows.size());
  for (std::size_t j = 0; j < table.rows.size(); ++j) {
    if (std::fabs(table.rows[j][0] - grid.omega(j)) > 1e-9)
      throw std::invalid_argument(path.string() + ": row " +
                                  std::to_string(j + 2) +
                                  ": omega off the uniform grid");
    s_y[j] = table.rows[j][1];
    dev[j] = table.rows[j][2];
    att[j] = table.rows[j][3];
  }
  return PointSpectra{spectra::SpectrumSamples(grid, std::move(s_y)),
                      spectra::SpectrumSamples(grid, std::move(dev)),
                      spectra::SpectrumSamples(grid, std::move(att))};
}

inline void write_curve_csv(const std::filesystem::path& path,
                            const tradeoff::CurveTable& curve) {
  CsvTable table;
  table.header = {"target", "D", "zeta", "kl_rate"};
  table.rows.reserve(curve.rows.size());
  for (const tradeoff::CurveRow& row : curve.rows)
    table.rows.push_back({row.target, row.distortion, row.zeta, row.kl_rate});
  write_table_csv(path, table);
}

inline std::vector<tradeoff::CurveRow> load_curve_csv(
    const std::filesystem::path& path) {
  const CsvTable table = load_table_csv(path);
  internal::expect_header(table, {"target", "D", "zeta", "kl_rate"}, path);
  std::vector<tradeoff::CurveRow> rows;
  rows.reserve(table.rows.size());
  for (const std::vector<double>& r : table.rows)
    rows.push_back({r[0], r[1], r[2], r[3]});
  return rows;
}

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const simulate::SimulationResult& result) {
  CsvTable table;
  table.header = {"k", "x", "x_hat", "y", "y_hat", "n"};
  table.rows.reserve(result.x.size());
  for (std::size_t t = 0; t < result.x.size(); ++t)
    table.rows.push_back({static_cast<double>(t), result.x[t], result.x_hat[t],
                          result.y[t], result.y_hat[t], result.attack[t]});
  write_table_csv(path, table);
}

inline simulate::SimulationResult load_trajectory_csv(
    const std::filesystem::path& path) {
  const CsvTable table = load_table_csv(path);
  internal::expect_header(table, {"k", "x", "x_hat", "y", "y_hat", "n"}, path);
  simulate::SimulationResult result;
  result.horizon = table.rows.size();
  for (std::size_t t = 0; t < table.rows.size(); ++t) {
    const std::vector<double>& r = table.rows[t];
    if (r[0] != static_cast<double>(t))
      throw std::invalid_argument(path.string() + ": row " +
                                  std::to_string(t + 2) +
                                  ": step index out of order");
    result.x.push_back(r[1]);
    result.x_hat.push_back(r[2]);
    result.y.push_back(r[3]);
    result.y_hat.push_back(r[4]);
    result.attack.push_back(r[5]);
  }
  return result;
}

// One realization of the injected attack, written by the synthesize
// command.
inline void write_attack_csv(const std::filesystem::path& path,
                             const std::vector<double>& attack) {
  CsvTable table;
  table.header = {"k", "n"};
  table.rows.reserve(attack.size());
  for (std::size_t t = 0; t < attack.size(); ++t)
    table.rows.push_back({static_cast<double>(t), attack[t]});
  write_table_csv(path, table);
}

inline std::vector<double> load_attack_csv(const std::filesystem::path& path) {
  const CsvTable table = load_table_csv(path);
  internal::expect_header(table, {"k", "n"}, path);
  std::vector<double> attack;
  attack.reserve(table.rows.size());
  for (std::size_t t = 0; t < table.rows.size(); ++t) {
    const std::vector<double>& r = table.rows[t];
    if (r[0] != static_cast<double>(t))
      throw std::invalid_argument(path.string() + ": row " +
                                  std::to_string(t + 2) +
                                  ": step index out of order");
    attack.push_back(r[1]);
  }
  return attack;
}

}  // namespace cli
}  // namespace stealthcurve
