// Copyright 2026 The fdcm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fdcm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace fdcm {

DataError::DataError(const std::string& what, std::size_t row, std::size_t column)
    : std::runtime_error(row == 0 ? what
                                  : "row " + std::to_string(row) + ", column " + std::to_string(column) +
                                        ": " + what),
      row_(row),
      column_(column) {}

Dataset::Dataset(std::vector<double> responses, std::vector<double> covariates, std::size_t p, std::size_t d)
    : responses_(std::move(responses)), covariates_(std::move(covariates)), p_(p), d_(d) {
  if (p_ == 0) throw DataError("dataset needs at least one response column (p = 0)");
  if (d_ == 0) throw DataError("dataset needs at least one covariate column (d = 0)");
  if (responses_.size() % p_ != 0 || covariates_.size() % d_ != 0 ||
      responses_.size() / p_ != covariates_.size() / d_) {
    throw DataError("response and covariate blocks disagree on the number of rows");
  }
  n_ = responses_.size() / p_;
  if (n_ == 0) throw DataError("dataset is empty");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(responses_.begin(), responses_.end(), finite) ||
      !std::all_of(covariates_.begin(), covariates_.end(), finite)) {
    throw DataError("dataset contains non-finite values");
  }
}

Dataset Dataset::from_samples(std::span<const Sample> samples) {
  if (samples.empty()) throw DataError("dataset is empty");
  const std::size_t p = samples.front().y.size();
  const std::size_t d = samples.front().u.size();
  std::vector<double> y;
  std::vector<double> u;
  y.reserve(samples.size() * p);
  u.reserve(samples.size() * d);
  for (const auto& s : samples) {
    if (s.y.size() != p || s.u.size() != d) throw DataError("samples disagree on p or d");
    y.insert(y.end(), s.y.begin(), s.y.end());
    u.insert(u.end(), s.u.begin(), s.u.end());
  }
  return Dataset(std::move(y), std::move(u), p, d);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> y;
  std::vector<double> u;
  y.reserve(rows.size() * p_);
  u.reserve(rows.size() * d_);
  std::vector<std::string> labels;
  for (auto i : rows) {
    if (i >= n_) throw std::out_of_range("Dataset::subset: row index out of range");
    auto yi = this->y(i);
    auto ui = this->u(i);
    y.insert(y.end(), yi.begin(), yi.end());
    u.insert(u.end(), ui.begin(), ui.end());
    if (!row_labels.empty()) labels.push_back(row_labels[i]);
  }
  Dataset out(std::move(y), std::move(u), p_, d_);
  out.response_names = response_names;
  out.covariate_names = covariate_names;
  out.row_labels = std::move(labels);
  return out;
}

std::uint64_t Dataset::fingerprint() const noexcept {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t bytes) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[3] = {n_, p_, d_};
  feed(dims, sizeof dims);
  feed(responses_.data(), responses_.size() * sizeof(double));
  feed(covariates_.data(), covariates_.size() * sizeof(double));
  return h;
}

std::vector<double> vec_outer(std::span<const double> y) {
  const std::size_t p = y.size();
  std::vector<double> out(p * p);
  // column r holds y * y_r
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t j = 0; j < p; ++j) out[r * p + j] = y[j] * y[r];
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

namespace {

std::vector<std::size_t> resolve_columns(const std::vector<std::string>& selectors,
                                         const std::vector<std::string>& header, const char* role) {
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t c = 0; c < header.size(); ++c) by_name.emplace(header[c], c);
  auto position = [&](const std::string& token) -> std::optional<std::size_t> {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
    return value;
  };
  std::vector<std::size_t> columns;
  for (const auto& token : selectors) {
    if (auto it = by_name.find(token); it != by_name.end()) {
      columns.push_back(it->second);
      continue;
    }
    if (auto pos = position(token)) {
      if (*pos < 1 || *pos > header.size()) {
        throw DataError(std::string(role) + " column position " + token + " is outside the header");
      }
      columns.push_back(*pos - 1);
      continue;
    }
    if (const auto dash = token.find('-'); dash != std::string::npos) {
      const auto lo = position(token.substr(0, dash));
      const auto hi = position(token.substr(dash + 1));
      if (lo && hi && *lo >= 1 && *lo <= *hi && *hi <= header.size()) {
        for (std::size_t c = *lo; c <= *hi; ++c) columns.push_back(c - 1);
        continue;
      }
    }
    throw DataError(std::string("unknown ") + role + " column '" + token + "'");
  }
  return columns;
}

}  // namespace

Dataset load_returns_csv(const std::filesystem::path& path, const CsvLayout& layout) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw DataError("'" + path.string() + "' has no header row");

  const auto response_cols = resolve_columns(layout.response_columns, header, "response");
  const auto covariate_cols = resolve_columns(layout.covariate_columns, header, "covariate");
  if (response_cols.empty()) throw DataError("layout selects no response columns (p = 0)");
  if (covariate_cols.empty()) throw DataError("layout selects no covariate columns (d = 0)");
  std::optional<std::size_t> date_col;
  if (layout.date_column) {
    date_col = resolve_columns({*layout.date_column}, header, "date").front();
  }

  std::vector<std::vector<double>> y_rows;
  std::vector<std::vector<double>> u_rows;
  std::vector<std::string> dates;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " cells, found " +
                          std::to_string(cells.size()),
                      row, std::min(cells.size(), header.size()) + 1);
    }
    auto numeric = [&](std::size_t col) {
      const auto value = parse_double(cells[col]);
      if (!value) {
        throw DataError(cells[col].empty() ? "missing value" : "non-numeric cell '" + cells[col] + "'", row,
                        col + 1);
      }
      return *value;
    };
    std::vector<double> y;
    std::vector<double> u;
    for (auto c : response_cols) y.push_back(numeric(c));
    for (auto c : covariate_cols) u.push_back(numeric(c));
    y_rows.push_back(std::move(y));
    u_rows.push_back(std::move(u));
    if (date_col) {
      if (cells[*date_col].empty()) throw DataError("missing date", row, *date_col + 1);
      dates.push_back(cells[*date_col]);
    }
  }

  if (y_rows.size() <= layout.lag) {
    throw DataError("'" + path.string() + "' has " + std::to_string(y_rows.size()) +
                    " data rows, not enough for lag " + std::to_string(layout.lag));
  }
  const std::size_t n = y_rows.size() - layout.lag;
  std::vector<double> y;
  std::vector<double> u;
  std::vector<std::string> labels;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& yt = y_rows[t + layout.lag];
    y.insert(y.end(), yt.begin(), yt.end());
    u.insert(u.end(), u_rows[t].begin(), u_rows[t].end());
    if (date_col) labels.push_back(dates[t + layout.lag]);
  }
  Dataset data(std::move(y), std::move(u), response_cols.size(), covariate_cols.size());
  for (auto c : response_cols) data.response_names.push_back(header[c]);
  for (auto c : covariate_cols) data.covariate_names.push_back(header[c]);
  data.row_labels = std::move(labels);
  return data;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                       std::span<const std::string> comment_lines) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  const bool labelled = !data.row_labels.empty();
  std::vector<std::string> names;
  if (labelled) names.emplace_back("date");
  for (std::size_t j = 0; j < data.p(); ++j) {
    names.push_back(j < data.response_names.size() ? data.response_names[j] : "y" + std::to_string(j + 1));
  }
  for (std::size_t j = 0; j < data.d(); ++j) {
    names.push_back(j < data.covariate_names.size() ? data.covariate_names[j] : "u" + std::to_string(j + 1));
  }
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    bool first = true;
    auto emit = [&](const std::string& cell) {
      out << (first ? "" : ",") << cell;
      first = false;
    };
    if (labelled) emit(data.row_labels[i]);
    for (double v : data.y(i)) emit(format_double(v));
    for (double v : data.u(i)) emit(format_double(v));
    out << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path.string() + "'");
}

bool UnitCubeMap::any_constant() const noexcept {
  return std::find(constant.begin(), constant.end(), true) != constant.end();
}

std::vector<double> UnitCubeMap::apply(std::span<const double> u) const {
  if (u.size() != lower.size()) throw std::invalid_argument("UnitCubeMap::apply: covariate length mismatch");
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    out[j] = constant[j] ? 0.5 : (u[j] - lower[j]) / (upper[j] - lower[j]);
  }
  return out;
}

UnitCubeResult map_to_unit_cube(const Dataset& data) {
  if (data.n() < 2) throw std::invalid_argument("map_to_unit_cube needs n >= 2");
  const std::size_t d = data.d();
  UnitCubeMap map;
  map.lower.assign(d, 0.0);
  map.upper.assign(d, 0.0);
  map.constant.assign(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = data.u(0, j);
    double hi = lo;
    for (std::size_t i = 1; i < data.n(); ++i) {
      lo = std::min(lo, data.u(i, j));
      hi = std::max(hi, data.u(i, j));
    }
    map.lower[j] = lo;
    map.upper[j] = hi;
    map.constant[j] = !(hi > lo);
  }
  std::vector<double> responses(data.responses().begin(), data.responses().end());
  std::vector<double> covariates;
  covariates.reserve(data.n() * d);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto mapped = map.apply(data.u(i));
    covariates.insert(covariates.end(), mapped.begin(), mapped.end());
  }
  Dataset out(std::move(responses), std::move(covariates), data.p(), d);
  out.response_names = data.response_names;
  out.covariate_names = data.covariate_names;
  out.row_labels = data.row_labels;
  return {std::move(out), std::move(map)};
}

}  // namespace fdcm
