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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdcm {

/// One observation: response y (length p) with conditioning covariates u (length d).
struct Sample {
  std::vector<double> y;
  std::vector<double> u;
};

/// Malformed input data. row/column are 1-based data coordinates (the header
/// is not counted); 0 means "not tied to a cell".
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t row = 0, std::size_t column = 0);
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// n paired observations stored row-major. Immutable after construction, so
/// it can be shared by concurrent tree builders.
class Dataset {
 public:
  Dataset(std::vector<double> responses, std::vector<double> covariates, std::size_t p, std::size_t d);

  static Dataset from_samples(std::span<const Sample> samples);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  std::size_t d() const noexcept { return d_; }

  std::span<const double> y(std::size_t i) const { return {responses_.data() + i * p_, p_}; }
  std::span<const double> u(std::size_t i) const { return {covariates_.data() + i * d_, d_}; }
  double u(std::size_t i, std::size_t feature) const { return covariates_[i * d_ + feature]; }

  std::span<const double> responses() const noexcept { return responses_; }
  std::span<const double> covariates() const noexcept { return covariates_; }

  /// Rows in the given order (indices may repeat).
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Hash of (n, p, d) and the byte image of all samples.
  std::uint64_t fingerprint() const noexcept;

  // Optional metadata carried from CSV ingestion.
  std::vector<std::string> response_names;
  std::vector<std::string> covariate_names;
  std::vector<std::string> row_labels;

 private:
  std::vector<double> responses_;
  std::vector<double> covariates_;
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::size_t d_ = 0;
};

/// Column-major stacking of a p x p matrix: entry (j, r), 1-based, sits at
/// position k = j + (r - 1) p.
struct VecIndex {
  std::size_t p;

  std::size_t k(std::size_t j, std::size_t r) const noexcept { return j + (r - 1) * p; }
  std::pair<std::size_t, std::size_t> entry(std::size_t k) const noexcept {
    return {(k - 1) % p + 1, (k - 1) / p + 1};
  }
};

/// vec(y y^T), length p^2, laid out per VecIndex.
std::vector<double> vec_outer(std::span<const double> y);

/// How a CSV table maps onto a Dataset. Column selectors are header names,
/// 1-based positions ("3"), or inclusive position ranges ("2-201").
struct CsvLayout {
  std::vector<std::string> response_columns;
  std::vector<std::string> covariate_columns;
  std::optional<std::string> date_column;
  /// Pair covariate row t with response row t + lag.
  std::size_t lag = 0;
};

/// Lines starting with '#' are skipped anywhere in the file.
Dataset load_returns_csv(const std::filesystem::path& path, const CsvLayout& layout);

/// Writes responses then covariates (and the row label column "date" when
/// labels are present) with round-trip precision.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                       std::span<const std::string> comment_lines = {});

/// Per-coordinate affine map of the observed covariate range onto [0, 1].
struct UnitCubeMap {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> constant;  // max == min; coordinate pinned to 0.5

  bool any_constant() const noexcept;
  std::vector<double> apply(std::span<const double> u) const;
};

struct UnitCubeResult {
  Dataset data;
  UnitCubeMap map;
};

UnitCubeResult map_to_unit_cube(const Dataset& data);

/// Parses one CSV line (no quoting support: cells are plain numbers or names).
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a finite double; returns nullopt on anything else.
std::optional<double> parse_double(std::string_view text);

/// %.17g formatting, which round-trips every finite double.
std::string format_double(double value);

}  // namespace fdcm
