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

#include <cstdint>
#include <span>
#include <vector>

#include "fdcm/covariance.hpp"
#include "fdcm/dataset.hpp"
#include "fdcm/rng.hpp"

namespace fdcm {

/// Dynamic covariance models used for benchmarking. M1/M2 are scaled AR(1)
/// structures driven by u1 (M1) or u1 + u2 (M2); M3/M4 are bands whose
/// sparsity changes with u1 (M3) or with u1 and u2 jointly (M4).
enum class ModelId { M1 = 1, M2 = 2, M3 = 3, M4 = 4 };

struct ModelSpec {
  ModelId id = ModelId::M1;
  std::size_t p = 100;
  std::size_t d = 10;
  std::size_t n = 100;

  /// Throws std::invalid_argument on an unusable shape.
  void validate() const;
  bool has_varying_sparsity() const noexcept { return id == ModelId::M3 || id == ModelId::M4; }
};

ModelId parse_model_id(int number);

double std_normal_pdf(double x) noexcept;

Matrix true_cov(const ModelSpec& model, std::span<const double> u);

/// U_i ~ Unif[-1, 1]^d, Y_i ~ N(0, true_cov(U_i)).
Dataset sample_dataset(const ModelSpec& model, Rng& rng);

struct Losses {
  double frobenius = 0.0;
  double spectral = 0.0;
};

Losses losses(const Matrix& estimate, const Matrix& truth);

struct SparsityRates {
  double tpr = 1.0;
  double fpr = 0.0;
};

/// Counts over all (j, r), diagonal included. An empty reference set gives
/// TPR = 1 or FPR = 0.
SparsityRates sparsity_rates(const Matrix& estimate, const Matrix& truth);

/// Mean of the two central order statistics for even counts.
double median(std::vector<double> values);

inline constexpr std::uint64_t kTestPointSeed = 20240530;
inline constexpr std::size_t kTestPointCount = 30;

/// Evaluation points drawn from Unif[-1, 1]^d with a frozen seed; the same
/// points are used by every experiment of a given d.
std::vector<std::vector<double>> fixed_test_points(std::size_t d, std::size_t count = kTestPointCount,
                                                   std::uint64_t seed = kTestPointSeed);

std::vector<std::vector<double>> load_points_csv(const std::filesystem::path& path);
void write_points_csv(const std::filesystem::path& path, std::span<const std::vector<double>> points);

}  // namespace fdcm
