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

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "fdcm/dataset.hpp"
#include "fdcm/honest_forest.hpp"

namespace fdcm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Stage { Raw, Thresholded, PDCorrected };

const char* stage_name(Stage stage) noexcept;

/// Symmetric p x p estimate of Cov(Y | U = u). Raw estimates are not
/// guaranteed to be positive semidefinite.
struct DynCovEstimate {
  std::vector<double> u;
  Matrix matrix;
  Stage stage = Stage::Raw;
};

/// sum_i w_i y_i
Vector weighted_mean(const Dataset& data, const WeightVector& weights);

/// sum_i w_i y_i y_i^T, accumulated on the upper triangle and mirrored, so
/// the result is exactly symmetric.
Matrix weighted_second_moment(const Dataset& data, const WeightVector& weights);

/// second-moment weights beta, mean weights alpha:
/// sum beta_i y_i y_i^T - (sum alpha_i y_i)(sum alpha_i y_i)^T
Matrix weighted_covariance(const Dataset& data, const WeightVector& mean_weights,
                           const WeightVector& second_moment_weights);

Vector cond_mean(const Forest& mean_forest, const Dataset& data, std::span<const double> u);
Matrix cond_second_moment(const Forest& second_moment_forest, const Dataset& data, std::span<const double> u);

/// Throws std::invalid_argument if either forest was trained on another dataset.
DynCovEstimate raw_cov(const Forest& mean_forest, const Forest& second_moment_forest, const Dataset& data,
                       std::span<const double> u);

/// The pair of forests behind one dynamic covariance fit. With `shared`
/// the second-moment forest also supplies the mean weights, which makes the
/// raw estimate a weighted covariance and hence PSD.
struct FdcmForests {
  std::optional<Forest> mean;
  Forest second_moment;

  const Forest& mean_forest() const { return mean ? *mean : second_moment; }
  bool shared() const noexcept { return !mean.has_value(); }
};

/// The mean forest uses seed stream MeanForest and the second-moment forest
/// SecondMomentForest, both derived from config.seed.
FdcmForests train_fdcm(const Dataset& data, const ForestConfig& config, bool shared = false,
                       std::size_t second_moment_trees = 0);

DynCovEstimate raw_cov(const FdcmForests& forests, const Dataset& data, std::span<const double> u);

}  // namespace fdcm
