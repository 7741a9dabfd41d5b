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

#include "fdcm/covariance.hpp"

#include <stdexcept>
#include <string>

#include "fdcm/kernels.hpp"

namespace fdcm {

const char* stage_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::Raw: return "raw";
    case Stage::Thresholded: return "thresholded";
    case Stage::PDCorrected: return "corrected";
  }
  return "unknown";
}

namespace {

void check_weights(const Dataset& data, const WeightVector& weights) {
  if (weights.n != data.n()) {
    throw std::invalid_argument("weight vector covers " + std::to_string(weights.n) + " rows, dataset has " +
                                std::to_string(data.n()));
  }
}

void mirror_upper(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = c + 1; r < m.rows(); ++r) m(r, c) = m(c, r);
  }
}

void check_forest(const Forest& forest, const Dataset& data) {
  if (forest.n() != data.n() || forest.d() != data.d() || forest.dataset_fingerprint() != data.fingerprint()) {
    throw std::invalid_argument("forest was trained on a different dataset");
  }
}

}  // namespace

Vector weighted_mean(const Dataset& data, const WeightVector& weights) {
  check_weights(data, weights);
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(data.p()));
  for (const auto& [i, w] : weights.entries) {
    kernels::axpy(w, data.y(i), std::span<double>(mean.data(), data.p()));
  }
  return mean;
}

Matrix weighted_second_moment(const Dataset& data, const WeightVector& weights) {
  check_weights(data, weights);
  const auto p = static_cast<Eigen::Index>(data.p());
  Matrix m = Matrix::Zero(p, p);
  for (const auto& [i, w] : weights.entries) {
    const auto y = data.y(i);
    // Column r, rows 0..r (upper triangle in column-major storage).
    for (Eigen::Index r = 0; r < p; ++r) {
      const double scale = w * y[static_cast<std::size_t>(r)];
      if (scale == 0.0) continue;
      kernels::axpy(scale, y.first(static_cast<std::size_t>(r) + 1),
                    std::span<double>(m.col(r).data(), static_cast<std::size_t>(r) + 1));
    }
  }
  mirror_upper(m);
  return m;
}

Matrix weighted_covariance(const Dataset& data, const WeightVector& mean_weights,
                           const WeightVector& second_moment_weights) {
  Matrix cov = weighted_second_moment(data, second_moment_weights);
  const Vector mean = weighted_mean(data, mean_weights);
  for (Eigen::Index c = 0; c < cov.cols(); ++c) {
    for (Eigen::Index r = 0; r <= c; ++r) cov(r, c) -= mean(r) * mean(c);
  }
  mirror_upper(cov);
  return cov;
}

Vector cond_mean(const Forest& mean_forest, const Dataset& data, std::span<const double> u) {
  check_forest(mean_forest, data);
  return weighted_mean(data, weight_vector(mean_forest, u));
}

Matrix cond_second_moment(const Forest& second_moment_forest, const Dataset& data, std::span<const double> u) {
  check_forest(second_moment_forest, data);
  return weighted_second_moment(data, weight_vector(second_moment_forest, u));
}

DynCovEstimate raw_cov(const Forest& mean_forest, const Forest& second_moment_forest, const Dataset& data,
                       std::span<const double> u) {
  check_forest(mean_forest, data);
  check_forest(second_moment_forest, data);
  DynCovEstimate est;
  est.u.assign(u.begin(), u.end());
  est.matrix = weighted_covariance(data, weight_vector(mean_forest, u), weight_vector(second_moment_forest, u));
  est.stage = Stage::Raw;
  return est;
}

FdcmForests train_fdcm(const Dataset& data, const ForestConfig& config, bool shared,
                       std::size_t second_moment_trees) {
  ForestConfig second_cfg = config;
  second_cfg.seed = derive_seed(config.seed, Stream::SecondMomentForest, 0);
  if (second_moment_trees > 0) second_cfg.num_trees = second_moment_trees;
  Forest second = train_forest(data, second_cfg, ResponseKind::SecondMoment);
  if (shared) return FdcmForests{std::nullopt, std::move(second)};
  ForestConfig mean_cfg = config;
  mean_cfg.seed = derive_seed(config.seed, Stream::MeanForest, 0);
  return FdcmForests{train_forest(data, mean_cfg, ResponseKind::Mean), std::move(second)};
}

DynCovEstimate raw_cov(const FdcmForests& forests, const Dataset& data, std::span<const double> u) {
  return raw_cov(forests.mean_forest(), forests.second_moment, data, u);
}

}  // namespace fdcm
