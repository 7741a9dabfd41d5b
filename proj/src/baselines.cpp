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

#include "fdcm/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fdcm {

namespace {

WeightVector uniform_weights(std::size_t n) {
  WeightVector w;
  w.n = n;
  for (std::size_t i = 0; i < n; ++i) w.entries.emplace_back(i, 1.0 / static_cast<double>(n));
  return w;
}

}  // namespace

Matrix sample_covariance(const Dataset& data) {
  const auto w = uniform_weights(data.n());
  return weighted_covariance(data, w, w);
}

StaticEstimate static_baseline(const Dataset& data, const ThresholdRule& rule, const CvConfig& cv) {
  if (data.n() < 2) throw std::invalid_argument("static baseline needs n >= 2");
  StaticEstimate out;
  out.raw = sample_covariance(data);
  auto grid = lambda_grid(max_abs_offdiagonal(out.raw), cv.grid_size);
  if (grid.size() == 1 || data.n() < 2 * cv.folds) {
    out.lambda = LambdaSelection{0.0, grid, std::vector<double>(grid.size(), 0.0)};
  } else {
    Rng rng = make_rng(cv.seed, Stream::Fold, 0);
    const auto groups = make_folds(data.n(), cv.folds, rng);
    std::vector<FoldPair> pairs;
    for (const auto& g : groups) {
      const auto train_rows = fold_complement(data.n(), g);
      pairs.push_back({sample_covariance(data.subset(train_rows)), sample_covariance(data.subset(g))});
    }
    out.lambda = select_from_folds(pairs, std::move(grid), rule);
  }
  out.thresholded = threshold_offdiagonal(out.raw, out.lambda.lambda, rule);
  return out;
}

double epanechnikov(double t) noexcept { return std::abs(t) <= 1.0 ? 0.75 * (1.0 - t * t) : 0.0; }

double rule_of_thumb_bandwidth(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  if (values.size() < 2) throw std::invalid_argument("bandwidth rule needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double h = 1.06 * sd * std::pow(n, -0.2);
  return h > 0.0 ? h : 1.0;
}

KernelDcm::KernelDcm(const Dataset& data, std::size_t covariate, double bandwidth)
    : data_(data), covariate_(covariate), bandwidth_(bandwidth) {
  if (covariate >= data.d()) {
    throw std::invalid_argument("kernel covariate index " + std::to_string(covariate + 1) + " exceeds d = " +
                                std::to_string(data.d()));
  }
  if (bandwidth_ <= 0.0) {
    std::vector<double> column(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) column[i] = data.u(i, covariate);
    bandwidth_ = rule_of_thumb_bandwidth(column);
  }
}

WeightVector KernelDcm::weights(std::span<const double> u) const {
  if (u.size() != data_.d()) throw std::invalid_argument("kernel query point has the wrong length");
  double h = bandwidth_;
  for (int attempt = 0; attempt <= 10; ++attempt, h *= 2.0) {
    WeightVector w;
    w.n = data_.n();
    double total = 0.0;
    for (std::size_t i = 0; i < data_.n(); ++i) {
      const double k = epanechnikov((data_.u(i, covariate_) - u[covariate_]) / h);
      if (k > 0.0) {
        w.entries.emplace_back(i, k);
        total += k;
      }
    }
    if (total > 0.0) {
      for (auto& e : w.entries) e.second /= total;
      return w;
    }
  }
  throw std::runtime_error("kernel weights vanish at the query point even after widening the bandwidth");
}

Matrix KernelDcm::raw(std::span<const double> u) const {
  const auto w = weights(u);
  return weighted_covariance(data_, w, w);
}

KernelEstimate kernel_dcm_baseline(const Dataset& data, std::size_t covariate, std::span<const double> u,
                                   const ThresholdRule& rule, const CvConfig& cv) {
  KernelEstimate out;
  const KernelDcm full(data, covariate);
  out.raw = full.raw(u);
  auto grid = lambda_grid(max_abs_offdiagonal(out.raw), cv.grid_size);
  if (grid.size() == 1 || data.n() < 2 * cv.folds) {
    out.lambda = LambdaSelection{0.0, grid, std::vector<double>(grid.size(), 0.0)};
  } else {
    Rng rng = make_rng(cv.seed, Stream::Fold, 0);
    const auto groups = make_folds(data.n(), cv.folds, rng);
    std::vector<FoldPair> pairs;
    for (const auto& g : groups) {
      const Dataset train = data.subset(fold_complement(data.n(), g));
      const Dataset held = data.subset(g);
      pairs.push_back({KernelDcm(train, covariate).raw(u), KernelDcm(held, covariate).raw(u)});
    }
    out.lambda = select_from_folds(pairs, std::move(grid), rule);
  }
  out.thresholded = threshold_offdiagonal(out.raw, out.lambda.lambda, rule);
  return out;
}

}  // namespace fdcm
