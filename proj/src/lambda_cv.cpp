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

#include "fdcm/lambda_cv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fdcm {

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds, Rng& rng) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (n < 2 * folds) {
    throw std::invalid_argument("cross-validation with " + std::to_string(folds) + " folds needs n >= " +
                                std::to_string(2 * folds) + ", have " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < n; ++i) out[i % folds].push_back(order[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::vector<std::size_t> fold_complement(std::size_t n, std::span<const std::size_t> fold) {
  std::vector<bool> held(n, false);
  for (auto i : fold) held[i] = true;
  std::vector<std::size_t> out;
  out.reserve(n - fold.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!held[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<std::size_t>> route_rows(const Forest& forest, const Dataset& data) {
  std::vector<std::vector<std::size_t>> leaves;
  leaves.reserve(forest.trees().size());
  for (const auto& tree : forest.trees()) {
    std::vector<std::size_t> ids(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) ids[i] = tree.leaf_of(data.u(i));
    leaves.push_back(std::move(ids));
  }
  return leaves;
}

WeightVector routed_weights(const Forest& forest, std::span<const std::vector<std::size_t>> row_leaves,
                            std::size_t row_count, std::span<const double> u) {
  std::vector<double> dense(row_count, 0.0);
  std::size_t trees_used = 0;
  std::vector<std::size_t> members;
  for (std::size_t b = 0; b < forest.trees().size(); ++b) {
    const std::size_t leaf = forest.trees()[b].leaf_of(u);
    members.clear();
    for (std::size_t i = 0; i < row_count; ++i) {
      if (row_leaves[b][i] == leaf) members.push_back(i);
    }
    if (members.empty()) continue;
    ++trees_used;
    const double share = 1.0 / static_cast<double>(members.size());
    for (auto i : members) dense[i] += share;
  }
  WeightVector out;
  out.n = row_count;
  if (trees_used == 0) {
    for (std::size_t i = 0; i < row_count; ++i) out.entries.emplace_back(i, 1.0 / static_cast<double>(row_count));
    return out;
  }
  for (std::size_t i = 0; i < row_count; ++i) {
    if (dense[i] > 0.0) out.entries.emplace_back(i, dense[i] / static_cast<double>(trees_used));
  }
  return out;
}

FdcmCrossValidator::FdcmCrossValidator(const Dataset& data, const ForestConfig& forest_config, const CvConfig& cv,
                                       bool shared_forests)
    : cv_(cv) {
  Rng rng = make_rng(cv.seed, Stream::Fold, 0);
  const auto groups = make_folds(data.n(), cv.folds, rng);
  const std::size_t full_trees = std::max<std::size_t>(forest_config.num_trees, 1);
  const std::size_t trees =
      cv.trees > 0 ? cv.trees : std::min(full_trees, std::max<std::size_t>(full_trees / 5, 50));

  for (std::size_t v = 0; v < groups.size(); ++v) {
    const auto train_rows = fold_complement(data.n(), groups[v]);
    ForestConfig cfg = forest_config;
    cfg.num_trees = trees;
    cfg.seed = derive_seed(cv.seed, Stream::Fold, v + 1);
    if (cfg.subsample_size > 0) {
      // keep the subsampling rate of the full fit
      const double rate = static_cast<double>(cfg.subsample_size) / static_cast<double>(data.n());
      cfg.subsample_size = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::ceil(rate * static_cast<double>(train_rows.size()))));
    }
    Dataset train = data.subset(train_rows);
    if (train.n() < cfg.resolved(train.n(), train.d()).subsample_size) {
      throw std::invalid_argument("fold complement too small to train a forest");
    }
    Dataset held = data.subset(groups[v]);
    FdcmForests forests = train_fdcm(train, cfg, shared_forests);
    auto mean_leaves = route_rows(forests.mean_forest(), held);
    auto second_leaves = shared_forests ? mean_leaves : route_rows(forests.second_moment, held);
    folds_.push_back(Fold{std::move(train), std::move(held), std::move(forests), std::move(mean_leaves),
                          std::move(second_leaves)});
  }
}

std::vector<FoldPair> FdcmCrossValidator::fold_pairs(std::span<const double> u) const {
  std::vector<FoldPair> pairs;
  pairs.reserve(folds_.size());
  for (const auto& fold : folds_) {
    FoldPair pair;
    pair.train = raw_cov(fold.forests, fold.train, u).matrix;
    const auto alpha = routed_weights(fold.forests.mean_forest(), fold.held_mean_leaves, fold.held_out.n(), u);
    const auto beta = routed_weights(fold.forests.second_moment, fold.held_second_leaves, fold.held_out.n(), u);
    pair.held_out = weighted_covariance(fold.held_out, alpha, beta);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

LambdaSelection FdcmCrossValidator::select(const Matrix& full_raw, std::span<const double> u,
                                           const ThresholdRule& rule) const {
  auto grid = lambda_grid(max_abs_offdiagonal(full_raw), cv_.grid_size);
  if (grid.size() == 1) {
    return LambdaSelection{0.0, std::move(grid), {0.0}};
  }
  const auto pairs = fold_pairs(u);
  return select_from_folds(pairs, std::move(grid), rule);
}

LambdaSelection select_lambda(const Dataset& data, const FdcmForests& forests, std::span<const double> u,
                              const ThresholdRule& rule, std::size_t folds, std::size_t grid_size) {
  CvConfig cv;
  cv.folds = folds;
  cv.grid_size = grid_size;
  cv.seed = derive_seed(forests.second_moment.config().seed, Stream::Fold, 0);
  const Matrix full = raw_cov(forests, data, u).matrix;
  FdcmCrossValidator validator(data, forests.second_moment.config(), cv, forests.shared());
  return validator.select(full, u, rule);
}

}  // namespace fdcm
