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
#include "fdcm/thresholding.hpp"

namespace fdcm {

struct CvConfig {
  std::size_t folds = 5;
  std::size_t grid_size = 20;
  std::size_t trees = 0;  ///< per fold forest; 0 selects max(B/5, 50) capped at B
  std::uint64_t seed = 1;
};

/// Random partition of [0, n) into `folds` groups whose sizes differ by at
/// most one; each group sorted. Requires folds >= 2 and n >= 2 * folds.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds, Rng& rng);

/// Complement of `fold` in [0, n), sorted.
std::vector<std::size_t> fold_complement(std::size_t n, std::span<const std::size_t> fold);

/// V-fold cross-validation for the forest estimator. Forests are retrained
/// on every fold complement once; the held-out rows are routed through those
/// forests so the held-out raw estimate at u uses the same leaf similarity.
class FdcmCrossValidator {
 public:
  FdcmCrossValidator(const Dataset& data, const ForestConfig& forest_config, const CvConfig& cv,
                     bool shared_forests = false);

  std::vector<FoldPair> fold_pairs(std::span<const double> u) const;

  /// Grid spans [0, max |off-diagonal| of full_raw].
  LambdaSelection select(const Matrix& full_raw, std::span<const double> u, const ThresholdRule& rule) const;

  std::size_t fold_count() const noexcept { return folds_.size(); }

 private:
  struct Fold {
    Dataset train;
    Dataset held_out;
    FdcmForests forests;
    // leaf id of every held-out row, per tree
    std::vector<std::vector<std::size_t>> held_mean_leaves;
    std::vector<std::vector<std::size_t>> held_second_leaves;
  };

  CvConfig cv_;
  std::vector<Fold> folds_;
};

/// Routes the rows of `rows` through each tree; weight of row i is the
/// average over trees (with at least one co-leaf row) of 1/count for rows
/// sharing u's leaf. Falls back to uniform weights when no tree has a match.
WeightVector routed_weights(const Forest& forest, std::span<const std::vector<std::size_t>> row_leaves,
                            std::size_t row_count, std::span<const double> u);

/// Per-tree leaf ids for every row of `data`.
std::vector<std::vector<std::size_t>> route_rows(const Forest& forest, const Dataset& data);

/// One-shot lambda selection at u: builds the fold forests from the
/// configuration of `forests` (with the reduced CV tree count).
LambdaSelection select_lambda(const Dataset& data, const FdcmForests& forests, std::span<const double> u,
                              const ThresholdRule& rule, std::size_t folds = 5, std::size_t grid_size = 20);

}  // namespace fdcm
