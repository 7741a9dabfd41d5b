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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fdcm/dataset.hpp"
#include "fdcm/rng.hpp"

namespace fdcm {

/// What the forest's splits try to separate: the response y itself (for the
/// conditional mean) or vec(y y^T) (for the conditional second moment).
enum class ResponseKind : std::uint8_t { Mean = 0, SecondMoment = 1 };

struct ForestConfig {
  std::size_t num_trees = 500;
  std::size_t subsample_size = 0;  ///< 0 selects ceil(n / 2)
  std::size_t min_leaf = 5;        ///< k: each leaf holds k..2k-1 honest (J2) samples
  double omega = 0.05;             ///< each child keeps >= ceil(omega * parent J2) samples
  double random_split_prob = 0.05; ///< pi: chance a split uses one uniformly drawn feature
  std::size_t mtry = 0;            ///< 0 selects ceil(sqrt(d))
  std::uint64_t seed = 1;
  unsigned workers = 1;  ///< build concurrency; does not affect the result

  /// Fills the data-dependent defaults and checks every constraint.
  ForestConfig resolved(std::size_t n, std::size_t d) const;
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;  ///< u[feature] <= threshold goes left
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t leaf_begin = 0;  ///< range into Tree::leaf_samples
  std::uint32_t leaf_end = 0;
  bool oversized = false;  ///< leaf with >= 2k J2 samples because no split was feasible

  bool is_leaf() const noexcept { return feature == kLeaf; }
};

class Tree {
 public:
  std::vector<TreeNode> nodes;              ///< nodes[0] is the root
  std::vector<std::size_t> leaf_samples;    ///< J2 indices grouped by leaf
  std::vector<std::size_t> j1;              ///< split-selection half (sorted)
  std::vector<std::size_t> j2;              ///< estimation half (sorted)

  /// Index of the leaf node reached by u.
  std::size_t leaf_of(std::span<const double> u) const;
  std::span<const std::size_t> leaf_members(std::size_t node) const;
  std::size_t leaf_count() const;
};

/// Sparse nonnegative weights over training rows [0, n).
struct WeightVector {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, double>> entries;  ///< sorted by index, weights > 0

  double operator[](std::size_t i) const;
  double sum() const;
  std::vector<double> dense() const;
};

class Forest {
 public:
  Forest(ForestConfig config, ResponseKind kind, std::vector<Tree> trees, std::size_t n, std::size_t d,
         std::uint64_t fingerprint);

  const ForestConfig& config() const noexcept { return config_; }
  ResponseKind kind() const noexcept { return kind_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  std::uint64_t dataset_fingerprint() const noexcept { return fingerprint_; }

 private:
  ForestConfig config_;
  ResponseKind kind_;
  std::vector<Tree> trees_;
  std::size_t n_;
  std::size_t d_;
  std::uint64_t fingerprint_;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double delta = 0.0;
};

/// Uniform s-subset of [0, n) without replacement, returned sorted.
std::vector<std::size_t> subsample(std::size_t n, std::size_t s, Rng& rng);

/// Random partition into halves of sizes ceil(|I|/2) and floor(|I|/2), each sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_sample(std::span<const std::size_t> indices,
                                                                           Rng& rng);

/// ||sum1/n1 - sum2/n2||^2 * n1 * n2 / nP^2 evaluated on explicit target sums.
double delta_criterion(std::span<const double> sum1, double n1, std::span<const double> sum2, double n2,
                       double n_parent);

/// Inner product of two split targets: y.y' for Mean, (y.y')^2 = <vec(yy^T), vec(y'y'^T)>
/// for SecondMoment.
double target_inner_product(ResponseKind kind, std::span<const double> a, std::span<const double> b);

/// Gram matrix (row-major, m x m) of the split targets of `rows`.
std::vector<double> target_gram(const Dataset& data, ResponseKind kind, std::span<const std::size_t> rows);

/// Double-centres a row-major m x m Gram matrix in place; this is the Gram
/// matrix of the targets minus their mean, which leaves the split criterion
/// unchanged and keeps the expansion well conditioned.
void center_gram(std::span<double> gram, std::size_t m);

/// Evaluates the split criterion for a growing left child using only Gram
/// entries: moving one sample from right to left costs O(|left|), independent
/// of the target dimension.
class GramSweep {
 public:
  GramSweep(std::span<const double> gram, std::size_t m);

  void move_left(std::size_t local);
  std::size_t left_count() const noexcept { return left_.size(); }
  std::size_t right_count() const noexcept { return m_ - left_.size(); }
  /// Requires both children nonempty.
  double delta() const;

 private:
  std::span<const double> gram_;
  std::size_t m_;
  std::vector<double> row_sums_;
  double total_ = 0.0;
  std::vector<std::size_t> left_;
  double left_left_ = 0.0;   ///< sum of gram over left x left
  double left_rows_ = 0.0;   ///< sum of row_sums over left
};

/// Best admissible axis-aligned split of a node, or nullopt when the node
/// must become a leaf. `j1` rows supply targets and covariates; `j2` rows
/// supply covariates only (for the size constraints).
std::optional<Split> best_split(const Dataset& data, ResponseKind kind, std::span<const std::size_t> j1,
                                std::span<const std::size_t> j2, const ForestConfig& config, Rng& rng);

/// Grows one honest tree. J2 responses are never read.
Tree grow_tree(const Dataset& data, std::span<const std::size_t> j1, std::span<const std::size_t> j2,
               ResponseKind kind, const ForestConfig& config, Rng& rng);

/// Tree b draws from make_rng(config.seed, Stream::Tree, b), so the result
/// does not depend on config.workers.
Forest train_forest(const Dataset& data, const ForestConfig& config, ResponseKind kind);

/// Co-leaf frequency weights: tree b adds 1/(B |leaf_b(u) & J2_b|) to each
/// J2 member of u's leaf.
WeightVector weight_vector(const Forest& forest, std::span<const double> u);

}  // namespace fdcm
