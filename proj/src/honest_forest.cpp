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

#include "fdcm/honest_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fdcm/kernels.hpp"
#include "fdcm/parallel.hpp"

namespace fdcm {

ForestConfig ForestConfig::resolved(std::size_t n, std::size_t d) const {
  ForestConfig out = *this;
  if (out.subsample_size == 0) out.subsample_size = (n + 1) / 2;
  if (out.mtry == 0) out.mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  if (out.num_trees < 1) throw std::invalid_argument("forest needs at least one tree");
  if (out.subsample_size < 2) throw std::invalid_argument("subsample size must be at least 2");
  if (out.subsample_size > n) {
    throw std::invalid_argument("subsample size " + std::to_string(out.subsample_size) +
                                " exceeds the number of observations " + std::to_string(n));
  }
  if (out.min_leaf < 1) throw std::invalid_argument("minimum leaf size k must be at least 1");
  if (!(out.omega > 0.0 && out.omega <= 0.2)) throw std::invalid_argument("omega must lie in (0, 0.2]");
  if (!(out.random_split_prob > 0.0 && out.random_split_prob <= 1.0)) {
    throw std::invalid_argument("random split probability must lie in (0, 1]");
  }
  if (out.mtry < 1 || out.mtry > d) throw std::invalid_argument("mtry must lie in [1, d]");
  return out;
}

std::size_t Tree::leaf_of(std::span<const double> u) const {
  std::size_t node = 0;
  while (!nodes[node].is_leaf()) {
    const auto& nd = nodes[node];
    node = u[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return node;
}

std::span<const std::size_t> Tree::leaf_members(std::size_t node) const {
  const auto& nd = nodes[node];
  return std::span<const std::size_t>(leaf_samples).subspan(nd.leaf_begin, nd.leaf_end - nd.leaf_begin);
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& nd) {
    return nd.is_leaf();
  }));
}

double WeightVector::operator[](std::size_t i) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), i,
                                   [](const auto& e, std::size_t idx) { return e.first < idx; });
  return it != entries.end() && it->first == i ? it->second : 0.0;
}

double WeightVector::sum() const {
  double s = 0.0;
  for (const auto& [i, w] : entries) s += w;
  return s;
}

std::vector<double> WeightVector::dense() const {
  std::vector<double> out(n, 0.0);
  for (const auto& [i, w] : entries) out[i] = w;
  return out;
}

Forest::Forest(ForestConfig config, ResponseKind kind, std::vector<Tree> trees, std::size_t n, std::size_t d,
               std::uint64_t fingerprint)
    : config_(std::move(config)), kind_(kind), trees_(std::move(trees)), n_(n), d_(d), fingerprint_(fingerprint) {}

std::vector<std::size_t> subsample(std::size_t n, std::size_t s, Rng& rng) {
  if (s > n) {
    throw std::invalid_argument("cannot draw a subsample of " + std::to_string(s) + " from " + std::to_string(n));
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // partial Fisher-Yates
  for (std::size_t i = 0; i < s; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(s);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_sample(std::span<const std::size_t> indices,
                                                                           Rng& rng) {
  if (indices.size() < 2) throw std::invalid_argument("split_sample needs at least two indices");
  std::vector<std::size_t> shuffled(indices.begin(), indices.end());
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(shuffled[i], shuffled[pick(rng)]);
  }
  const std::size_t half = (shuffled.size() + 1) / 2;
  std::vector<std::size_t> first(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<std::size_t> second(shuffled.begin() + static_cast<std::ptrdiff_t>(half), shuffled.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {std::move(first), std::move(second)};
}

double delta_criterion(std::span<const double> sum1, double n1, std::span<const double> sum2, double n2,
                       double n_parent) {
  if (sum1.size() != sum2.size()) throw std::invalid_argument("delta_criterion: target length mismatch");
  double dist = 0.0;
  for (std::size_t k = 0; k < sum1.size(); ++k) {
    const double diff = sum1[k] / n1 - sum2[k] / n2;
    dist += diff * diff;
  }
  return dist * n1 * n2 / (n_parent * n_parent);
}

double target_inner_product(ResponseKind kind, std::span<const double> a, std::span<const double> b) {
  const double ip = kernels::dot(a, b);
  return kind == ResponseKind::SecondMoment ? ip * ip : ip;
}

std::vector<double> target_gram(const Dataset& data, ResponseKind kind, std::span<const std::size_t> rows) {
  const std::size_t m = rows.size();
  std::vector<double> gram(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      const double g = target_inner_product(kind, data.y(rows[a]), data.y(rows[b]));
      gram[a * m + b] = g;
      gram[b * m + a] = g;
    }
  }
  return gram;
}

void center_gram(std::span<double> gram, std::size_t m) {
  if (m == 0) return;
  std::vector<double> row_mean(m, 0.0);
  double grand = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < m; ++b) s += gram[a * m + b];
    row_mean[a] = s / static_cast<double>(m);
    grand += s;
  }
  grand /= static_cast<double>(m) * static_cast<double>(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      const double c = gram[a * m + b] - row_mean[a] - row_mean[b] + grand;
      gram[a * m + b] = c;
      gram[b * m + a] = c;
    }
  }
}

GramSweep::GramSweep(std::span<const double> gram, std::size_t m) : gram_(gram), m_(m), row_sums_(m, 0.0) {
  if (gram.size() != m * m) throw std::invalid_argument("GramSweep: gram must be m x m");
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < m; ++b) s += gram[a * m + b];
    row_sums_[a] = s;
    total_ += s;
  }
  left_.reserve(m);
}

void GramSweep::move_left(std::size_t local) {
  const double* row = gram_.data() + local * m_;
  double cross = 0.0;
  for (auto i : left_) cross += row[i];
  left_left_ += 2.0 * cross + row[local];
  left_rows_ += row_sums_[local];
  left_.push_back(local);
}

double GramSweep::delta() const {
  const double n1 = static_cast<double>(left_count());
  const double n2 = static_cast<double>(right_count());
  const double np = n1 + n2;
  const double a11 = left_left_;
  const double a12 = left_rows_ - left_left_;
  const double a22 = total_ - a11 - 2.0 * a12;
  // ||S1/n1 - S2/n2||^2 * n1 n2 / nP^2
  const double dist = a11 / (n1 * n1) + a22 / (n2 * n2) - 2.0 * a12 / (n1 * n2);
  return std::max(0.0, dist * n1 * n2 / (np * np));
}

namespace {

struct Point {
  double x;
  std::size_t local;  // position in the node's J1 list when is_j1
  bool is_j1;
};

// Scans one feature. `node_gram` is the centred Gram over the node's J1 rows.
void scan_feature(const Dataset& data, std::size_t feature, std::span<const std::size_t> j1,
                  std::span<const std::size_t> j2, std::span<const double> node_gram, std::size_t min_child,
                  std::vector<Point>& points, std::optional<Split>& best) {
  points.clear();
  for (std::size_t a = 0; a < j1.size(); ++a) points.push_back({data.u(j1[a], feature), a, true});
  for (auto i : j2) points.push_back({data.u(i, feature), 0, false});
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.is_j1 != b.is_j1) return a.is_j1;
    return a.local < b.local;
  });

  GramSweep sweep(node_gram, j1.size());
  std::size_t j2_left = 0;
  const std::size_t j2_total = j2.size();
  std::size_t pos = 0;
  while (pos < points.size()) {
    const double x = points[pos].x;
    for (; pos < points.size() && points[pos].x == x; ++pos) {
      if (points[pos].is_j1) {
        sweep.move_left(points[pos].local);
      } else {
        ++j2_left;
      }
    }
    if (pos == points.size()) break;
    if (sweep.left_count() == 0 || sweep.right_count() == 0) continue;
    if (j2_left < min_child || j2_total - j2_left < min_child) continue;
    const double next = points[pos].x;
    double threshold = x + (next - x) / 2.0;
    if (!(threshold < next)) threshold = x;
    const double delta = sweep.delta();
    // Strict comparison: features arrive in ascending order and thresholds
    // ascend within a feature, so ties keep the lowest (feature, threshold).
    if (!best || delta > best->delta) best = Split{feature, threshold, delta};
  }
}

std::size_t min_child_size(std::size_t node_j2, const ForestConfig& config) {
  const auto by_fraction = static_cast<std::size_t>(std::ceil(config.omega * static_cast<double>(node_j2)));
  return std::max(config.min_leaf, by_fraction);
}

std::optional<Split> find_split(const Dataset& data, std::span<const std::size_t> j1,
                                std::span<const std::size_t> j2, std::span<const double> node_gram,
                                const ForestConfig& config, Rng& rng) {
  const std::size_t d = data.d();
  std::vector<std::size_t> features;
  std::bernoulli_distribution coin(config.random_split_prob);
  if (coin(rng)) {
    std::uniform_int_distribution<std::size_t> pick(0, d - 1);
    features.push_back(pick(rng));
  } else {
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < config.mtry; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, d - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    features.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(config.mtry));
    std::sort(features.begin(), features.end());
  }

  if (j1.size() < 2 || j2.size() < 2 * config.min_leaf) return std::nullopt;
  const std::size_t min_child = min_child_size(j2.size(), config);
  std::optional<Split> best;
  std::vector<Point> points;
  points.reserve(j1.size() + j2.size());
  for (auto f : features) scan_feature(data, f, j1, j2, node_gram, min_child, points, best);
  return best;
}

bool covariates_identical(const Dataset& data, std::span<const std::size_t> j1, std::span<const std::size_t> j2) {
  const std::size_t first = j1.empty() ? j2.front() : j1.front();
  auto same = [&](std::size_t i) {
    for (std::size_t f = 0; f < data.d(); ++f) {
      if (data.u(i, f) != data.u(first, f)) return false;
    }
    return true;
  };
  return std::all_of(j1.begin(), j1.end(), same) && std::all_of(j2.begin(), j2.end(), same);
}

}  // namespace

std::optional<Split> best_split(const Dataset& data, ResponseKind kind, std::span<const std::size_t> j1,
                                std::span<const std::size_t> j2, const ForestConfig& config, Rng& rng) {
  auto gram = target_gram(data, kind, j1);
  center_gram(gram, j1.size());
  return find_split(data, j1, j2, gram, config, rng);
}

Tree grow_tree(const Dataset& data, std::span<const std::size_t> j1, std::span<const std::size_t> j2,
               ResponseKind kind, const ForestConfig& config, Rng& rng) {
  if (j2.size() < config.min_leaf) {
    throw std::invalid_argument("honest half has " + std::to_string(j2.size()) +
                                " samples, fewer than the minimum leaf size " + std::to_string(config.min_leaf));
  }
  Tree tree;
  tree.j1.assign(j1.begin(), j1.end());
  tree.j2.assign(j2.begin(), j2.end());

  // Gram over the tree's J1 rows (positions follow tree.j1); node Grams are
  // centred sub-blocks of it.
  const std::size_t m1 = tree.j1.size();
  const auto tree_gram = target_gram(data, kind, tree.j1);

  struct Pending {
    std::size_t node;
    std::vector<std::size_t> j1_pos;  // positions into tree.j1
    std::vector<std::size_t> j2;
  };
  std::vector<Pending> stack;
  std::vector<std::size_t> root_pos(m1);
  std::iota(root_pos.begin(), root_pos.end(), std::size_t{0});
  tree.nodes.emplace_back();
  stack.push_back({0, std::move(root_pos), tree.j2});

  std::vector<double> node_gram;
  std::vector<std::size_t> j1_rows;
  while (!stack.empty()) {
    Pending work = std::move(stack.back());
    stack.pop_back();

    j1_rows.clear();
    for (auto a : work.j1_pos) j1_rows.push_back(tree.j1[a]);
    const std::size_t m = work.j1_pos.size();
    node_gram.assign(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) node_gram[a * m + b] = tree_gram[work.j1_pos[a] * m1 + work.j1_pos[b]];
    }
    center_gram(node_gram, m);

    std::optional<Split> split;
    if (!covariates_identical(data, j1_rows, work.j2)) {
      split = find_split(data, j1_rows, work.j2, node_gram, config, rng);
    }

    if (!split) {
      auto& leaf = tree.nodes[work.node];
      leaf.feature = TreeNode::kLeaf;
      leaf.leaf_begin = static_cast<std::uint32_t>(tree.leaf_samples.size());
      tree.leaf_samples.insert(tree.leaf_samples.end(), work.j2.begin(), work.j2.end());
      leaf.leaf_end = static_cast<std::uint32_t>(tree.leaf_samples.size());
      leaf.oversized = work.j2.size() >= 2 * config.min_leaf;
      continue;
    }

    Pending left{0, {}, {}};
    Pending right{0, {}, {}};
    for (auto a : work.j1_pos) {
      (data.u(tree.j1[a], split->feature) <= split->threshold ? left : right).j1_pos.push_back(a);
    }
    for (auto i : work.j2) (data.u(i, split->feature) <= split->threshold ? left : right).j2.push_back(i);

    left.node = tree.nodes.size();
    right.node = left.node + 1;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& parent = tree.nodes[work.node];
    parent.feature = static_cast<std::int32_t>(split->feature);
    parent.threshold = split->threshold;
    parent.left = static_cast<std::uint32_t>(left.node);
    parent.right = static_cast<std::uint32_t>(right.node);
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return tree;
}

Forest train_forest(const Dataset& data, const ForestConfig& config, ResponseKind kind) {
  const ForestConfig cfg = config.resolved(data.n(), data.d());
  if (cfg.subsample_size / 2 < cfg.min_leaf) {
    throw std::invalid_argument("subsample size " + std::to_string(cfg.subsample_size) +
                                " leaves fewer than k = " + std::to_string(cfg.min_leaf) +
                                " honest samples per tree");
  }
  std::vector<Tree> trees(cfg.num_trees);
  parallel_for(cfg.num_trees, cfg.workers, [&](std::size_t b) {
    Rng rng = make_rng(cfg.seed, Stream::Tree, b);
    const auto drawn = subsample(data.n(), cfg.subsample_size, rng);
    auto [j1, j2] = split_sample(drawn, rng);
    trees[b] = grow_tree(data, j1, j2, kind, cfg, rng);
  });
  return Forest(cfg, kind, std::move(trees), data.n(), data.d(), data.fingerprint());
}

WeightVector weight_vector(const Forest& forest, std::span<const double> u) {
  if (u.size() != forest.d()) {
    throw std::invalid_argument("query point has length " + std::to_string(u.size()) + ", forest expects " +
                                std::to_string(forest.d()));
  }
  const double num_trees = static_cast<double>(forest.trees().size());
  std::vector<double> dense(forest.n(), 0.0);
  std::vector<bool> touched(forest.n(), false);
  for (const auto& tree : forest.trees()) {
    const auto members = tree.leaf_members(tree.leaf_of(u));
    if (members.empty()) continue;
    const double share = 1.0 / (num_trees * static_cast<double>(members.size()));
    for (auto i : members) {
      dense[i] += share;
      touched[i] = true;
    }
  }
  WeightVector out;
  out.n = forest.n();
  double total = 0.0;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (touched[i]) {
      out.entries.emplace_back(i, dense[i]);
      total += dense[i];
    }
  }
  // Trees with an empty leaf at u (not possible under the leaf-size bound)
  // would leave mass missing; renormalise only in that case.
  if (!out.entries.empty() && std::abs(total - 1.0) > 1e-9) {
    for (auto& e : out.entries) e.second /= total;
  }
  return out;
}

}  // namespace fdcm
