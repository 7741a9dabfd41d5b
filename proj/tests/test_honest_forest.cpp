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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "fdcm/honest_forest.hpp"

using namespace fdcm;

namespace {

Dataset random_dataset(std::size_t n, std::size_t p, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> y(n * p);
  std::vector<double> u(n * d);
  for (auto& v : u) v = unif(rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) y[i * p + j] = g(rng) * std::exp(u[i * d]);
  }
  return Dataset(std::move(y), std::move(u), p, d);
}

bool same_structure(const Tree& a, const Tree& b) {
  if (a.nodes.size() != b.nodes.size() || a.leaf_samples != b.leaf_samples) return false;
  for (std::size_t k = 0; k < a.nodes.size(); ++k) {
    const auto& x = a.nodes[k];
    const auto& y = b.nodes[k];
    if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left || x.right != y.right ||
        x.leaf_begin != y.leaf_begin || x.leaf_end != y.leaf_end) {
      return false;
    }
  }
  return true;
}

// J2 count beneath every node, gathered by routing J2 through the tree.
std::vector<std::size_t> j2_counts(const Tree& tree, const Dataset& data) {
  std::vector<std::size_t> counts(tree.nodes.size(), 0);
  for (auto i : tree.j2) {
    std::size_t node = 0;
    for (;;) {
      ++counts[node];
      const auto& nd = tree.nodes[node];
      if (nd.is_leaf()) break;
      node = data.u(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left : nd.right;
    }
  }
  return counts;
}

}  // namespace

TEST_CASE("subsample") {
  Rng rng(1);
  CHECK(subsample(5, 5, rng) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  Rng a(7);
  Rng b(7);
  const auto first = subsample(10, 4, a);
  CHECK(first == subsample(10, 4, b));
  CHECK(std::set<std::size_t>(first.begin(), first.end()).size() == 4);
  CHECK_THROWS_AS(subsample(3, 4, rng), std::invalid_argument);
}

TEST_CASE("split_sample halves") {
  Rng rng(2);
  const std::vector<std::size_t> six{0, 1, 2, 3, 4, 5};
  auto [a, b] = split_sample(six, rng);
  CHECK(a.size() == 3);
  CHECK(b.size() == 3);
  const std::vector<std::size_t> seven{10, 11, 12, 13, 14, 15, 16};
  auto [c, e] = split_sample(seven, rng);
  CHECK(c.size() == 4);
  CHECK(e.size() == 3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto drawn = subsample(50, 5 + static_cast<std::size_t>(trial), rng);
    auto [x, y] = split_sample(drawn, rng);
    std::vector<std::size_t> merged;
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(merged));
    CHECK(merged == drawn);
    CHECK(merged.size() == x.size() + y.size());
  }
}

TEST_CASE("delta_criterion hand values") {
  const std::vector<double> s1{0.0};
  const std::vector<double> s2{4.0};
  CHECK(delta_criterion(s1, 2, s2, 2, 4) == doctest::Approx(1.0));
  const std::vector<double> m1{2.0, 6.0};
  const std::vector<double> m2{3.0, 9.0};
  CHECK(delta_criterion(m1, 2, m2, 3, 5) == 0.0);
  const std::vector<double> r1{1.0, -2.0, 0.5};
  const std::vector<double> r2{-3.0, 4.0, 2.0};
  CHECK(delta_criterion(r1, 3, r2, 4, 7) == doctest::Approx(delta_criterion(r2, 4, r1, 3, 7)));
}

TEST_CASE("GramSweep agrees with the naive vec(y y^T) criterion") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 4 + static_cast<std::size_t>(trial % 20);
    const std::size_t p = 1 + static_cast<std::size_t>(trial % 9);
    const auto data = random_dataset(m, p, 1, 100 + static_cast<std::uint64_t>(trial));
    std::vector<std::size_t> rows(m);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    for (auto kind : {ResponseKind::Mean, ResponseKind::SecondMoment}) {
      auto gram = target_gram(data, kind, rows);
      center_gram(gram, m);
      GramSweep sweep(gram, m);
      std::vector<double> target_sum_left;
      std::vector<double> target_sum_all;
      auto target = [&](std::size_t i) {
        const auto y = data.y(i);
        return kind == ResponseKind::Mean ? std::vector<double>(y.begin(), y.end()) : vec_outer(y);
      };
      target_sum_all.assign(target(0).size(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const auto t = target(i);
        for (std::size_t k = 0; k < t.size(); ++k) target_sum_all[k] += t[k];
      }
      target_sum_left.assign(target_sum_all.size(), 0.0);
      for (std::size_t left = 1; left < m; ++left) {
        const auto t = target(left - 1);
        for (std::size_t k = 0; k < t.size(); ++k) target_sum_left[k] += t[k];
        sweep.move_left(left - 1);
        std::vector<double> right(target_sum_all.size());
        for (std::size_t k = 0; k < right.size(); ++k) right[k] = target_sum_all[k] - target_sum_left[k];
        const double naive = delta_criterion(target_sum_left, static_cast<double>(left), right,
                                             static_cast<double>(m - left), static_cast<double>(m));
        const double scale = std::max(1.0, std::abs(naive));
        CHECK(std::abs(sweep.delta() - naive) <= 1e-9 * scale);
      }
    }
  }
}

TEST_CASE("best_split separates a step in one feature") {
  // J1 targets {0, 0, 10, 10} at u = .1 .2 .8 .9, J2 spread on both sides.
  std::vector<double> y{0, 0, 10, 10, 1, 1, 1, 1, 1, 1};
  std::vector<double> u{.1, .2, .8, .9, .05, .15, .25, .75, .85, .95};
  const Dataset data(y, u, 1, 1);
  const std::vector<std::size_t> j1{0, 1, 2, 3};
  const std::vector<std::size_t> j2{4, 5, 6, 7, 8, 9};
  ForestConfig cfg;
  cfg.min_leaf = 1;
  cfg.mtry = 1;
  Rng rng(1);
  const auto split = best_split(data, ResponseKind::Mean, j1, j2, cfg, rng);
  REQUIRE(split);
  CHECK(split->feature == 0);
  CHECK(split->threshold > 0.2);
  CHECK(split->threshold < 0.8);
  CHECK(split->delta == doctest::Approx(25.0));
}

TEST_CASE("best_split ties pick the lowest feature then the lowest threshold") {
  const std::size_t n = 12;
  std::vector<double> y(n, 3.0);
  std::vector<double> u;
  for (std::size_t i = 0; i < n; ++i) {
    u.push_back(static_cast<double>(i));
    u.push_back(static_cast<double>(n - i));
  }
  const Dataset data(y, u, 1, 2);
  std::vector<std::size_t> j1{0, 2, 4, 6, 8, 10};
  std::vector<std::size_t> j2{1, 3, 5, 7, 9, 11};
  ForestConfig cfg;
  cfg.min_leaf = 2;
  cfg.mtry = 2;
  cfg.random_split_prob = 1e-12;
  Rng rng(3);
  const auto split = best_split(data, ResponseKind::Mean, j1, j2, cfg, rng);
  REQUIRE(split);
  CHECK(split->delta == 0.0);
  CHECK(split->feature == 0);
  // smallest threshold leaving two J2 samples (u = 1, 3) on the left
  CHECK(split->threshold == 3.5);
}

TEST_CASE("best_split refuses nodes below 2k honest samples") {
  const auto data = random_dataset(30, 2, 2, 4);
  ForestConfig cfg;
  cfg.min_leaf = 5;
  cfg.mtry = 2;
  std::vector<std::size_t> j1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::size_t> j2{10, 11, 12, 13, 14, 15, 16, 17, 18};  // 2k - 1
  Rng rng(1);
  CHECK_FALSE(best_split(data, ResponseKind::Mean, j1, j2, cfg, rng));
}

TEST_CASE("grow_tree forced leaf and depth-one tree") {
  const auto data = random_dataset(20, 2, 1, 6);
  ForestConfig cfg;
  cfg.min_leaf = 5;
  cfg.mtry = 1;
  std::vector<std::size_t> j1{0, 1, 2, 3, 4};
  std::vector<std::size_t> j2{5, 6, 7, 8, 9};
  Rng rng(1);
  const auto tree = grow_tree(data, j1, j2, ResponseKind::SecondMoment, cfg, rng);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.leaf_members(0).size() == 5);

  std::vector<double> y{0, 0, 10, 10, 1, 1, 1, 1, 1, 1};
  std::vector<double> u{.1, .2, .8, .9, .05, .15, .25, .75, .85, .95};
  const Dataset step(y, u, 1, 1);
  ForestConfig small;
  small.min_leaf = 3;
  small.mtry = 1;
  Rng rng2(1);
  const auto stump = grow_tree(step, std::vector<std::size_t>{0, 1, 2, 3},
                               std::vector<std::size_t>{4, 5, 6, 7, 8, 9}, ResponseKind::Mean, small, rng2);
  CHECK(stump.nodes.size() == 3);
  CHECK(stump.leaf_count() == 2);
  CHECK_THROWS_AS(grow_tree(data, j1, std::vector<std::size_t>{5, 6}, ResponseKind::Mean, cfg, rng),
                  std::invalid_argument);
}

TEST_CASE("tree growth never reads honest responses") {
  auto base = random_dataset(80, 3, 3, 8);
  Rng draw(4);
  const auto drawn = subsample(80, 60, draw);
  auto [j1, j2] = split_sample(drawn, draw);
  std::vector<double> y(base.responses().begin(), base.responses().end());
  for (auto i : j2) {
    for (std::size_t j = 0; j < 3; ++j) y[i * 3 + j] = 0.0;
  }
  const Dataset zeroed(y, std::vector<double>(base.covariates().begin(), base.covariates().end()), 3, 3);
  ForestConfig cfg;
  cfg.min_leaf = 3;
  cfg.mtry = 2;
  cfg.random_split_prob = 0.3;
  for (auto kind : {ResponseKind::Mean, ResponseKind::SecondMoment}) {
    Rng a(11);
    Rng b(11);
    CHECK(same_structure(grow_tree(base, j1, j2, kind, cfg, a), grow_tree(zeroed, j1, j2, kind, cfg, b)));
  }
}

TEST_CASE("regularity and leaf-size invariants hold on every tree") {
  const auto data = random_dataset(200, 4, 3, 12);
  ForestConfig cfg;
  cfg.num_trees = 40;
  cfg.seed = 9;
  for (auto kind : {ResponseKind::Mean, ResponseKind::SecondMoment}) {
    const auto forest = train_forest(data, cfg, kind);
    for (const auto& tree : forest.trees()) {
      const auto counts = j2_counts(tree, data);
      for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        const auto& nd = tree.nodes[k];
        if (nd.is_leaf()) {
          CHECK(counts[k] == tree.leaf_members(k).size());
          CHECK(counts[k] >= cfg.min_leaf);
          if (!nd.oversized) CHECK(counts[k] <= 2 * cfg.min_leaf - 1);
        } else {
          const auto need = std::max<std::size_t>(
              cfg.min_leaf, static_cast<std::size_t>(std::ceil(cfg.omega * static_cast<double>(counts[k]))));
          CHECK(counts[nd.left] >= need);
          CHECK(counts[nd.right] >= need);
        }
      }
    }
  }
}

TEST_CASE("weight_vector hand cases") {
  // A leaf at the root holding J2 = {3, 7}.
  Tree one;
  one.nodes.resize(1);
  one.leaf_samples = {3, 7};
  one.nodes[0].leaf_end = 2;
  one.j2 = {3, 7};
  const Forest single(ForestConfig{}, ResponseKind::Mean, {one}, 10, 1, 0);
  const std::vector<double> u{0.0};
  auto w = weight_vector(single, u);
  CHECK(w[3] == 0.5);
  CHECK(w[7] == 0.5);
  CHECK(w[0] == 0.0);

  Tree other;
  other.nodes.resize(1);
  other.leaf_samples = {3};
  other.nodes[0].leaf_end = 1;
  other.j2 = {3};
  const Forest pair(ForestConfig{}, ResponseKind::Mean, {other, one}, 10, 1, 0);
  w = weight_vector(pair, u);
  CHECK(w[3] == 0.75);
  CHECK(w[7] == 0.25);
  CHECK(w.sum() == 1.0);
}

TEST_CASE("forests are deterministic and independent of worker count") {
  const auto data = random_dataset(120, 3, 4, 21);
  ForestConfig cfg;
  cfg.num_trees = 100;
  cfg.seed = 77;
  cfg.workers = 1;
  const auto serial = train_forest(data, cfg, ResponseKind::SecondMoment);
  cfg.workers = 8;
  const auto threaded = train_forest(data, cfg, ResponseKind::SecondMoment);
  REQUIRE(serial.trees().size() == 100);
  for (std::size_t b = 0; b < 100; ++b) CHECK(same_structure(serial.trees()[b], threaded.trees()[b]));

  cfg.num_trees = 1;
  CHECK(train_forest(data, cfg, ResponseKind::Mean).trees().size() == 1);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int q = 0; q < 50; ++q) {
    std::vector<double> u(4);
    for (auto& v : u) v = unif(rng);
    const auto w = weight_vector(serial, u);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.dense() == weight_vector(serial, u).dense());
    for (const auto& [i, wi] : w.entries) {
      bool honest = false;
      for (const auto& t : serial.trees()) honest |= std::binary_search(t.j2.begin(), t.j2.end(), i);
      CHECK(honest);
    }
  }
}

TEST_CASE("config validation") {
  const auto data = random_dataset(20, 1, 1, 1);
  ForestConfig cfg;
  cfg.subsample_size = 30;
  CHECK_THROWS_AS(train_forest(data, cfg, ResponseKind::Mean), std::invalid_argument);
  cfg.subsample_size = 8;  // 4 honest samples < k = 5
  CHECK_THROWS_AS(train_forest(data, cfg, ResponseKind::Mean), std::invalid_argument);
  cfg = ForestConfig{};
  cfg.mtry = 3;
  CHECK_THROWS_AS(train_forest(data, cfg, ResponseKind::Mean), std::invalid_argument);
  CHECK_THROWS_AS(weight_vector(train_forest(random_dataset(40, 1, 2, 2), ForestConfig{}, ResponseKind::Mean),
                                std::vector<double>{0.0}),
                  std::invalid_argument);
}
