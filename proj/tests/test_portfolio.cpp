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

#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fdcm/portfolio.hpp"

using namespace fdcm;

namespace {

Dataset constant_panel(std::size_t rows, std::size_t p, double r) {
  std::vector<double> y(rows * p, r);
  std::vector<double> u(rows);
  for (std::size_t t = 0; t < rows; ++t) u[t] = std::sin(static_cast<double>(t));
  return Dataset(std::move(y), std::move(u), p, 1);
}

Matrix random_spd(std::size_t p, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(p, p);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = g(rng);
  return a * a.transpose() + 0.1 * Matrix::Identity(p, p);
}

}  // namespace

TEST_CASE("min_var_weights closed forms") {
  auto w = min_var_weights(Matrix::Identity(2, 2));
  CHECK(w(0) == 0.5);
  CHECK(w(1) == 0.5);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 4.0;
  w = min_var_weights(d);
  CHECK(w(0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(w(1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(w.sum() == 1.0);
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(min_var_weights(bad), std::invalid_argument);
}

TEST_CASE("min_var_weights beats random budget portfolios") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const Matrix sigma = random_spd(4, rng);
  const Vector w = min_var_weights(sigma);
  const double best = w.dot(sigma * w);
  for (int k = 0; k < 1000; ++k) {
    Vector v(4);
    for (Eigen::Index j = 0; j < 4; ++j) v(j) = g(rng);
    v(3) = 1.0 - v.head(3).sum();
    CHECK(best <= v.dot(sigma * v) + 1e-12);
  }
}

TEST_CASE("min_var_weights scale invariance") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const Matrix sigma = random_spd(6, rng);
    const Vector w = min_var_weights(sigma);
    for (double c : {2.0, 0.5, 1024.0, 0.0078125}) CHECK(min_var_weights(c * sigma) == w);
    for (double c : {3.0, 0.7, 1e5}) CHECK((min_var_weights(c * sigma) - w).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("performance arithmetic") {
  auto perf = performance(std::vector<double>(10, 0.0));
  CHECK(perf.avr == 0.0);
  CHECK(perf.std == 0.0);
  CHECK_FALSE(perf.ir_defined);
  std::vector<double> alt;
  for (int i = 0; i < 10; ++i) alt.push_back(i % 2 == 0 ? 1.0 : -1.0);
  perf = performance(alt);
  CHECK(perf.avr == 0.0);
  CHECK(perf.std == doctest::Approx(std::sqrt(252.0) * std::sqrt(10.0 / 9.0)));
  CHECK(perf.ir_defined);
  perf = performance(std::vector<double>(20, 0.0243));
  CHECK(perf.avr == doctest::Approx(6.1236));
  CHECK(summary_line(performance({1.0, 2.0})).starts_with("AVR=378.00% STD="));
  CHECK(summary_line(performance({0.0, 0.0})).ends_with("IR=undefined"));
  CHECK_THROWS_AS(performance({1.0}), std::invalid_argument);
}

TEST_CASE("identity estimator gives the equal-weight portfolio") {
  const ModelSpec model{ModelId::M1, 2, 1, 0};
  const auto panel = synthetic_panel(model, 40, 3);
  BacktestConfig cfg;
  cfg.method = MethodSpec::parse("identity");
  cfg.window = 10;
  const auto result = backtest(panel, cfg);
  REQUIRE(result.days.size() == 30);
  for (const auto& day : result.days) {
    CHECK(day.weights == std::vector<double>{0.5, 0.5});
    const auto y = panel.y(day.row);
    CHECK(day.portfolio_return == 0.5 * y[0] + 0.5 * y[1]);
  }
}

TEST_CASE("constant returns pass straight through") {
  const auto panel = constant_panel(60, 3, 0.37);
  for (const auto* method : {"mstatic:soft", "mfdcm:soft", "mkernel1:hard"}) {
    CAPTURE(method);
    BacktestConfig cfg;
    cfg.method = MethodSpec::parse(method);
    cfg.window = 30;
    cfg.stride = 10;
    cfg.settings.forest.num_trees = 10;
    cfg.settings.cv.trees = 5;
    const auto result = backtest(panel, cfg);
    CHECK(result.days.size() == 30);
    for (const auto& day : result.days) CHECK(day.portfolio_return == doctest::Approx(0.37).epsilon(1e-14));
  }
}

TEST_CASE("backtest contracts") {
  const ModelSpec model{ModelId::M1, 6, 2, 0};
  const auto panel = synthetic_panel(model, 120, 8);
  BacktestConfig cfg;
  cfg.method = MethodSpec::parse("mfdcm:soft");
  cfg.window = 60;
  cfg.stride = 7;
  cfg.settings.forest.num_trees = 20;
  cfg.settings.cv.trees = 10;
  const auto full = backtest(panel, cfg);
  CHECK(full.days.size() == 60);
  for (const auto& day : full.days) {
    double s = 0.0;
    for (double w : day.weights) s += w;
    CHECK(std::abs(s - 1.0) <= 1e-10);
  }

  // Truncating the panel after row t leaves every earlier day unchanged.
  std::vector<std::size_t> head(95);
  std::iota(head.begin(), head.end(), std::size_t{0});
  const auto truncated = backtest(panel.subset(head), cfg);
  REQUIRE(truncated.days.size() == 35);
  for (std::size_t k = 0; k < truncated.days.size(); ++k) {
    CHECK(truncated.days[k].weights == full.days[k].weights);
  }

  cfg.workers = 4;
  const auto threaded = backtest(panel, cfg);
  for (std::size_t k = 0; k < full.days.size(); ++k) CHECK(threaded.days[k].weights == full.days[k].weights);

  cfg.window = 120;
  CHECK_THROWS_AS(backtest(panel, cfg), std::invalid_argument);

  // window < p: the raw sample covariance is singular, lambda pinned to 0
  const auto wide = synthetic_panel(ModelSpec{ModelId::M1, 16, 2, 0}, 40, 2);
  cfg.window = 12;
  cfg.settings.cv.grid_size = 0;
  cfg.method = MethodSpec::parse("static:soft");
  CHECK_THROWS_AS(backtest(wide, cfg), std::runtime_error);
  cfg.method = MethodSpec::parse("mstatic:soft");
  const auto small_window = backtest(wide, cfg);
  CHECK_FALSE(small_window.warnings.empty());
  CHECK(small_window.days.size() == 28);

  auto shuffled = panel;
  std::swap(shuffled.row_labels[10], shuffled.row_labels[11]);
  CHECK_THROWS_AS(backtest(shuffled, cfg), std::invalid_argument);
}
