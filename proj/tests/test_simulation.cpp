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
#include <numbers>
#include <random>

#include "doctest.h"
#include "fdcm/baselines.hpp"
#include "fdcm/experiment.hpp"
#include "fdcm/simulation.hpp"

using namespace fdcm;

namespace {

std::vector<double> random_u(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> u(d);
  for (auto& v : u) v = unif(rng);
  return u;
}

}  // namespace

TEST_CASE("true_cov closed-form values") {
  const ModelSpec m1{ModelId::M1, 3, 2, 10};
  const auto s = true_cov(m1, std::vector<double>{0.0, 0.7});
  const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 1) == doctest::Approx(0.39894).epsilon(1e-5));
  CHECK(s(0, 1) == doctest::Approx(phi0));
  CHECK(s(0, 2) == doctest::Approx(phi0 * phi0));
  CHECK(s(0, 2) == doctest::Approx(0.15915).epsilon(1e-4));

  const ModelSpec m3{ModelId::M3, 6, 1, 10};
  const auto band = true_cov(m3, std::vector<double>{-0.9});
  CHECK((band - std::exp(-1.8) * Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);

  const ModelSpec m4{ModelId::M4, 6, 3, 10};
  const ModelSpec m3b{ModelId::M3, 6, 3, 10};
  for (double a : {-0.7, 0.1, 0.4, 0.6, 0.95}) {
    const std::vector<double> u{a, a, 0.2};
    CHECK((true_cov(m4, u) - true_cov(m3b, u)).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("true_cov is symmetric positive definite on random points") {
  std::mt19937_64 rng(10);
  for (auto id : {ModelId::M1, ModelId::M2, ModelId::M3, ModelId::M4}) {
    const ModelSpec m{id, 30, 4, 10};
    for (int k = 0; k < 200; ++k) {
      const auto s = true_cov(m, random_u(4, rng));
      REQUIRE(s == s.transpose());
      REQUIRE(min_eigenvalue(s) > 0.0);
    }
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(parse_model_id(9), std::invalid_argument);
  CHECK_THROWS_AS((ModelSpec{ModelId::M2, 5, 1, 10}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ModelSpec{ModelId::M1, 0, 1, 10}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(true_cov(ModelSpec{ModelId::M1, 3, 2, 10}, std::vector<double>{0.0}), std::invalid_argument);
}

TEST_CASE("sample_dataset is reproducible and stays on the cube") {
  const ModelSpec m{ModelId::M2, 5, 3, 50};
  Rng a(4);
  Rng b(4);
  const auto x = sample_dataset(m, a);
  CHECK(x.fingerprint() == sample_dataset(m, b).fingerprint());
  for (double v : x.covariates()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("sample moments converge to the averaged true covariance") {
  const ModelSpec m{ModelId::M1, 3, 1, 100000};
  Rng rng(77);
  const auto data = sample_dataset(m, rng);
  Matrix empirical = Matrix::Zero(3, 3);
  Matrix expected = Matrix::Zero(3, 3);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Eigen::Map<const Vector> y(data.y(i).data(), 3);
    empirical += y * y.transpose();
    expected += true_cov(m, data.u(i));
  }
  for (Eigen::Index j = 0; j < 3; ++j) {
    for (Eigen::Index r = 0; r < 3; ++r) {
      const double scale = std::sqrt(expected(j, j) * expected(r, r));
      CHECK(std::abs(empirical(j, r) - expected(j, r)) <= 0.02 * scale);
    }
  }
}

TEST_CASE("losses") {
  const Matrix t = Matrix::Identity(4, 4);
  auto l = losses(t, t);
  CHECK(l.frobenius == 0.0);
  CHECK(l.spectral == 0.0);
  Matrix e = Matrix::Zero(2, 2);
  e(0, 0) = 3.0;
  l = losses(e, Matrix::Zero(2, 2));
  CHECK(l.frobenius == doctest::Approx(3.0));
  CHECK(l.spectral == doctest::Approx(3.0));
  l = losses(2.0 * t, t);
  CHECK(l.frobenius == doctest::Approx(2.0));
  CHECK(l.spectral == doctest::Approx(1.0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int k = 0; k < 100; ++k) {
    Matrix a(6, 6);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = g(rng);
    const Matrix s = a + a.transpose();
    const auto ls = losses(s, Matrix::Zero(6, 6));
    CHECK(ls.spectral <= ls.frobenius);
  }
}

TEST_CASE("sparsity_rates") {
  Matrix truth = Matrix::Identity(3, 3);
  truth(0, 1) = truth(1, 0) = 0.5;
  truth(1, 2) = truth(2, 1) = 0.2;
  auto r = sparsity_rates(truth, truth);
  CHECK(r.tpr == 1.0);
  CHECK(r.fpr == 0.0);
  r = sparsity_rates(Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  CHECK(r.tpr == 1.0);
  CHECK(r.fpr == 0.0);
  // Four nonzero off-diagonal entries in truth, two missed.
  Matrix missed = truth;
  missed(1, 2) = missed(2, 1) = 0.0;
  r = sparsity_rates(missed, truth);
  CHECK(r.tpr == doctest::Approx(5.0 / 7.0));
  CHECK(r.fpr == 0.0);
  Matrix extra = truth;
  extra(0, 2) = extra(2, 0) = 0.1;
  r = sparsity_rates(extra, truth);
  CHECK(r.fpr == 1.0);
}

TEST_CASE("median") {
  CHECK(median({1, 2, 3}) == 2.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK(median({7, 7, 7}) == 7.0);
  CHECK_THROWS(median({}));
}

TEST_CASE("checked-in test points match the generator") {
  for (std::size_t d : {10, 20}) {
    const auto stored = load_points_csv(std::string(FDCM_DATA_DIR) + "/test_points_d" + std::to_string(d) + ".csv");
    CHECK(stored == fixed_test_points(d));
    CHECK(stored.size() == kTestPointCount);
  }
}

TEST_CASE("static baseline") {
  const Dataset two({1, -1}, {0.0, 1.0}, 1, 1);
  CHECK(sample_covariance(two)(0, 0) == 1.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> y(40 * 3);
  for (auto& v : y) v = g(rng);
  const Dataset data(y, std::vector<double>(40, 0.0), 3, 1);
  Matrix textbook = Matrix::Zero(3, 3);
  Vector mean = Vector::Zero(3);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 3; ++j) mean(j) += data.y(i)[j] / 40.0;
  }
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t r = 0; r < 3; ++r) textbook(j, r) += (data.y(i)[j] - mean(j)) * (data.y(i)[r] - mean(r)) / 40.0;
    }
  }
  CHECK((sample_covariance(data) - textbook).cwiseAbs().maxCoeff() <= 1e-12);
  const Matrix hard = threshold_offdiagonal(textbook, 1e6, ThresholdRule::hard());
  CHECK(hard.diagonal() == textbook.diagonal());
  CHECK(max_abs_offdiagonal(hard) == 0.0);
  const auto st = static_baseline(data, ThresholdRule::soft(), CvConfig{});
  CHECK(st.thresholded.diagonal() == st.raw.diagonal());
}

TEST_CASE("kernel baseline") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<double> y(60 * 2);
  for (auto& v : y) v = g(rng);
  std::vector<double> u(60 * 2);
  for (std::size_t i = 0; i < 60; ++i) {
    u[2 * i] = 0.5;
    u[2 * i + 1] = static_cast<double>(i) / 60.0;
  }
  const Dataset data(y, u, 2, 2);
  const std::vector<double> q{0.5, 0.3};
  const KernelDcm flat(data, 0);
  CHECK((flat.raw(q) - sample_covariance(data)).cwiseAbs().maxCoeff() <= 1e-12);

  const KernelDcm local(data, 1, 0.1);
  for (const auto& [i, w] : local.weights(q).entries) CHECK(std::abs(data.u(i, 1) - 0.3) <= 0.1);
  const KernelDcm wide(data, 1, 1e6);
  CHECK((wide.raw(q) - sample_covariance(data)).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(rule_of_thumb_bandwidth(std::vector<double>{1.0, 2.0, 3.0}) > 0.0);
  CHECK(epanechnikov(0.0) == 0.75);
  CHECK(epanechnikov(1.5) == 0.0);
}

TEST_CASE("run_experiment single replication") {
  ExperimentConfig cfg;
  cfg.model = ModelSpec{ModelId::M3, 8, 2, 60};
  cfg.reps = 1;
  cfg.methods = parse_methods("static:soft");
  cfg.test_points = fixed_test_points(2, 5);
  const auto report = run_experiment(cfg);
  REQUIRE(report.methods.size() == 1);
  CHECK(report.methods[0].mfl.size() == 1);
  CHECK(summarize(report.methods[0].mfl).sd == 0.0);
  CHECK(report.has_sparsity);
  CHECK(report.spectral_violations == 0);
  CHECK(report.evaluated_pairs == 5);
}

TEST_CASE("run_experiment is reproducible and worker-independent") {
  ExperimentConfig cfg;
  cfg.model = ModelSpec{ModelId::M1, 6, 3, 60};
  cfg.reps = 3;
  cfg.methods = parse_methods("fdcm:soft,mfdcm:soft,static:hard,kernel1:soft");
  cfg.test_points = fixed_test_points(3, 4);
  cfg.settings.forest.num_trees = 20;
  cfg.settings.cv.trees = 10;
  cfg.seed = 5;
  const auto a = run_experiment(cfg);
  cfg.workers = 3;
  const auto b = run_experiment(cfg);
  REQUIRE(a.methods.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a.methods[k].label == b.methods[k].label);
    CHECK(a.methods[k].mfl == b.methods[k].mfl);
    CHECK(a.methods[k].msl == b.methods[k].msl);
  }
  CHECK(a.spectral_violations == 0);
}
