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

#include "fdcm/simulation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fdcm/kernels.hpp"

namespace fdcm {

void ModelSpec::validate() const {
  if (p < 1 || n < 1 || d < 1) throw std::invalid_argument("model dimensions p, d, n must be positive");
  if ((id == ModelId::M2 || id == ModelId::M4) && d < 2) {
    throw std::invalid_argument("models 2 and 4 read u1 and u2, so d must be at least 2");
  }
  if ((id == ModelId::M3 || id == ModelId::M4) && p < 3) {
    throw std::invalid_argument("models 3 and 4 are banded and need p >= 3");
  }
}

ModelId parse_model_id(int number) {
  if (number < 1 || number > 4) throw std::invalid_argument("model must be 1, 2, 3 or 4");
  return static_cast<ModelId>(number);
}

double std_normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

namespace {

// exp{-(x - c)^2 / (w^2 - (x - c)^2)}, zero where the denominator vanishes.
double bump(double x, double centre, double half_width) {
  const double dx2 = (x - centre) * (x - centre);
  const double denom = half_width * half_width - dx2;
  if (!(denom > 0.0)) return 0.0;
  return std::exp(-dx2 / denom);
}

bool within(double x, double lo, double hi) { return lo <= x && x <= hi; }

// Band entries of the varying-sparsity structure; `a` drives scale and bumps,
// `b` only enters the support indicators (pass a again for the one-variable model).
double band_entry(double a, double b, std::size_t gap) {
  double inner = 0.0;
  if (gap == 0) {
    inner = 1.0;
  } else if (gap == 1) {
    if (within(a, -0.5, 1.0) && within(b, -0.5, 1.0)) inner = 0.5 * bump(a, 0.25, 0.75);
  } else if (gap == 2) {
    if (within(a, 0.3, 1.0) && within(b, 0.3, 1.0)) inner = 0.4 * bump(a, 0.65, 0.35);
  }
  return inner == 0.0 ? 0.0 : std::exp(2.0 * a) * inner;
}

}  // namespace

Matrix true_cov(const ModelSpec& model, std::span<const double> u) {
  model.validate();
  if (u.size() != model.d) {
    throw std::invalid_argument("covariate vector has length " + std::to_string(u.size()) + ", model expects " +
                                std::to_string(model.d));
  }
  const auto p = static_cast<Eigen::Index>(model.p);
  Matrix sigma(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index r = 0; r < p; ++r) {
      const auto gap = static_cast<std::size_t>(std::abs(j - r));
      double v = 0.0;
      switch (model.id) {
        case ModelId::M1:
          v = std::exp(u[0]) * std::pow(std_normal_pdf(u[0]), static_cast<double>(gap));
          break;
        case ModelId::M2:
          v = std::exp(u[0] + u[1]) * std::pow(std_normal_pdf(u[0] / 2.0 + u[1] / 2.0), static_cast<double>(gap));
          break;
        case ModelId::M3:
          v = band_entry(u[0], u[0], gap);
          break;
        case ModelId::M4:
          v = 0.5 * band_entry(u[0], u[1], gap) + 0.5 * band_entry(u[1], u[0], gap);
          break;
      }
      sigma(j, r) = v;
    }
  }
  return sigma;
}

Dataset sample_dataset(const ModelSpec& model, Rng& rng) {
  model.validate();
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t p = model.p;
  std::vector<double> y;
  std::vector<double> u;
  y.reserve(model.n * p);
  u.reserve(model.n * model.d);
  std::vector<double> ui(model.d);
  Vector z(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < model.n; ++i) {
    for (auto& v : ui) v = unif(rng);
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
    Eigen::LLT<Matrix> llt(true_cov(model, ui));
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("true covariance is not positive definite at a sampled covariate");
    }
    const Vector yi = llt.matrixL() * z;
    u.insert(u.end(), ui.begin(), ui.end());
    y.insert(y.end(), yi.data(), yi.data() + yi.size());
  }
  return Dataset(std::move(y), std::move(u), p, model.d);
}

Losses losses(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("losses: dimension mismatch");
  }
  const auto count = static_cast<std::size_t>(estimate.size());
  Losses out;
  out.frobenius = std::sqrt(kernels::squared_distance(std::span<const double>(estimate.data(), count),
                                                      std::span<const double>(truth.data(), count)));
  const Matrix diff = estimate - truth;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("losses: eigensolver failed");
  out.spectral = solver.eigenvalues().cwiseAbs().maxCoeff();
  return out;
}

SparsityRates sparsity_rates(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("sparsity_rates: dimension mismatch");
  }
  std::size_t true_nonzero = 0, hits = 0, true_zero = 0, false_hits = 0;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    for (Eigen::Index r = 0; r < truth.rows(); ++r) {
      const bool est_nz = estimate(r, c) != 0.0;
      if (truth(r, c) != 0.0) {
        ++true_nonzero;
        hits += est_nz;
      } else {
        ++true_zero;
        false_hits += est_nz;
      }
    }
  }
  SparsityRates out;
  out.tpr = true_nonzero == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(true_nonzero);
  out.fpr = true_zero == 0 ? 0.0 : static_cast<double>(false_hits) / static_cast<double>(true_zero);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

std::vector<std::vector<double>> fixed_test_points(std::size_t d, std::size_t count, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::TestPoints, d);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::vector<double>> points(count, std::vector<double>(d));
  for (auto& pt : points) {
    for (auto& v : pt) v = unif(rng);
  }
  return points;
}

std::vector<std::vector<double>> load_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  bool header_seen = false;
  std::size_t width = 0;
  std::size_t row = 0;
  std::vector<std::vector<double>> points;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      width = cells.size();
      continue;
    }
    ++row;
    if (cells.size() != width) throw DataError("ragged row", row, std::min(cells.size(), width) + 1);
    std::vector<double> pt;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v) throw DataError("non-numeric cell '" + cells[c] + "'", row, c + 1);
      pt.push_back(*v);
    }
    points.push_back(std::move(pt));
  }
  if (points.empty()) throw DataError("'" + path.string() + "' contains no points");
  return points;
}

void write_points_csv(const std::filesystem::path& path, std::span<const std::vector<double>> points) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  const std::size_t d = points.empty() ? 0 : points.front().size();
  for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << "u" << j + 1;
  out << '\n';
  for (const auto& pt : points) {
    for (std::size_t j = 0; j < pt.size(); ++j) out << (j ? "," : "") << format_double(pt[j]);
    out << '\n';
  }
}

}  // namespace fdcm
