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

#include "fdcm/thresholding.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fdcm/dataset.hpp"
#include "fdcm/kernels.hpp"

namespace fdcm {

ThresholdRule ThresholdRule::scad(double a) {
  if (!(a > 2.0)) throw std::invalid_argument("SCAD parameter a must exceed 2");
  return {Kind::Scad, a};
}

ThresholdRule ThresholdRule::adaptive_lasso(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("adaptive lasso parameter eta must be positive");
  return {Kind::AdaptiveLasso, eta};
}

ThresholdRule ThresholdRule::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  std::optional<double> param;
  if (colon != std::string_view::npos) {
    param = parse_double(text.substr(colon + 1));
    if (!param) throw std::invalid_argument("bad threshold rule parameter in '" + std::string(text) + "'");
  }
  if (name == "hard" && !param) return hard();
  if ((name == "soft" || name == "lasso") && !param) return soft();
  if (name == "scad") return scad(param.value_or(3.7));
  if (name == "alasso") return adaptive_lasso(param.value_or(3.0));
  throw std::invalid_argument("unknown threshold rule '" + std::string(text) +
                              "' (expected hard | soft | scad[:a] | alasso[:eta])");
}

std::string ThresholdRule::to_string() const {
  // shortest text that parses back to the same parameter
  char buf[32];
  const auto shortest = [&] { return std::string(buf, std::to_chars(buf, buf + sizeof buf, param).ptr); };
  switch (kind) {
    case Kind::Hard: return "hard";
    case Kind::Soft: return "soft";
    case Kind::Scad: return "scad:" + shortest();
    case Kind::AdaptiveLasso: return "alasso:" + shortest();
  }
  return "unknown";
}

namespace {

double raw_shrink(double z, double lambda, const ThresholdRule& rule) {
  const double az = std::abs(z);
  if (az <= lambda) return 0.0;
  const double sign = z < 0.0 ? -1.0 : 1.0;
  switch (rule.kind) {
    case ThresholdRule::Kind::Hard:
      return z;
    case ThresholdRule::Kind::Soft:
      return sign * (az - lambda);
    case ThresholdRule::Kind::Scad: {
      const double a = rule.param;
      if (az <= 2.0 * lambda) return sign * (az - lambda);
      if (az <= a * lambda) return ((a - 1.0) * z - sign * a * lambda) / (a - 2.0);
      return z;
    }
    case ThresholdRule::Kind::AdaptiveLasso: {
      const double eta = rule.param;
      const double cut = lambda * std::pow(lambda / az, eta);
      return sign * std::max(az - cut, 0.0);
    }
  }
  return z;
}

}  // namespace

double shrink(double z, double lambda, const ThresholdRule& rule) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("threshold lambda must be nonnegative");
  double s = raw_shrink(z, lambda, rule);
  // Rounding in |z| - lambda can land one ulp outside the shrinkage laws;
  // step back towards z (or 0) until they hold in floating point.
  for (int guard = 0; guard < 4 && std::abs(s - z) > lambda; ++guard) s = std::nextafter(s, z);
  for (int guard = 0; guard < 4 && std::abs(s) > std::abs(z); ++guard) s = std::nextafter(s, 0.0);
  return s;
}

Matrix threshold_offdiagonal(const Matrix& m, double lambda, const ThresholdRule& rule) {
  Matrix out = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < c; ++r) {
      const double s = shrink(m(r, c), lambda, rule);
      out(r, c) = s;
      out(c, r) = s;
    }
  }
  return out;
}

DynCovEstimate apply_threshold(const DynCovEstimate& est, double lambda, const ThresholdRule& rule) {
  if (est.stage != Stage::Raw) throw std::invalid_argument("apply_threshold expects a raw estimate");
  DynCovEstimate out;
  out.u = est.u;
  out.matrix = threshold_offdiagonal(est.matrix, lambda, rule);
  out.stage = Stage::Thresholded;
  return out;
}

double max_abs_offdiagonal(const Matrix& m) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < c; ++r) best = std::max(best, std::abs(m(r, c)));
  }
  return best;
}

std::vector<double> lambda_grid(double max_offdiag, std::size_t size) {
  std::vector<double> grid{0.0};
  if (!(max_offdiag > 0.0) || size == 0) return grid;
  const double lo = std::log(max_offdiag * 1e-3);
  const double hi = std::log(max_offdiag);
  for (std::size_t g = 0; g < size; ++g) {
    const double t = size == 1 ? 1.0 : static_cast<double>(g) / static_cast<double>(size - 1);
    grid.push_back(g + 1 == size ? max_offdiag : std::exp(lo + t * (hi - lo)));
  }
  return grid;
}

LambdaSelection select_from_folds(std::span<const FoldPair> folds, std::vector<double> grid,
                                  const ThresholdRule& rule) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  if (folds.empty()) throw std::invalid_argument("no cross-validation folds");
  LambdaSelection sel;
  sel.cv_scores.assign(grid.size(), 0.0);
  for (const auto& fold : folds) {
    const auto count = static_cast<std::size_t>(fold.train.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Matrix shrunk = threshold_offdiagonal(fold.train, grid[g], rule);
      sel.cv_scores[g] += kernels::squared_distance(std::span<const double>(shrunk.data(), count),
                                                    std::span<const double>(fold.held_out.data(), count));
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    sel.cv_scores[g] /= static_cast<double>(folds.size());
    if (sel.cv_scores[g] < sel.cv_scores[best]) best = g;
  }
  sel.lambda = grid[best];
  sel.grid = std::move(grid);
  return sel;
}

double default_c_n(const Matrix& m) {
  const double top = m.size() == 0 ? 0.0 : m.diagonal().maxCoeff();
  return top > 0.0 ? 1e-4 * top : 1e-4;
}

double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
  return solver.eigenvalues()(0);
}

namespace {

void check_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < c; ++r) {
      if (std::abs(m(r, c) - m(c, r)) > 1e-10 * scale) {
        throw std::invalid_argument("matrix is not symmetric (entry " + std::to_string(r) + "," +
                                    std::to_string(c) + ")");
      }
    }
  }
}

}  // namespace

std::pair<DynCovEstimate, PDCorrection> pd_correct(const DynCovEstimate& est, std::optional<double> c_n) {
  check_symmetric(est.matrix);
  PDCorrection info;
  info.c_n = c_n.value_or(default_c_n(est.matrix));
  if (!(info.c_n > 0.0)) throw std::invalid_argument("c_n must be positive");
  info.min_eigenvalue = min_eigenvalue(est.matrix);
  DynCovEstimate out;
  out.u = est.u;
  out.matrix = est.matrix;
  out.stage = Stage::PDCorrected;
  if (info.min_eigenvalue < info.c_n) {
    info.delta_hat = std::max(0.0, -info.min_eigenvalue);
    info.applied = true;
    out.matrix.diagonal().array() += info.delta_hat + info.c_n;
  }
  return {std::move(out), info};
}

Matrix precision(const DynCovEstimate& est) {
  if (est.stage != Stage::PDCorrected) throw std::invalid_argument("precision expects a PD-corrected estimate");
  Eigen::LLT<Matrix> llt(est.matrix);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("Cholesky factorization failed: estimate is not positive definite");
  }
  const auto p = est.matrix.rows();
  const Matrix identity = Matrix::Identity(p, p);
  Matrix inv = llt.solve(identity);
  // one step of iterative refinement
  inv += llt.solve(identity - est.matrix * inv);
  return (0.5 * (inv + inv.transpose())).eval();
}

}  // namespace fdcm
