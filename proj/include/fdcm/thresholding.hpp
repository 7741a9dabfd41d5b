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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fdcm/covariance.hpp"

namespace fdcm {

/// Generalized shrinkage rule s_lambda. Every rule satisfies, for all z and
/// lambda >= 0: |s(z)| <= |z|, s(z) = 0 when |z| <= lambda, |s(z) - z| <= lambda.
struct ThresholdRule {
  enum class Kind { Hard, Soft, Scad, AdaptiveLasso };

  Kind kind = Kind::Soft;
  double param = 0.0;  ///< SCAD a (> 2) or adaptive-lasso eta (> 0)

  static ThresholdRule hard() { return {Kind::Hard, 0.0}; }
  static ThresholdRule soft() { return {Kind::Soft, 0.0}; }
  static ThresholdRule scad(double a = 3.7);
  static ThresholdRule adaptive_lasso(double eta = 3.0);

  /// hard | soft | scad[:a] | alasso[:eta]
  static ThresholdRule parse(std::string_view text);
  std::string to_string() const;
};

double shrink(double z, double lambda, const ThresholdRule& rule);

/// Shrinks off-diagonal entries; the diagonal is copied unchanged.
Matrix threshold_offdiagonal(const Matrix& m, double lambda, const ThresholdRule& rule);

/// Requires a Raw estimate; returns the Thresholded one.
DynCovEstimate apply_threshold(const DynCovEstimate& est, double lambda, const ThresholdRule& rule);

double max_abs_offdiagonal(const Matrix& m);

/// 0 followed by `size` log-spaced values ending at max_offdiag (starting at
/// max_offdiag * 1e-3). Degenerates to {0} when max_offdiag <= 0.
std::vector<double> lambda_grid(double max_offdiag, std::size_t size);

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> cv_scores;  ///< aligned with grid
};

/// A training-side raw estimate and the matching held-out raw estimate for one fold.
struct FoldPair {
  Matrix train;
  Matrix held_out;
};

/// Mean over folds of ||s_lambda(train) - held_out||_F^2 for each grid value;
/// picks the first minimiser.
LambdaSelection select_from_folds(std::span<const FoldPair> folds, std::vector<double> grid,
                                  const ThresholdRule& rule);

struct PDCorrection {
  double delta_hat = 0.0;       ///< max(0, -min eigenvalue)
  double c_n = 0.0;
  bool applied = false;
  double min_eigenvalue = 0.0;  ///< before correction
};

/// 1e-4 times the largest diagonal entry (1e-4 when that is not positive).
double default_c_n(const Matrix& m);

double min_eigenvalue(const Matrix& symmetric);

/// Adds (delta_hat + c_n) I when the smallest eigenvalue is below c_n, so the
/// output's smallest eigenvalue is at least c_n. Throws on asymmetric input.
std::pair<DynCovEstimate, PDCorrection> pd_correct(const DynCovEstimate& est, std::optional<double> c_n = {});

/// Inverse through a Cholesky factorization. Requires a PDCorrected estimate.
Matrix precision(const DynCovEstimate& est);

}  // namespace fdcm
