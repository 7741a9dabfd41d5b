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

#include <span>
#include <vector>

#include "fdcm/covariance.hpp"
#include "fdcm/lambda_cv.hpp"
#include "fdcm/thresholding.hpp"

namespace fdcm {

/// Sample covariance with denominator n.
Matrix sample_covariance(const Dataset& data);

struct StaticEstimate {
  Matrix raw;
  Matrix thresholded;
  LambdaSelection lambda;
};

/// Thresholded sample covariance (ignores the covariates). Lambda is chosen
/// by V-fold CV: complement sample covariance vs held-out sample covariance.
StaticEstimate static_baseline(const Dataset& data, const ThresholdRule& rule, const CvConfig& cv);

/// Epanechnikov kernel 0.75 (1 - t^2) on |t| <= 1.
double epanechnikov(double t) noexcept;

/// Rule-of-thumb bandwidth 1.06 * sd * n^(-1/5).
double rule_of_thumb_bandwidth(std::span<const double> values);

/// Nadaraya-Watson weights on one covariate, used for both the mean and the
/// second moment. `covariate` is 0-based here.
class KernelDcm {
 public:
  KernelDcm(const Dataset& data, std::size_t covariate, double bandwidth = 0.0);

  double bandwidth() const noexcept { return bandwidth_; }
  std::size_t covariate() const noexcept { return covariate_; }

  /// Widens the bandwidth (x2, up to 10 times) when no point falls inside the
  /// kernel support, then throws std::runtime_error.
  WeightVector weights(std::span<const double> u) const;
  Matrix raw(std::span<const double> u) const;
  const Dataset& data() const noexcept { return data_; }

 private:
  const Dataset& data_;
  std::size_t covariate_;
  double bandwidth_;
};

/// Kernel estimator with CV-selected lambda at u (complement vs held-out
/// kernel estimates, each with its own rule-of-thumb bandwidth).
struct KernelEstimate {
  Matrix raw;
  Matrix thresholded;
  LambdaSelection lambda;
};

KernelEstimate kernel_dcm_baseline(const Dataset& data, std::size_t covariate, std::span<const double> u,
                                   const ThresholdRule& rule, const CvConfig& cv);

}  // namespace fdcm
