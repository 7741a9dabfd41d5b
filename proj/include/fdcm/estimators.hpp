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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdcm/baselines.hpp"
#include "fdcm/covariance.hpp"
#include "fdcm/honest_forest.hpp"
#include "fdcm/lambda_cv.hpp"
#include "fdcm/thresholding.hpp"

namespace fdcm {

/// Estimator descriptor, written `<family>[:<rule>]`:
///   fdcm | mfdcm                forest estimator (m = PD-corrected)
///   static | mstatic            thresholded sample covariance
///   kernel<j> | mkernel<j>      kernel estimator on covariate j (1-based)
///   identity                    Sigma = I (testing aid)
/// and rule is hard | soft | scad[:a] | alasso[:eta] (default soft).
struct MethodSpec {
  enum class Family { Fdcm, Static, Kernel, Identity };

  Family family = Family::Fdcm;
  bool modified = false;
  std::size_t covariate = 1;
  ThresholdRule rule = ThresholdRule::soft();

  static MethodSpec parse(std::string_view text);
  std::string label() const;
  /// Methods that share a fit (and differ only in the PD correction) share this key.
  std::string fit_key() const;
};

std::vector<MethodSpec> parse_methods(std::string_view comma_separated);

struct EstimatorSettings {
  ForestConfig forest;
  std::size_t second_moment_trees = 0;  ///< 0: same as forest.num_trees
  CvConfig cv;
  bool shared_lambda = false;   ///< select lambda once, at the covariate centroid
  bool shared_forests = false;  ///< one forest supplies both weight vectors
  std::optional<double> c_n;
};

struct PointEstimate {
  Matrix raw;
  Matrix thresholded;
  LambdaSelection lambda;
  std::optional<Matrix> corrected;
  std::optional<PDCorrection> pd;
};

/// One method fitted to one dataset, queried at arbitrary covariate points.
/// Holds a reference to `data`, which must outlive it.
class FittedMethod {
 public:
  FittedMethod(const MethodSpec& spec, const Dataset& data, const EstimatorSettings& settings);
  ~FittedMethod();
  FittedMethod(FittedMethod&&) noexcept;
  FittedMethod& operator=(FittedMethod&&) = delete;

  PointEstimate estimate(std::span<const double> u, bool with_correction) const;

  const MethodSpec& spec() const noexcept { return spec_; }
  /// Present for the forest family.
  const FdcmForests* forests() const noexcept { return forests_ ? &*forests_ : nullptr; }

 private:
  MethodSpec spec_;
  const Dataset& data_;
  EstimatorSettings settings_;
  std::optional<FdcmForests> forests_;
  std::unique_ptr<FdcmCrossValidator> validator_;
  std::optional<StaticEstimate> static_;
  std::optional<LambdaSelection> shared_lambda_;
};

}  // namespace fdcm
