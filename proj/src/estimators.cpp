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

#include "fdcm/estimators.hpp"

#include <charconv>
#include <stdexcept>

namespace fdcm {

MethodSpec MethodSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  std::string_view family = text.substr(0, colon);
  MethodSpec spec;
  if (colon != std::string_view::npos) spec.rule = ThresholdRule::parse(text.substr(colon + 1));
  if (family == "identity") {
    spec.family = Family::Identity;
    return spec;
  }
  if (family.size() > 1 && family.front() == 'm') {
    const auto rest = family.substr(1);
    if (rest == "fdcm" || rest == "static" || rest.starts_with("kernel")) {
      spec.modified = true;
      family = rest;
    }
  }
  if (family == "fdcm") {
    spec.family = Family::Fdcm;
  } else if (family == "static") {
    spec.family = Family::Static;
  } else if (family.starts_with("kernel")) {
    spec.family = Family::Kernel;
    const auto digits = family.substr(6);
    std::size_t j = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), j);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || j < 1) {
      throw std::invalid_argument("kernel method needs a 1-based covariate index, e.g. kernel1");
    }
    spec.covariate = j;
  } else {
    throw std::invalid_argument("unknown method '" + std::string(text) + "'");
  }
  return spec;
}

std::string MethodSpec::label() const {
  std::string base;
  switch (family) {
    case Family::Identity: return "identity";
    case Family::Fdcm: base = "fdcm"; break;
    case Family::Static: base = "static"; break;
    case Family::Kernel: base = "kernel" + std::to_string(covariate); break;
  }
  return (modified ? "m" : "") + base + ":" + rule.to_string();
}

std::string MethodSpec::fit_key() const {
  MethodSpec plain = *this;
  plain.modified = false;
  return plain.label();
}

std::vector<MethodSpec> parse_methods(std::string_view comma_separated) {
  std::vector<MethodSpec> out;
  while (!comma_separated.empty()) {
    const auto comma = comma_separated.find(',');
    auto token = comma_separated.substr(0, comma);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) out.push_back(MethodSpec::parse(token));
    if (comma == std::string_view::npos) break;
    comma_separated.remove_prefix(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument("no methods given");
  return out;
}

FittedMethod::FittedMethod(const MethodSpec& spec, const Dataset& data, const EstimatorSettings& settings)
    : spec_(spec), data_(data), settings_(settings) {
  switch (spec_.family) {
    case MethodSpec::Family::Fdcm: {
      forests_ = train_fdcm(data_, settings_.forest, settings_.shared_forests, settings_.second_moment_trees);
      validator_ = std::make_unique<FdcmCrossValidator>(data_, settings_.forest, settings_.cv,
                                                        settings_.shared_forests);
      if (settings_.shared_lambda) {
        std::vector<double> centroid(data_.d(), 0.0);
        for (std::size_t i = 0; i < data_.n(); ++i) {
          for (std::size_t j = 0; j < data_.d(); ++j) centroid[j] += data_.u(i, j);
        }
        for (auto& c : centroid) c /= static_cast<double>(data_.n());
        shared_lambda_ = validator_->select(raw_cov(*forests_, data_, centroid).matrix, centroid, spec_.rule);
      }
      break;
    }
    case MethodSpec::Family::Static:
      static_ = static_baseline(data_, spec_.rule, settings_.cv);
      break;
    case MethodSpec::Family::Kernel:
      if (spec_.covariate > data_.d()) {
        throw std::invalid_argument("kernel covariate " + std::to_string(spec_.covariate) + " exceeds d = " +
                                    std::to_string(data_.d()));
      }
      break;
    case MethodSpec::Family::Identity:
      break;
  }
}

FittedMethod::~FittedMethod() = default;
FittedMethod::FittedMethod(FittedMethod&&) noexcept = default;

PointEstimate FittedMethod::estimate(std::span<const double> u, bool with_correction) const {
  if (u.size() != data_.d()) throw std::invalid_argument("query point has the wrong length");
  PointEstimate out;
  switch (spec_.family) {
    case MethodSpec::Family::Fdcm: {
      out.raw = raw_cov(*forests_, data_, u).matrix;
      out.lambda = shared_lambda_ ? *shared_lambda_ : validator_->select(out.raw, u, spec_.rule);
      out.thresholded = threshold_offdiagonal(out.raw, out.lambda.lambda, spec_.rule);
      break;
    }
    case MethodSpec::Family::Static:
      out.raw = static_->raw;
      out.lambda = static_->lambda;
      out.thresholded = static_->thresholded;
      break;
    case MethodSpec::Family::Kernel: {
      auto k = kernel_dcm_baseline(data_, spec_.covariate - 1, u, spec_.rule, settings_.cv);
      out.raw = std::move(k.raw);
      out.lambda = std::move(k.lambda);
      out.thresholded = std::move(k.thresholded);
      break;
    }
    case MethodSpec::Family::Identity: {
      const auto p = static_cast<Eigen::Index>(data_.p());
      out.raw = Matrix::Identity(p, p);
      out.thresholded = out.raw;
      out.lambda = LambdaSelection{0.0, {0.0}, {0.0}};
      break;
    }
  }
  if (with_correction) {
    DynCovEstimate est{std::vector<double>(u.begin(), u.end()), out.thresholded, Stage::Thresholded};
    auto [corrected, info] = pd_correct(est, settings_.c_n);
    out.corrected = std::move(corrected.matrix);
    out.pd = info;
  }
  return out;
}

}  // namespace fdcm
