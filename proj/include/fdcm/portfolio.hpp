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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdcm/estimators.hpp"
#include "fdcm/simulation.hpp"

namespace fdcm {

/// Global minimum-variance weights Sigma^{-1} 1 / (1' Sigma^{-1} 1), renormalised
/// so they sum to 1. Throws std::invalid_argument unless sigma is symmetric PD.
Vector min_var_weights(const Matrix& sigma);

struct BacktestConfig {
  MethodSpec method;
  std::size_t window = 100;
  std::size_t stride = 1;  ///< refit every `stride` days, re-querying in between
  std::uint64_t seed = 1;
  EstimatorSettings settings;  ///< forest/cv seeds are overwritten per refit
  unsigned workers = 1;
};

struct BacktestDay {
  std::size_t row = 0;  ///< panel row whose response the weights are applied to
  std::string label;
  std::vector<double> weights;
  double portfolio_return = 0.0;
  bool corrected = false;  ///< PD correction changed the estimate
  double lambda = 0.0;
};

struct Performance {
  double avr = 0.0;  ///< mean * 252
  double std = 0.0;  ///< sd (n - 1) * sqrt(252)
  double ir = 0.0;
  bool ir_defined = false;
};

struct BacktestResult {
  std::vector<BacktestDay> days;
  Performance performance;
  std::vector<std::string> warnings;

  std::vector<double> daily_returns() const;
};

inline constexpr double kTradingDays = 252.0;

Performance performance(const std::vector<double>& daily_returns);

/// Row i of `panel` pairs the covariates known at the close of one day with the
/// asset returns of the next. For every row i >= window the method is fitted
/// on rows [f - window, f), f <= i the latest refit row, queried at u(i), and
/// the resulting weights are applied to y(i). Refit f is seeded from
/// derive_seed(seed, Backtest, f), so truncating the panel never changes
/// earlier weights.
BacktestResult backtest(const Dataset& panel, const BacktestConfig& config);

/// T rows: U_t ~ Unif[-1, 1]^d and Y_t ~ N(0, true_cov(model, U_t)); labels day0001...
Dataset synthetic_panel(const ModelSpec& model, std::size_t rows, std::uint64_t seed);

void write_daily_returns_csv(std::ostream& out, const BacktestResult& result);
void write_weights_csv(std::ostream& out, const BacktestResult& result, const std::vector<std::string>& asset_names);
/// "AVR=...% STD=...% IR=..." (IR=undefined when STD is zero).
std::string summary_line(const Performance& perf);

}  // namespace fdcm
