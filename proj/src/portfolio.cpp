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

#include "fdcm/portfolio.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "fdcm/parallel.hpp"

namespace fdcm {

Vector min_var_weights(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw std::invalid_argument("min_var_weights: sigma must be a non-empty square matrix");
  }
  const double scale = sigma.cwiseAbs().maxCoeff();
  if (!((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale)) {
    throw std::invalid_argument("min_var_weights: sigma is not symmetric");
  }
  // A power-of-two rescale is exact, so sigma and 2^k sigma give identical weights.
  int exponent = 0;
  std::frexp(sigma.diagonal().cwiseAbs().maxCoeff(), &exponent);
  const Matrix scaled = sigma * std::ldexp(1.0, -exponent);
  Eigen::LLT<Matrix> llt(scaled);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("min_var_weights: sigma is not positive definite");
  const Vector ones = Vector::Ones(sigma.rows());
  Vector w = llt.solve(ones);
  const double total = w.sum();
  if (!(std::isfinite(total) && total != 0.0)) {
    throw std::invalid_argument("min_var_weights: degenerate solution");
  }
  w /= total;
  // Push the rounding residue into the largest entry so the sum is 1 to the last ulp.
  Eigen::Index big = 0;
  w.cwiseAbs().maxCoeff(&big);
  w(big) += 1.0 - w.sum();
  return w;
}

std::vector<double> BacktestResult::daily_returns() const {
  std::vector<double> r;
  r.reserve(days.size());
  for (const auto& d : days) r.push_back(d.portfolio_return);
  return r;
}

Performance performance(const std::vector<double>& daily_returns) {
  if (daily_returns.size() < 2) throw std::invalid_argument("performance needs at least two daily returns");
  const auto n = static_cast<double>(daily_returns.size());
  double mean = 0.0;
  for (double r : daily_returns) mean += r;
  mean /= n;
  double ss = 0.0;
  for (double r : daily_returns) ss += (r - mean) * (r - mean);
  Performance perf;
  perf.avr = mean * kTradingDays;
  perf.std = std::sqrt(ss / (n - 1.0)) * std::sqrt(kTradingDays);
  perf.ir_defined = perf.std > 0.0;
  perf.ir = perf.ir_defined ? perf.avr / perf.std : 0.0;
  return perf;
}

namespace {

struct RefitOutcome {
  std::vector<BacktestDay> days;
};

RefitOutcome run_refit(const Dataset& panel, const BacktestConfig& config, std::size_t fit_row, std::size_t last_row) {
  std::vector<std::size_t> rows(config.window);
  for (std::size_t k = 0; k < config.window; ++k) rows[k] = fit_row - config.window + k;
  const Dataset train = panel.subset(rows);

  EstimatorSettings settings = config.settings;
  const std::uint64_t fit_seed = derive_seed(config.seed, Stream::Backtest, fit_row);
  settings.forest.seed = fit_seed;
  settings.forest.workers = 1;
  settings.cv.seed = derive_seed(fit_seed, Stream::Fold, 0);
  const FittedMethod fitted(config.method, train, settings);

  RefitOutcome out;
  for (std::size_t i = fit_row; i <= last_row; ++i) {
    const auto est = fitted.estimate(panel.u(i), config.method.modified);
    const Matrix& sigma = config.method.modified ? *est.corrected : est.thresholded;
    Vector w;
    try {
      w = min_var_weights(sigma);
    } catch (const std::invalid_argument&) {
      const std::string where = panel.row_labels.empty() ? "row " + std::to_string(i + 1) : panel.row_labels[i];
      throw std::runtime_error("backtest: " + config.method.label() + " estimate for " + where +
                               " is not positive definite; use the PD-corrected variant");
    }
    BacktestDay day;
    day.row = i;
    day.label = panel.row_labels.empty() ? std::to_string(i + 1) : panel.row_labels[i];
    day.weights.assign(w.data(), w.data() + w.size());
    const auto y = panel.y(i);
    double r = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) r += day.weights[j] * y[j];
    day.portfolio_return = r;
    day.corrected = est.pd && est.pd->applied;
    day.lambda = est.lambda.lambda;
    out.days.push_back(std::move(day));
  }
  return out;
}

}  // namespace

BacktestResult backtest(const Dataset& panel, const BacktestConfig& config) {
  if (config.window < 2) throw std::invalid_argument("backtest window must be at least 2");
  if (config.stride < 1) throw std::invalid_argument("backtest stride must be at least 1");
  if (panel.n() <= config.window) {
    throw std::invalid_argument("panel has " + std::to_string(panel.n()) + " rows but the window needs more than " +
                                std::to_string(config.window));
  }
  if (!panel.row_labels.empty()) {
    // Only fixed-width labels (ISO dates, day0001) have a meaningful text order.
    const auto width = panel.row_labels.front().size();
    bool fixed_width = true;
    for (const auto& l : panel.row_labels) fixed_width &= l.size() == width;
    for (std::size_t i = 1; fixed_width && i < panel.n(); ++i) {
      if (!(panel.row_labels[i - 1] < panel.row_labels[i])) {
        throw std::invalid_argument("panel dates are not strictly increasing at " + panel.row_labels[i]);
      }
    }
  }
  BacktestResult result;
  if (config.window < panel.p()) {
    result.warnings.push_back("window " + std::to_string(config.window) + " is smaller than p = " +
                              std::to_string(panel.p()) + "; raw estimates are singular");
  }
  std::vector<std::size_t> fits;
  for (std::size_t f = config.window; f < panel.n(); f += config.stride) fits.push_back(f);

  std::vector<RefitOutcome> outcomes(fits.size());
  parallel_for(fits.size(), config.workers, [&](std::size_t k) {
    const std::size_t last = std::min(fits[k] + config.stride, panel.n()) - 1;
    outcomes[k] = run_refit(panel, config, fits[k], last);
  });
  for (auto& o : outcomes) {
    for (auto& d : o.days) result.days.push_back(std::move(d));
  }
  result.performance = performance(result.daily_returns());
  return result;
}

Dataset synthetic_panel(const ModelSpec& model, std::size_t rows, std::uint64_t seed) {
  ModelSpec shape = model;
  shape.n = rows;
  Rng rng = make_rng(seed, Stream::Data, 0);
  Dataset panel = sample_dataset(shape, rng);
  panel.row_labels.reserve(rows);
  char buf[32];
  for (std::size_t t = 0; t < rows; ++t) {
    std::snprintf(buf, sizeof buf, "day%04zu", t + 1);
    panel.row_labels.emplace_back(buf);
  }
  for (std::size_t j = 0; j < panel.p(); ++j) panel.response_names.push_back("asset" + std::to_string(j + 1));
  for (std::size_t f = 0; f < panel.d(); ++f) panel.covariate_names.push_back("factor" + std::to_string(f + 1));
  return panel;
}

void write_daily_returns_csv(std::ostream& out, const BacktestResult& result) {
  out << "date,return,lambda,pd_corrected\n";
  for (const auto& d : result.days) {
    out << d.label << ',' << format_double(d.portfolio_return) << ',' << format_double(d.lambda) << ','
        << (d.corrected ? 1 : 0) << '\n';
  }
}

void write_weights_csv(std::ostream& out, const BacktestResult& result, const std::vector<std::string>& asset_names) {
  out << "date";
  const std::size_t p = result.days.empty() ? asset_names.size() : result.days.front().weights.size();
  for (std::size_t j = 0; j < p; ++j) {
    out << ',' << (j < asset_names.size() ? asset_names[j] : "asset" + std::to_string(j + 1));
  }
  out << '\n';
  for (const auto& d : result.days) {
    out << d.label;
    for (double w : d.weights) out << ',' << format_double(w);
    out << '\n';
  }
}

std::string summary_line(const Performance& perf) {
  char buf[128];
  if (perf.ir_defined) {
    std::snprintf(buf, sizeof buf, "AVR=%.2f%% STD=%.2f%% IR=%.3f", perf.avr, perf.std, perf.ir);
  } else {
    std::snprintf(buf, sizeof buf, "AVR=%.2f%% STD=%.2f%% IR=undefined", perf.avr, perf.std);
  }
  return buf;
}

}  // namespace fdcm
