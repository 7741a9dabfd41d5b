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
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "fdcm/estimators.hpp"

namespace fdcm::cli {

/// Every tunable of every subcommand. Flags and config-file keys share names.
struct RunConfig {
  std::uint64_t seed = 1;
  unsigned workers = 1;

  // forest
  std::size_t trees = 500;
  std::size_t sm_trees = 0;  ///< 0: 4 x trees for simulate, trees otherwise
  std::size_t subsample = 0;
  std::size_t min_leaf = 5;
  double omega = 0.05;
  double random_split_prob = 0.05;
  std::size_t mtry = 0;
  bool shared_forests = false;

  // tuning
  std::size_t cv_folds = 5;
  std::size_t cv_grid = 20;
  std::size_t cv_trees = 0;
  bool shared_lambda = false;
  double c_n = 0.0;  ///< 0: 1e-4 x largest diagonal entry

  // simulate / generate
  int model = 1;
  std::size_t p = 100;
  std::size_t d = 10;
  std::size_t n = 100;
  std::size_t reps = 50;
  std::string methods = "fdcm:soft,static:soft";
  std::string test_points;

  // data layout
  std::string response_cols;
  std::string covariate_cols;
  std::string date_col;
  std::size_t lag = 0;
  bool unit_cube = false;

  // estimate / backtest
  std::string method;
  std::string stage = "corrected";
  std::size_t window = 100;
  std::size_t stride = 1;
};

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

void add_forest_options(CLI::App& app, RunConfig& cfg);
void add_tuning_options(CLI::App& app, RunConfig& cfg);
void add_layout_options(CLI::App& app, RunConfig& cfg);

/// Settings shared by the estimators; `benchmark` selects the larger
/// second-moment forest default.
EstimatorSettings estimator_settings(const RunConfig& cfg, bool benchmark);

ConfigEntries forest_entries(const RunConfig& cfg);
ConfigEntries tuning_entries(const RunConfig& cfg);
ConfigEntries layout_entries(const RunConfig& cfg);

/// "key=value" lines for embedding in output artifacts.
std::vector<std::string> render(const ConfigEntries& entries);

std::string to_text(double v);
std::vector<std::string> split_list(const std::string& text);

}  // namespace fdcm::cli
