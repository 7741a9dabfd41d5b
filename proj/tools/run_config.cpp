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

#include "run_config.hpp"

#include <charconv>

namespace fdcm::cli {

std::string to_text(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void add_forest_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--trees", cfg.trees, "Trees per forest (B)")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--sm-trees", cfg.sm_trees, "Trees in the second-moment forest (0: automatic)")
      ->capture_default_str();
  app.add_option("--subsample", cfg.subsample, "Subsample size s (0: ceil(n/2))")->capture_default_str();
  app.add_option("--min-leaf", cfg.min_leaf, "Minimum honest samples per leaf (k)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--omega", cfg.omega, "Split balance fraction")->check(CLI::Range(0.0, 0.5))->capture_default_str();
  app.add_option("--random-split-prob", cfg.random_split_prob, "Chance of a single random split feature")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--mtry", cfg.mtry, "Features tried per greedy split (0: ceil(sqrt(d)))")->capture_default_str();
  app.add_flag("--shared-forests", cfg.shared_forests, "Use one forest for both weight vectors");
}

void add_tuning_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--cv-folds", cfg.cv_folds, "Cross-validation folds")->check(CLI::Range(2, 100))->capture_default_str();
  app.add_option("--cv-grid", cfg.cv_grid, "Log-spaced lambda grid size")->check(CLI::Range(1, 10000))
      ->capture_default_str();
  app.add_option("--cv-trees", cfg.cv_trees, "Trees per fold forest (0: automatic)")->capture_default_str();
  app.add_flag("--shared-lambda", cfg.shared_lambda, "Select lambda once at the covariate centroid");
  app.add_option("--c-n", cfg.c_n, "PD floor (0: 1e-4 x largest diagonal entry)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void add_layout_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--response-cols", cfg.response_cols, "Response columns: names, positions or ranges like 2-21")
      ->required();
  app.add_option("--covariate-cols", cfg.covariate_cols, "Covariate columns: names, positions or ranges")
      ->required();
  app.add_option("--date-col", cfg.date_col, "Row label column");
  app.add_option("--lag", cfg.lag, "Pair covariate row t with response row t + lag")->capture_default_str();
  app.add_flag("--unit-cube", cfg.unit_cube, "Rescale covariates onto [0, 1]^d");
}

EstimatorSettings estimator_settings(const RunConfig& cfg, bool benchmark) {
  EstimatorSettings s;
  s.forest.num_trees = cfg.trees;
  s.forest.subsample_size = cfg.subsample;
  s.forest.min_leaf = cfg.min_leaf;
  s.forest.omega = cfg.omega;
  s.forest.random_split_prob = cfg.random_split_prob;
  s.forest.mtry = cfg.mtry;
  s.forest.seed = cfg.seed;
  s.forest.workers = cfg.workers;
  s.second_moment_trees = cfg.sm_trees != 0 ? cfg.sm_trees : (benchmark ? 4 * cfg.trees : cfg.trees);
  s.cv.folds = cfg.cv_folds;
  s.cv.grid_size = cfg.cv_grid;
  s.cv.trees = cfg.cv_trees;
  s.cv.seed = cfg.seed;
  s.shared_lambda = cfg.shared_lambda;
  s.shared_forests = cfg.shared_forests;
  if (cfg.c_n > 0.0) s.c_n = cfg.c_n;
  return s;
}

ConfigEntries forest_entries(const RunConfig& cfg) {
  return {{"trees", std::to_string(cfg.trees)},
          {"sm-trees", std::to_string(cfg.sm_trees)},
          {"subsample", std::to_string(cfg.subsample)},
          {"min-leaf", std::to_string(cfg.min_leaf)},
          {"omega", to_text(cfg.omega)},
          {"random-split-prob", to_text(cfg.random_split_prob)},
          {"mtry", std::to_string(cfg.mtry)},
          {"shared-forests", cfg.shared_forests ? "true" : "false"}};
}

ConfigEntries tuning_entries(const RunConfig& cfg) {
  return {{"cv-folds", std::to_string(cfg.cv_folds)},
          {"cv-grid", std::to_string(cfg.cv_grid)},
          {"cv-trees", std::to_string(cfg.cv_trees)},
          {"shared-lambda", cfg.shared_lambda ? "true" : "false"},
          {"c-n", to_text(cfg.c_n)}};
}

ConfigEntries layout_entries(const RunConfig& cfg) {
  return {{"response-cols", cfg.response_cols},
          {"covariate-cols", cfg.covariate_cols},
          {"date-col", cfg.date_col},
          {"lag", std::to_string(cfg.lag)},
          {"unit-cube", cfg.unit_cube ? "true" : "false"}};
}

std::vector<std::string> render(const ConfigEntries& entries) {
  std::vector<std::string> lines;
  lines.reserve(entries.size());
  for (const auto& [k, v] : entries) lines.push_back(k + "=" + v);
  return lines;
}

}  // namespace fdcm::cli
