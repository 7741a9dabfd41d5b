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

struct ExperimentConfig {
  ModelSpec model;
  std::size_t reps = 50;
  std::vector<std::vector<double>> test_points;  ///< empty: fixed_test_points(model.d)
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 1;
  EstimatorSettings settings;  ///< forest/cv seeds are overwritten per replication
  unsigned workers = 1;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  ///< n - 1 denominator; 0 for a single replication
};

MetricSummary summarize(const std::vector<double>& values);

struct MethodResult {
  std::string label;
  std::vector<double> mfl;  ///< one entry per replication
  std::vector<double> msl;
  std::vector<double> mtpr;  ///< varying-sparsity models only
  std::vector<double> mfpr;
  double seconds = 0.0;  ///< fit + estimation wall time summed over replications
};

struct ExperimentReport {
  ModelSpec model;
  std::size_t reps = 0;
  bool has_sparsity = false;
  std::vector<MethodResult> methods;
  std::size_t evaluated_pairs = 0;       ///< (estimate, truth) pairs scored
  std::size_t spectral_violations = 0;   ///< pairs with spectral loss > Frobenius loss
};

/// Replication r draws its data from make_rng(derive_seed(seed, Replication, r), Data, 0)
/// and seeds its forests with derive_seed(seed, Replication, r). Replications
/// run on up to `workers` threads; the report does not depend on the count.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// method,metric,mean,sd rows (runtimes excluded so reruns are byte-identical).
void write_report_csv(std::ostream& out, const ExperimentReport& report);
void write_report_table(std::ostream& out, const ExperimentReport& report);
/// rep,method,mfl,msl[,mtpr,mfpr]
void write_replications_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace fdcm
