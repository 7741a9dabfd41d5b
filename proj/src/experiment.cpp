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

#include "fdcm/experiment.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "fdcm/parallel.hpp"

namespace fdcm {

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

struct RepOutcome {
  std::vector<double> mfl, msl, mtpr, mfpr, seconds;  // per method
  std::size_t pairs = 0;
  std::size_t violations = 0;
};

RepOutcome run_replication(const ExperimentConfig& config, std::size_t rep,
                           const std::vector<std::vector<double>>& points, const std::vector<Matrix>& truths) {
  const std::uint64_t rep_seed = derive_seed(config.seed, Stream::Replication, rep);
  Rng data_rng = make_rng(rep_seed, Stream::Data, 0);
  const Dataset data = sample_dataset(config.model, data_rng);

  EstimatorSettings settings = config.settings;
  settings.forest.seed = rep_seed;
  settings.forest.workers = 1;
  settings.cv.seed = derive_seed(rep_seed, Stream::Fold, 0);

  const std::size_t m = config.methods.size();
  RepOutcome out;
  out.mfl.assign(m, 0.0);
  out.msl.assign(m, 0.0);
  out.mtpr.assign(m, 0.0);
  out.mfpr.assign(m, 0.0);
  out.seconds.assign(m, 0.0);

  // Methods that differ only in the PD correction share one fit.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < m; ++k) groups[config.methods[k].fit_key()].push_back(k);

  for (const auto& [key, members] : groups) {
    const auto start = std::chrono::steady_clock::now();
    bool need_correction = false;
    for (auto k : members) need_correction |= config.methods[k].modified;
    const FittedMethod fitted(config.methods[members.front()], data, settings);

    std::vector<std::vector<double>> fro(m), spec(m), tpr(m), fpr(m);
    for (std::size_t t = 0; t < points.size(); ++t) {
      const auto est = fitted.estimate(points[t], need_correction);
      for (auto k : members) {
        const Matrix& final_matrix = config.methods[k].modified ? *est.corrected : est.thresholded;
        const auto loss = losses(final_matrix, truths[t]);
        ++out.pairs;
        if (loss.spectral > loss.frobenius * (1.0 + 1e-12) + 1e-12) ++out.violations;
        fro[k].push_back(loss.frobenius);
        spec[k].push_back(loss.spectral);
        if (config.model.has_varying_sparsity()) {
          const auto rates = sparsity_rates(final_matrix, truths[t]);
          tpr[k].push_back(rates.tpr);
          fpr[k].push_back(rates.fpr);
        }
      }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
        static_cast<double>(members.size());
    for (auto k : members) {
      out.mfl[k] = median(fro[k]);
      out.msl[k] = median(spec[k]);
      if (config.model.has_varying_sparsity()) {
        out.mtpr[k] = median(tpr[k]);
        out.mfpr[k] = median(fpr[k]);
      }
      out.seconds[k] = elapsed;
    }
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.model.validate();
  if (config.reps < 1) throw std::invalid_argument("experiment needs at least one replication");
  if (config.methods.empty()) throw std::invalid_argument("experiment needs at least one method");
  const auto points = config.test_points.empty() ? fixed_test_points(config.model.d) : config.test_points;
  std::vector<Matrix> truths;
  truths.reserve(points.size());
  for (const auto& pt : points) truths.push_back(true_cov(config.model, pt));

  std::vector<RepOutcome> outcomes(config.reps);
  parallel_for(config.reps, config.workers,
               [&](std::size_t r) { outcomes[r] = run_replication(config, r, points, truths); });

  ExperimentReport report;
  report.model = config.model;
  report.reps = config.reps;
  report.has_sparsity = config.model.has_varying_sparsity();
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    MethodResult res;
    res.label = config.methods[k].label();
    for (const auto& o : outcomes) {
      res.mfl.push_back(o.mfl[k]);
      res.msl.push_back(o.msl[k]);
      if (report.has_sparsity) {
        res.mtpr.push_back(o.mtpr[k]);
        res.mfpr.push_back(o.mfpr[k]);
      }
      res.seconds += o.seconds[k];
    }
    report.methods.push_back(std::move(res));
  }
  for (const auto& o : outcomes) {
    report.evaluated_pairs += o.pairs;
    report.spectral_violations += o.violations;
  }
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "method,metric,mean,sd\n";
  for (const auto& m : report.methods) {
    auto row = [&](const char* metric, const std::vector<double>& values) {
      const auto s = summarize(values);
      out << m.label << ',' << metric << ',' << format_double(s.mean) << ',' << format_double(s.sd) << '\n';
    };
    row("MFL", m.mfl);
    row("MSL", m.msl);
    if (report.has_sparsity) {
      row("MTPR", m.mtpr);
      row("MFPR", m.mfpr);
    }
  }
}

void write_report_table(std::ostream& out, const ExperimentReport& report) {
  out << "Model " << static_cast<int>(report.model.id) << "  p=" << report.model.p << " d=" << report.model.d
      << " n=" << report.model.n << "  reps=" << report.reps << "\n";
  out << "average (standard deviation) over replications\n";
  out << std::left << std::setw(22) << "method" << std::setw(16) << "MFL" << std::setw(16) << "MSL";
  if (report.has_sparsity) out << std::setw(16) << "MTPR" << std::setw(16) << "MFPR";
  out << '\n';
  auto cell = [](const std::vector<double>& v) {
    const auto s = summarize(v);
    return fixed(s.mean, 2) + "(" + fixed(s.sd, 2) + ")";
  };
  for (const auto& m : report.methods) {
    out << std::left << std::setw(22) << m.label << std::setw(16) << cell(m.mfl) << std::setw(16) << cell(m.msl);
    if (report.has_sparsity) out << std::setw(16) << cell(m.mtpr) << std::setw(16) << cell(m.mfpr);
    out << '\n';
  }
  out << "spectral <= Frobenius violations: " << report.spectral_violations << " of " << report.evaluated_pairs
      << " pairs\n";
}

void write_replications_csv(std::ostream& out, const ExperimentReport& report) {
  out << "rep,method,mfl,msl" << (report.has_sparsity ? ",mtpr,mfpr" : "") << '\n';
  for (std::size_t r = 0; r < report.reps; ++r) {
    for (const auto& m : report.methods) {
      out << r << ',' << m.label << ',' << format_double(m.mfl[r]) << ',' << format_double(m.msl[r]);
      if (report.has_sparsity) out << ',' << format_double(m.mtpr[r]) << ',' << format_double(m.mfpr[r]);
      out << '\n';
    }
  }
}

}  // namespace fdcm
