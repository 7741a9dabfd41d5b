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

// fdcm: command-line front end.
//   simulate   Monte Carlo benchmark over the M1..M4 models
//   estimate   fit on a CSV sample and write Sigma(u) at query points
//   backtest   rolling minimum-variance portfolio on a returns panel
//   generate   write a synthetic sample / panel CSV
// Exit status: 0 success, 2 usage or validation error, 1 runtime failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "fdcm/experiment.hpp"
#include "fdcm/forest_io.hpp"
#include "fdcm/kernels.hpp"
#include "fdcm/matrix_io.hpp"
#include "fdcm/portfolio.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace fdcm;
using namespace fdcm::cli;

namespace {

struct Paths {
  std::string out;
  std::string table;
  std::string reps_out;
  std::string train;
  std::string query;
  std::string out_dir;
  std::string panel;
  bool save_forests = false;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_header(std::ostream& out, const std::vector<std::string>& lines) {
  for (const auto& l : lines) out << "# " << l << '\n';
}

CsvLayout layout_of(const RunConfig& cfg) {
  CsvLayout layout;
  layout.response_columns = split_list(cfg.response_cols);
  layout.covariate_columns = split_list(cfg.covariate_cols);
  if (!cfg.date_col.empty()) layout.date_column = cfg.date_col;
  layout.lag = cfg.lag;
  return layout;
}

ModelSpec model_of(const RunConfig& cfg) {
  ModelSpec m{parse_model_id(cfg.model), cfg.p, cfg.d, cfg.n};
  m.validate();
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_simulate(const RunConfig& cfg, const Paths& paths) {
  ExperimentConfig ex;
  ex.model = model_of(cfg);
  ex.reps = cfg.reps;
  ex.methods = parse_methods(cfg.methods);
  ex.seed = cfg.seed;
  ex.settings = estimator_settings(cfg, true);
  ex.workers = cfg.workers;
  if (!cfg.test_points.empty()) {
    ex.test_points = load_points_csv(cfg.test_points);
    for (const auto& pt : ex.test_points) {
      if (pt.size() != ex.model.d) throw std::invalid_argument("test points must have d coordinates");
    }
  }

  ConfigEntries entries{{"command", "simulate"},
                        {"seed", std::to_string(cfg.seed)},
                        {"model", std::to_string(cfg.model)},
                        {"p", std::to_string(cfg.p)},
                        {"d", std::to_string(cfg.d)},
                        {"n", std::to_string(cfg.n)},
                        {"reps", std::to_string(cfg.reps)},
                        {"methods", cfg.methods},
                        {"test-points", cfg.test_points}};
  auto forest = forest_entries(cfg);
  forest[1].second = std::to_string(ex.settings.second_moment_trees);
  entries.insert(entries.end(), forest.begin(), forest.end());
  const auto tuning = tuning_entries(cfg);
  entries.insert(entries.end(), tuning.begin(), tuning.end());
  const auto header = render(entries);

  const auto start = std::chrono::steady_clock::now();
  const auto report = run_experiment(ex);
  std::cerr << "simulate: " << report.reps << " replications in " << seconds_since(start) << " s ("
            << kernels::backend_name(kernels::active_backend()) << " kernels)\n";
  for (const auto& m : report.methods) {
    std::cerr << "  " << m.label << ": " << m.seconds / static_cast<double>(report.reps) << " s per replication\n";
  }

  {
    auto out = open_out(paths.out);
    write_header(out, header);
    write_report_csv(out, report);
  }
  if (!paths.reps_out.empty()) {
    auto out = open_out(paths.reps_out);
    write_header(out, header);
    write_replications_csv(out, report);
  }
  if (!paths.table.empty()) {
    auto out = open_out(paths.table);
    write_header(out, header);
    write_report_table(out, report);
  } else {
    write_report_table(std::cout, report);
  }
  if (report.spectral_violations != 0) {
    std::cerr << "warning: spectral loss exceeded Frobenius loss on " << report.spectral_violations << " pairs\n";
  }
  return 0;
}

int cmd_estimate(const RunConfig& cfg, const Paths& paths) {
  const auto spec = MethodSpec::parse(cfg.method.empty() ? "fdcm:soft" : cfg.method);
  if (cfg.stage != "raw" && cfg.stage != "thresholded" && cfg.stage != "corrected") {
    throw std::invalid_argument("--stage must be raw, thresholded or corrected");
  }
  Dataset data = load_returns_csv(paths.train, layout_of(cfg));
  auto points = load_points_csv(paths.query);
  for (const auto& pt : points) {
    if (pt.size() != data.d()) {
      throw std::invalid_argument("query points have " + std::to_string(pt.size()) + " coordinates but d = " +
                                  std::to_string(data.d()));
    }
  }
  if (cfg.unit_cube) {
    auto mapped = map_to_unit_cube(data);
    if (mapped.map.any_constant()) std::cerr << "warning: a covariate is constant; pinned to 0.5\n";
    for (auto& pt : points) pt = mapped.map.apply(pt);
    data = std::move(mapped.data);
  }
  const auto settings = estimator_settings(cfg, false);

  ConfigEntries entries{{"command", "estimate"},
                        {"seed", std::to_string(cfg.seed)},
                        {"method", spec.label()},
                        {"stage", cfg.stage},
                        {"train", paths.train},
                        {"query", paths.query}};
  for (auto part : {layout_entries(cfg), forest_entries(cfg), tuning_entries(cfg)}) {
    entries.insert(entries.end(), part.begin(), part.end());
  }
  const auto header = render(entries);

  const auto start = std::chrono::steady_clock::now();
  const FittedMethod fitted(spec, data, settings);
  const fs::path dir = paths.out_dir;
  fs::create_directories(dir);
  if (paths.save_forests) {
    if (const auto* f = fitted.forests()) {
      save_forest(f->second_moment, dir / "second_moment_forest.json");
      if (f->mean) save_forest(*f->mean, dir / "mean_forest.json");
    } else {
      std::cerr << "warning: --save-forests ignored; " << spec.label() << " has no forests\n";
    }
  }

  auto manifest = open_out(dir / "manifest.csv");
  write_header(manifest, header);
  manifest << "point,file";
  for (std::size_t f = 0; f < data.d(); ++f) manifest << ",u" << f + 1;
  manifest << ",lambda,stage,min_eigenvalue,pd,correction_applied,delta_hat,c_n\n";
  const bool correct = cfg.stage == "corrected" || spec.modified;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto est = fitted.estimate(points[k], correct);
    const Matrix& out = cfg.stage == "raw" ? est.raw : cfg.stage == "thresholded" ? est.thresholded : *est.corrected;
    char name[32];
    std::snprintf(name, sizeof name, "sigma_%04zu.csv", k + 1);
    std::vector<std::string> lines = header;
    std::string where = "u=";
    for (std::size_t f = 0; f < points[k].size(); ++f) where += (f ? "," : "") + to_text(points[k][f]);
    lines.push_back(where);
    write_matrix_csv(dir / name, out, lines);

    const double mu = min_eigenvalue(out);
    manifest << k + 1 << ',' << name;
    for (double v : points[k]) manifest << ',' << format_double(v);
    manifest << ',' << format_double(est.lambda.lambda) << ',' << cfg.stage << ',' << format_double(mu) << ','
             << (mu > 0.0 ? "yes" : (cfg.stage == "corrected" ? "no" : "no (allowed at this stage)"));
    if (est.pd) {
      manifest << ',' << (est.pd->applied ? "yes" : "no") << ',' << format_double(est.pd->delta_hat) << ','
               << format_double(est.pd->c_n);
    } else {
      manifest << ",n/a,,";
    }
    manifest << '\n';
  }
  std::cerr << "estimate: " << points.size() << " points in " << seconds_since(start) << " s\n";
  return 0;
}

int cmd_backtest(const RunConfig& cfg, const Paths& paths) {
  BacktestConfig bt;
  bt.method = MethodSpec::parse(cfg.method.empty() ? "mfdcm:soft" : cfg.method);
  bt.window = cfg.window;
  bt.stride = cfg.stride;
  bt.seed = cfg.seed;
  bt.settings = estimator_settings(cfg, false);
  bt.workers = cfg.workers;
  Dataset panel = load_returns_csv(paths.panel, layout_of(cfg));
  if (cfg.unit_cube) {
    // Ranges come from the whole panel, which leaks future extremes; a
    // convenience for already-normalised factors only.
    std::cerr << "warning: --unit-cube uses the full-panel covariate range\n";
    panel = map_to_unit_cube(panel).data;
  }

  ConfigEntries entries{{"command", "backtest"},
                        {"seed", std::to_string(cfg.seed)},
                        {"method", bt.method.label()},
                        {"window", std::to_string(cfg.window)},
                        {"stride", std::to_string(cfg.stride)},
                        {"panel", paths.panel}};
  for (auto part : {layout_entries(cfg), forest_entries(cfg), tuning_entries(cfg)}) {
    entries.insert(entries.end(), part.begin(), part.end());
  }
  const auto header = render(entries);

  const auto start = std::chrono::steady_clock::now();
  const auto result = backtest(panel, bt);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << "backtest: " << result.days.size() << " days in " << seconds_since(start) << " s\n";

  const fs::path dir = paths.out_dir;
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "returns.csv");
    write_header(out, header);
    write_daily_returns_csv(out, result);
  }
  {
    auto out = open_out(dir / "weights.csv");
    write_header(out, header);
    write_weights_csv(out, result, panel.response_names);
  }
  const auto line = summary_line(result.performance);
  {
    auto out = open_out(dir / "summary.txt");
    write_header(out, header);
    out << line << '\n';
  }
  std::cout << line << '\n';
  return 0;
}

int cmd_generate(const RunConfig& cfg, const Paths& paths) {
  const auto model = model_of(cfg);
  const auto panel = synthetic_panel(model, model.n, cfg.seed);
  const auto header = render({{"command", "generate"},
                              {"seed", std::to_string(cfg.seed)},
                              {"model", std::to_string(cfg.model)},
                              {"p", std::to_string(cfg.p)},
                              {"d", std::to_string(cfg.d)},
                              {"n", std::to_string(cfg.n)}});
  if (fs::path(paths.out).has_parent_path()) fs::create_directories(fs::path(paths.out).parent_path());
  write_dataset_csv(paths.out, panel, header);
  return 0;
}

void add_model_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--model", cfg.model, "Model number 1-4")->check(CLI::Range(1, 4))->capture_default_str();
  app.add_option("--p", cfg.p, "Response dimension")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--d", cfg.d, "Covariate dimension")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--n", cfg.n, "Sample size")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_common_options(CLI::App& app, RunConfig& cfg) {
  app.set_config("--config", "", "key=value file; keys are long flag names, flags override it");
  app.add_option("--seed", cfg.seed, "Root seed")->capture_default_str();
  app.add_option("--workers", cfg.workers, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic covariance estimation with honest random forests"};
  app.require_subcommand(1);
  RunConfig cfg;
  Paths paths;

  auto* sim = app.add_subcommand("simulate", "Monte Carlo benchmark on a dynamic covariance model");
  add_common_options(*sim, cfg);
  add_model_options(*sim, cfg);
  sim->add_option("--reps", cfg.reps, "Replications")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--methods", cfg.methods, "Comma-separated estimators, e.g. fdcm:soft,static:soft")
      ->capture_default_str();
  sim->add_option("--test-points", cfg.test_points, "CSV of evaluation points (default: built-in 30 points)")
      ->check(CLI::ExistingFile);
  sim->add_option("--out", paths.out, "Report CSV")->required();
  sim->add_option("--table", paths.table, "Plain-text table (default: standard output)");
  sim->add_option("--reps-out", paths.reps_out, "Per-replication CSV");
  add_forest_options(*sim, cfg);
  add_tuning_options(*sim, cfg);

  auto* est = app.add_subcommand("estimate", "Fit on a CSV sample and write Sigma(u) at query points");
  add_common_options(*est, cfg);
  est->add_option("--train", paths.train, "Training CSV")->required()->check(CLI::ExistingFile);
  est->add_option("--query", paths.query, "Query points CSV (header row, then d columns)")
      ->required()
      ->check(CLI::ExistingFile);
  add_layout_options(*est, cfg);
  est->add_option("--method", cfg.method, "Estimator (default fdcm:soft)");
  est->add_option("--stage", cfg.stage, "raw, thresholded or corrected")
      ->check(CLI::IsMember({"raw", "thresholded", "corrected"}))
      ->capture_default_str();
  est->add_option("--out-dir", paths.out_dir, "Directory for matrices and manifest.csv")->required();
  est->add_flag("--save-forests", paths.save_forests, "Also write the fitted forests as JSON");
  add_forest_options(*est, cfg);
  add_tuning_options(*est, cfg);

  auto* bt = app.add_subcommand("backtest", "Rolling minimum-variance portfolio backtest");
  add_common_options(*bt, cfg);
  bt->add_option("--panel", paths.panel, "Returns panel CSV")->required()->check(CLI::ExistingFile);
  add_layout_options(*bt, cfg);
  bt->add_option("--method", cfg.method, "Estimator (default mfdcm:soft)");
  bt->add_option("--window", cfg.window, "Training window in rows")->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  bt->add_option("--stride", cfg.stride, "Refit every this many days")->check(CLI::PositiveNumber)
      ->capture_default_str();
  bt->add_option("--out-dir", paths.out_dir, "Directory for returns.csv, weights.csv, summary.txt")->required();
  add_forest_options(*bt, cfg);
  add_tuning_options(*bt, cfg);

  auto* gen = app.add_subcommand("generate", "Write a synthetic sample from one of the models");
  add_common_options(*gen, cfg);
  add_model_options(*gen, cfg);
  gen->add_option("--out", paths.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg, paths);
    if (est->parsed()) return cmd_estimate(cfg, paths);
    if (bt->parsed()) return cmd_backtest(cfg, paths);
    if (gen->parsed()) return cmd_generate(cfg, paths);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
