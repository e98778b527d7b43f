#include "loadcast/pipeline.hpp"

#include "loadcast/version.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace loadcast {

namespace {

template <typename Fn>
auto with_step(const std::string& scenario, const std::string& step, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error("scenario '" + scenario + "', step '" + step + "': " + e.what());
  }
}

std::int64_t day_start_epoch(const CivilDate& date) {
  return days_from_civil(date) * kSecondsPerDay;
}

}  // namespace

HourlySeries acquire_series(const PipelineConfig& config, DataSummary* summary,
                            InjectionLog* log) {
  std::vector<RawRecord> records;
  std::string source;
  InjectionLog local_log;
  if (config.input.kind == InputConfig::Kind::Synthetic) {
    const ClimateProfile profile = config.input.resolved_profile();
    const std::int64_t start = day_start_epoch(config.input.start);
    const std::int64_t end = day_start_epoch(config.input.end) + kSecondsPerDay;
    SyntheticData data = generate(profile, start, end, config.input.resolution,
                                  derive_seed(config.seed, "synthdata"), config.input.injections);
    records = std::move(data.records);
    local_log = std::move(data.log);
    source = "synthetic:" + profile.name;
  } else {
    records = read_records_csv(config.input.csv_path, config.input.csv_unit);
    source = "csv:" + config.input.csv_path.string();
  }
  ResamplePolicy policy;
  policy.kind = config.input.kind == InputConfig::Kind::Synthetic
                    ? native_value_kind(config.input.resolution)
                    : config.input.csv_unit;
  policy.records_per_hour = records_per_hour(config.input.resolution);
  HourlySeries series = resample_to_hourly(records, policy);
  if (summary) {
    summary->hours = series.size();
    summary->missing_before = series.missing_load_count();
    summary->source = source;
  }
  if (log) *log = std::move(local_log);
  return series;
}

HourlySeries preprocess_series(const PipelineConfig& config, const HourlySeries& raw,
                               DataSummary* summary) {
  const std::vector<bool> mask = detect_outliers(raw, config.preprocess.outlier_policy);
  const HourlySeries replaced = replace_outliers(raw, mask, config.preprocess.outlier_policy);
  ImputeStats stats;
  HourlySeries clean = impute(replaced, config.preprocess.short_gap_max_hours, &stats);
  if (summary) {
    summary->outliers_flagged =
        static_cast<Eigen::Index>(std::count(mask.begin(), mask.end(), true));
    summary->missing_filled = stats.load_short_filled + stats.load_long_filled;
  }
  return clean;
}

std::vector<std::pair<std::string, HourlySeries>> scenario_series(const PipelineConfig& config,
                                                                  const HourlySeries& clean) {
  std::vector<std::pair<std::string, HourlySeries>> out;
  out.emplace_back("full", clean);
  if (!config.seasons.empty()) {
    auto slices = split_seasons(clean, config.seasons);
    for (const SeasonRange& range : config.seasons)  // preserve configured order
      out.emplace_back(range.name, slices.at(range.name));
  }
  return out;
}

PreparedScenario prepare_scenario(const PipelineConfig& config, const std::string& name,
                                  const HourlySeries& series) {
  PreparedScenario prep;
  prep.name = name;
  prep.series = series;

  SupervisedSpec spec;
  spec.lags = config.features.lags;
  spec.horizon = config.features.horizon;
  spec.use_temperature = config.features.use_temperature;

  const FeatureMatrix matrix =
      with_step(name, "build_supervised", [&] { return build_supervised(series, spec); });
  auto [train_raw, test_raw] = with_step(
      name, "chrono_split", [&] { return chrono_split(matrix, config.features.train_fraction); });

  prep.scaler = fit_scaler(train_raw);
  prep.train = apply_scaler(prep.scaler, train_raw);
  prep.test = apply_scaler(prep.scaler, test_raw);
  // Targets stay in kW; only the features are standardized.
  prep.train.y = train_raw.y;
  prep.test.y = test_raw.y;

  prep.max_lag = *std::max_element(spec.lags.begin(), spec.lags.end());
  prep.test_start = static_cast<Eigen::Index>(prep.max_lag) + prep.train.rows();
  return prep;
}

Eigen::VectorXd walk_forward_day_ahead(const ArimaModel& model, const HourlySeries& series,
                                       Eigen::Index test_start, bool use_exog) {
  const Eigen::Index n = series.size();
  if (test_start <= 0 || test_start >= n)
    throw std::invalid_argument("walk_forward_day_ahead: test_start out of range");
  Eigen::VectorXd preds(n - test_start);
  for (Eigen::Index block = test_start; block < n; block += 24) {
    const int horizon = static_cast<int>(std::min<Eigen::Index>(24, n - block));
    const Eigen::VectorXd history = series.load_kw.head(block);
    if (use_exog) {
      const Eigen::VectorXd exog_hist = series.temperature_c.head(block);
      const Eigen::VectorXd exog_future = series.temperature_c.segment(block, horizon);
      preds.segment(block - test_start, horizon) =
          forecast_walk_forward(model, history, &exog_hist, &exog_future, horizon);
    } else {
      preds.segment(block - test_start, horizon) =
          forecast_walk_forward(model, history, nullptr, nullptr, horizon);
    }
  }
  return preds;
}

ParamGrid full_search_grid() {
  ParamGrid grid;
  grid.axes = {
      {"n_estimators", {50, 100, 150, 200}},
      {"learning_rate", {0.01, 0.05, 0.1, 0.2}},
      {"max_depth", {3, 5, 7, 10}},
      {"min_child_weight", {1, 3, 5, 7}},
      {"subsample", {0.7, 0.8, 0.9, 1.0}},
      {"colsample_bytree", {0.7, 0.8, 0.9, 1.0}},
      {"lambda", {0, 0.1, 1, 10}},
      {"alpha", {0, 0.1, 1, 10}},
  };
  return grid;
}

namespace {

void run_scenario_models(const PipelineConfig& config, const RunOptions& options,
                         const PreparedScenario& prep, ScenarioResult& result,
                         const std::filesystem::path& model_dir, bool write_models) {
  const std::string& name = prep.name;
  std::map<std::string, MetricBundle> bundles;
  // report paths are relative to the output directory so reruns in different
  // directories stay byte-identical
  const auto relative_name = [](const std::filesystem::path& p) {
    return (std::filesystem::path("models") / p.filename()).generic_string();
  };

  if (config.gbt.enabled) {
    GbtHyperParams base = config.gbt.params;
    base.seed = derive_seed(config.seed, "gbt/" + name);
    GbtHyperParams chosen = base;

    std::optional<ParamGrid> grid = config.gbt.grid;
    if (options.use_full_grid) grid = full_search_grid();
    if (grid) {
      const FoldTrainer trainer = [&base](const FeatureMatrix& tr, const FeatureMatrix& va,
                                          const ParamSet& ps) {
        GbtHyperParams p = gbt_params_from(ps, base);
        p.early_stopping_patience.reset();
        return predict(fit_gbt(tr, p, nullptr), va);
      };
      const TuningResult tuned = with_step(name, "grid_search", [&] {
        return grid_search(prep.train, *grid, config.features.cv_folds, trainer,
                           options.max_threads);
      });
      chosen = gbt_params_from(tuned.best_params, base);

      TuningSummary summary;
      summary.candidates = tuned.candidates.size();
      summary.best_index = tuned.best_index;
      summary.best_params = tuned.best_params;
      summary.best_mean_mae = tuned.candidates[tuned.best_index].mean_mae;
      for (const CandidateResult& cr : tuned.candidates) {
        if (cr.feasible) ++summary.feasible;
        summary.candidate_mean_mae.push_back(cr.mean_mae);
        summary.wall_ms.push_back(cr.wall_ms);
      }
      result.gbt_tuning = std::move(summary);
    }

    auto [model, metrics] = with_step(name, "final_fit", [&] {
      return final_fit(prep.train, prep.test, chosen, config.gbt.early_stopping_patience,
                       config.mape_floor);
    });
    ModelOutcome outcome;
    outcome.metrics = metrics;
    outcome.predictions = predict(model, prep.test);
    if (write_models) {
      const auto path = model_dir / ("model_" + name + "_gbt.json");
      save_gbt_model(model, path);
      outcome.model_path = relative_name(path);
    }
    bundles["gbt"] = metrics;
    result.models["gbt"] = std::move(outcome);
  }

  const auto run_arima_kind = [&](const std::string& key, const ArimaModelConfig& cfg,
                                  bool use_exog) {
    if (!cfg.enabled) return;
    const ArimaModel model = with_step(name, "fit_" + key, [&] {
      const Eigen::VectorXd train_levels = prep.series.load_kw.head(prep.test_start);
      if (use_exog) {
        const Eigen::VectorXd exog = prep.series.temperature_c.head(prep.test_start);
        return fit_arimax(train_levels, exog, cfg.order);
      }
      return fit_arima(train_levels, cfg.order);
    });
    ModelOutcome outcome;
    outcome.predictions = with_step(name, key + "_walk_forward", [&] {
      return walk_forward_day_ahead(model, prep.series, prep.test_start, use_exog);
    });
    outcome.metrics = evaluate(prep.test.y, outcome.predictions, config.mape_floor);
    if (write_models) {
      const auto path = model_dir / ("model_" + name + "_" + key + ".json");
      save_arima_model(model, path);
      outcome.model_path = relative_name(path);
    }
    bundles[key] = outcome.metrics;
    result.models[key] = std::move(outcome);
  };
  run_arima_kind("arima", config.arima, false);
  run_arima_kind("arimax", config.arimax, true);

  if (config.svr.enabled) {
    SvrParams params;
    params.kernel = config.svr.kernel;
    params.C = config.svr.C;
    params.gamma = config.svr.gamma;
    params.tolerance = config.svr.tolerance;
    if (config.svr.epsilon) {
      params.epsilon = *config.svr.epsilon;
    } else {
      const double mean = prep.train.y.mean();
      const double std_y = std::sqrt((prep.train.y.array() - mean).square().mean());
      params.epsilon = config.svr.epsilon_factor * std_y;
    }
    const SvrModel model =
        with_step(name, "fit_svr", [&] { return fit_svr(prep.train, params); });
    ModelOutcome outcome;
    outcome.predictions = predict_svr(model, prep.test.X);
    outcome.metrics = evaluate(prep.test.y, outcome.predictions, config.mape_floor);
    if (write_models) {
      const auto path = model_dir / ("model_" + name + "_svr.json");
      save_svr_model(model, path);
      outcome.model_path = relative_name(path);
    }
    bundles["svr"] = outcome.metrics;
    result.models["svr"] = std::move(outcome);
  }

  result.ranking_by_mae = rank_models(bundles, "mae");
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  RunResult run;
  run.config = config;

  const std::filesystem::path out_dir = config.output_dir;
  const std::filesystem::path model_dir = out_dir / "models";
  const std::filesystem::path plot_dir = out_dir / "plots";
  if (options.write_outputs) {
    std::filesystem::create_directories(model_dir);
    if (config.plots) std::filesystem::create_directories(plot_dir);
  }

  const HourlySeries raw = acquire_series(config, &run.data);
  const HourlySeries clean = preprocess_series(config, raw, &run.data);

  for (auto& [name, series] : scenario_series(config, clean)) {
    if (options.scenario_filter && name != *options.scenario_filter) continue;
    ScenarioResult result;
    result.name = name;
    result.hours = series.size();
    try {
      const PreparedScenario prep = prepare_scenario(config, name, series);
      result.train_rows = prep.train.rows();
      result.test_rows = prep.test.rows();
      result.test_timestamps = prep.test.row_timestamps;
      result.test_actuals = prep.test.y;

      run_scenario_models(config, options, prep, result, model_dir, options.write_outputs);

      if (options.write_outputs && config.plots) {
        for (const auto& [model_name, outcome] : result.models) {
          const auto files =
              export_plots(plot_dir, name, model_name, result.test_timestamps, result.test_actuals,
                           outcome.predictions, result.warnings);
          for (const auto& f : files)
            run.artifacts.push_back((std::filesystem::path("plots") / f.filename()).generic_string());
        }
      }
      for (const auto& [model_name, outcome] : result.models)
        if (!outcome.model_path.empty()) run.artifacts.push_back(outcome.model_path);
    } catch (const std::exception& e) {
      result.error = e.what();
      result.models.clear();
      result.ranking_by_mae.clear();
    }
    run.scenarios.push_back(std::move(result));
  }

  run.wall_ms_total =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (options.write_outputs) write_report(run, out_dir);
  return run;
}

OrderedJson metrics_to_json(const MetricBundle& b) {
  OrderedJson j;
  j["mae"] = b.mae;
  j["mse"] = b.mse;
  j["rmse"] = b.rmse;
  if (b.mape)
    j["mape_percent"] = *b.mape;
  else
    j["mape_percent"] = nullptr;
  if (b.r2)
    j["r2"] = *b.r2;
  else
    j["r2"] = nullptr;
  j["n"] = b.n;
  j["mape_excluded"] = b.mape_excluded;
  return j;
}

OrderedJson report_to_json(const RunResult& run) {
  OrderedJson j;
  j["schema"] = "loadcast.run_report/1";
  j["tool_version"] = kVersion;
  j["seed"] = run.config.seed;
  j["config"] = to_json(run.config);

  OrderedJson jd;
  jd["source"] = run.data.source;
  jd["hours"] = run.data.hours;
  jd["missing_before_impute"] = run.data.missing_before;
  jd["outliers_flagged"] = run.data.outliers_flagged;
  jd["missing_filled"] = run.data.missing_filled;
  j["data"] = std::move(jd);

  OrderedJson scenarios = OrderedJson::array();
  OrderedJson timing;
  timing["wall_ms_total"] = run.wall_ms_total;
  for (const ScenarioResult& s : run.scenarios) {
    OrderedJson js;
    js["name"] = s.name;
    js["hours"] = s.hours;
    js["train_rows"] = s.train_rows;
    js["test_rows"] = s.test_rows;
    OrderedJson models;
    for (const auto& [model_name, outcome] : s.models) {
      OrderedJson jmodel;
      jmodel["metrics"] = metrics_to_json(outcome.metrics);
      jmodel["model_file"] = outcome.model_path.empty() ? OrderedJson(nullptr)
                                                        : OrderedJson(outcome.model_path);
      models[model_name] = std::move(jmodel);
    }
    js["models"] = std::move(models);
    if (s.gbt_tuning) {
      OrderedJson jt;
      jt["candidates"] = s.gbt_tuning->candidates;
      jt["feasible"] = s.gbt_tuning->feasible;
      jt["best_index"] = s.gbt_tuning->best_index;
      OrderedJson best;
      for (const auto& [pname, value] : s.gbt_tuning->best_params) best[pname] = value;
      jt["best_params"] = std::move(best);
      jt["best_mean_mae"] = s.gbt_tuning->best_mean_mae;
      jt["candidate_mean_mae"] = s.gbt_tuning->candidate_mean_mae;
      js["tuning"] = std::move(jt);
      timing["grid_wall_ms"][s.name] = s.gbt_tuning->wall_ms;
    } else {
      js["tuning"] = nullptr;
    }
    js["ranking_by_mae"] = s.ranking_by_mae;
    js["warnings"] = s.warnings;
    js["error"] = s.error.empty() ? OrderedJson(nullptr) : OrderedJson(s.error);
    scenarios.push_back(std::move(js));
  }
  j["scenarios"] = std::move(scenarios);
  j["artifacts"] = run.artifacts;
  j["timing"] = std::move(timing);  // the only nondeterministic subtree
  return j;
}

namespace {

std::string num(double v, int precision = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

std::string report_to_text(const RunResult& run) {
  std::ostringstream os;
  os << "loadcast " << kVersion << " run report\n";
  os << "source: " << run.data.source << ", hours: " << run.data.hours
     << ", outliers flagged: " << run.data.outliers_flagged
     << ", missing filled: " << run.data.missing_filled << ", seed: " << run.config.seed << "\n";
  for (const ScenarioResult& s : run.scenarios) {
    os << "\nScenario: " << s.name << " (" << s.hours << " h, train " << s.train_rows << ", test "
       << s.test_rows << ")\n";
    if (!s.error.empty()) {
      os << "  ERROR: " << s.error << "\n";
      continue;
    }
    os << "  " << std::left;
    os.width(12);
    os << "Metric";
    for (const auto& [model_name, outcome] : s.models) {
      os.width(12);
      os << model_name;
    }
    os << "\n";
    const auto row = [&](const std::string& label, auto getter) {
      os << "  ";
      os.width(12);
      os << label;
      for (const auto& [model_name, outcome] : s.models) {
        os.width(12);
        os << getter(outcome.metrics);
      }
      os << "\n";
    };
    row("MAE", [](const MetricBundle& b) { return num(b.mae); });
    row("MSE", [](const MetricBundle& b) { return num(b.mse); });
    row("RMSE", [](const MetricBundle& b) { return num(b.rmse); });
    row("MAPE", [](const MetricBundle& b) { return b.mape ? num(*b.mape, 2) + "%" : "n/a"; });
    row("R2", [](const MetricBundle& b) { return b.r2 ? num(*b.r2, 3) : "n/a"; });
    os << "  Ranking by MAE:";
    for (const std::string& model_name : s.ranking_by_mae) os << " " << model_name;
    os << "\n";
    if (s.gbt_tuning) {
      os << "  GBT grid: " << s.gbt_tuning->feasible << "/" << s.gbt_tuning->candidates
         << " candidates feasible, best mean fold MAE " << num(s.gbt_tuning->best_mean_mae)
         << " at index " << s.gbt_tuning->best_index << " (";
      bool first = true;
      for (const auto& [pname, value] : s.gbt_tuning->best_params) {
        if (!first) os << ", ";
        os << pname << "=" << value;
        first = false;
      }
      os << ")\n";
    }
    for (const std::string& w : s.warnings) os << "  warning: " << w << "\n";
  }
  return os.str();
}

void write_report(const RunResult& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw std::runtime_error("cannot write report.json");
    out << report_to_json(run).dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "report.txt");
    if (!out) throw std::runtime_error("cannot write report.txt");
    out << report_to_text(run);
  }
}

}  // namespace loadcast
