#include "loadcast/pipeline.hpp"
#include "loadcast/version.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace loadcast;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> scenario;
  bool full_grid = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "pipeline configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "override the top-level seed");
  cmd->add_option("--out", flags.out_dir, "override the output directory");
  cmd->add_option("--scenario", flags.scenario, "run only the named scenario");
  cmd->add_flag("--full-grid", flags.full_grid,
                "search the full 65,536-candidate hyperparameter space");
}

PipelineConfig configure(const CommonFlags& flags) {
  PipelineConfig config = load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out_dir) config.output_dir = *flags.out_dir;
  config.validate();
  return config;
}

void write_json(const std::filesystem::path& path, const OrderedJson& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

int cmd_generate(const CommonFlags& flags) {
  const PipelineConfig config = configure(flags);
  if (config.input.kind != InputConfig::Kind::Synthetic)
    throw std::runtime_error("generate: input.kind must be 'synthetic'");
  const ClimateProfile profile = config.input.resolved_profile();
  const std::int64_t start = days_from_civil(config.input.start) * kSecondsPerDay;
  const std::int64_t end = (days_from_civil(config.input.end) + 1) * kSecondsPerDay;
  const SyntheticData data = generate(profile, start, end, config.input.resolution,
                                      derive_seed(config.seed, "synthdata"),
                                      config.input.injections);

  std::filesystem::create_directories(config.output_dir);
  const auto csv_path = config.output_dir / ("data_" + profile.name + ".csv");
  write_records_csv(csv_path, data.records);

  OrderedJson meta;
  meta["schema"] = "loadcast.dataset_meta/1";
  meta["csv"] = csv_path.filename().string();
  meta["unit"] = to_string(native_value_kind(config.input.resolution));
  meta["resolution"] = to_string(config.input.resolution);
  meta["rows"] = data.records.size();
  meta["profile"] = profile.name;
  meta["start"] = format_date(config.input.start);
  meta["end"] = format_date(config.input.end);
  meta["seed"] = config.seed;
  write_json(config.output_dir / ("data_" + profile.name + ".meta.json"), meta);

  OrderedJson inj;
  inj["schema"] = "loadcast.injection_log/1";
  OrderedJson outliers = OrderedJson::array();
  for (const auto& [idx, magnitude] : data.log.outliers) outliers.push_back({idx, magnitude});
  OrderedJson gaps = OrderedJson::array();
  for (const auto& [first, last] : data.log.gaps) gaps.push_back({first, last});
  inj["outlier_hours"] = std::move(outliers);
  inj["gap_hour_ranges"] = std::move(gaps);
  write_json(config.output_dir / ("data_" + profile.name + ".injections.json"), inj);

  std::cout << "wrote " << data.records.size() << " records to " << csv_path.string() << "\n";
  return 0;
}

int cmd_preprocess(const CommonFlags& flags) {
  const PipelineConfig config = configure(flags);
  DataSummary summary;
  const HourlySeries raw = acquire_series(config, &summary);
  const HourlySeries clean = preprocess_series(config, raw, &summary);

  std::filesystem::create_directories(config.output_dir);
  OrderedJson j;
  j["schema"] = "loadcast.preprocess_summary/1";
  j["source"] = summary.source;
  j["hours"] = summary.hours;
  j["missing_before_impute"] = summary.missing_before;
  j["outliers_flagged"] = summary.outliers_flagged;
  j["missing_filled"] = summary.missing_filled;
  OrderedJson written = OrderedJson::array();
  for (const auto& [name, series] : scenario_series(config, clean)) {
    if (flags.scenario && name != *flags.scenario) continue;
    const auto path = config.output_dir / ("preprocessed_" + name + ".csv");
    if (series.size() == 0) {
      std::cout << "warning: scenario '" << name << "' does not overlap the series, skipped\n";
      continue;
    }
    write_hourly_csv(path, series);
    OrderedJson js;
    js["scenario"] = name;
    js["hours"] = series.size();
    js["file"] = path.filename().string();
    written.push_back(std::move(js));
    std::cout << "wrote " << series.size() << " h to " << path.string() << "\n";
  }
  j["outputs"] = std::move(written);
  write_json(config.output_dir / "preprocess_summary.json", j);
  return 0;
}

int cmd_tune(const CommonFlags& flags) {
  const PipelineConfig config = configure(flags);
  if (!config.gbt.enabled) throw std::runtime_error("tune: gbt model is disabled in the config");
  std::optional<ParamGrid> grid = config.gbt.grid;
  if (flags.full_grid) grid = full_search_grid();
  if (!grid) throw std::runtime_error("tune: no grid in the config (or pass --full-grid)");

  const HourlySeries raw = acquire_series(config);
  const HourlySeries clean = preprocess_series(config, raw);
  std::filesystem::create_directories(config.output_dir);

  for (const auto& [name, series] : scenario_series(config, clean)) {
    if (flags.scenario && name != *flags.scenario) continue;
    const PreparedScenario prep = prepare_scenario(config, name, series);
    GbtHyperParams base = config.gbt.params;
    base.seed = derive_seed(config.seed, "gbt/" + name);
    const FoldTrainer trainer = [&base](const FeatureMatrix& tr, const FeatureMatrix& va,
                                        const ParamSet& ps) {
      GbtHyperParams p = gbt_params_from(ps, base);
      p.early_stopping_patience.reset();
      return predict(fit_gbt(tr, p, nullptr), va);
    };
    const TuningResult tuned = grid_search(prep.train, *grid, config.features.cv_folds, trainer);

    OrderedJson j;
    j["schema"] = "loadcast.tuning_result/1";
    j["scenario"] = name;
    j["folds"] = tuned.folds;
    j["best_index"] = tuned.best_index;
    OrderedJson candidates = OrderedJson::array();
    for (const CandidateResult& cr : tuned.candidates) {
      OrderedJson jc;
      OrderedJson params;
      for (const auto& [pname, value] : cr.params) params[pname] = value;
      jc["params"] = std::move(params);
      jc["feasible"] = cr.feasible;
      jc["fold_mae"] = cr.fold_mae;
      jc["mean_mae"] = cr.feasible ? OrderedJson(cr.mean_mae) : OrderedJson(nullptr);
      jc["error"] = cr.error.empty() ? OrderedJson(nullptr) : OrderedJson(cr.error);
      jc["wall_ms"] = cr.wall_ms;
      candidates.push_back(std::move(jc));
    }
    j["candidates"] = std::move(candidates);
    write_json(config.output_dir / ("tuning_" + name + "_gbt.json"), j);

    // Reusable config fragment carrying the winning parameters.
    OrderedJson fragment;
    OrderedJson params = to_json(config).at("models").at("gbt").at("params");
    for (const auto& [pname, value] : tuned.best_params) {
      if (pname == "n_estimators" || pname == "max_depth" || pname == "seed")
        params[pname] = static_cast<std::int64_t>(std::llround(value));
      else
        params[pname] = value;
    }
    fragment["models"]["gbt"]["params"] = std::move(params);
    write_json(config.output_dir / ("best_params_" + name + ".json"), fragment);

    std::cout << "scenario " << name << ": best mean fold MAE "
              << tuned.candidates[tuned.best_index].mean_mae << " (candidate " << tuned.best_index
              << " of " << tuned.candidates.size() << ")\n";
  }
  return 0;
}

int cmd_train(const CommonFlags& flags) {
  const PipelineConfig config = configure(flags);
  const HourlySeries raw = acquire_series(config);
  const HourlySeries clean = preprocess_series(config, raw);
  const auto model_dir = config.output_dir / "models";
  std::filesystem::create_directories(model_dir);

  for (const auto& [name, series] : scenario_series(config, clean)) {
    if (flags.scenario && name != *flags.scenario) continue;
    const PreparedScenario prep = prepare_scenario(config, name, series);
    if (config.gbt.enabled) {
      GbtHyperParams params = config.gbt.params;
      params.seed = derive_seed(config.seed, "gbt/" + name);
      auto [model, metrics] =
          final_fit(prep.train, prep.test, params, config.gbt.early_stopping_patience,
                    config.mape_floor);
      save_gbt_model(model, model_dir / ("model_" + name + "_gbt.json"));
      std::cout << name << "/gbt trained (" << model.trees_used() << " trees used)\n";
    }
    if (config.arima.enabled) {
      const ArimaModel model =
          fit_arima(prep.series.load_kw.head(prep.test_start), config.arima.order);
      save_arima_model(model, model_dir / ("model_" + name + "_arima.json"));
      std::cout << name << "/arima trained\n";
    }
    if (config.arimax.enabled) {
      const ArimaModel model =
          fit_arimax(prep.series.load_kw.head(prep.test_start),
                     prep.series.temperature_c.head(prep.test_start), config.arimax.order);
      save_arima_model(model, model_dir / ("model_" + name + "_arimax.json"));
      std::cout << name << "/arimax trained\n";
    }
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
        params.epsilon =
            config.svr.epsilon_factor * std::sqrt((prep.train.y.array() - mean).square().mean());
      }
      const SvrModel model = fit_svr(prep.train, params);
      save_svr_model(model, model_dir / ("model_" + name + "_svr.json"));
      std::cout << name << "/svr trained (" << model.dual_coeffs.size() << " SVs)\n";
    }
  }
  return 0;
}

int cmd_evaluate(const CommonFlags& flags) {
  const PipelineConfig config = configure(flags);
  const HourlySeries raw = acquire_series(config);
  const HourlySeries clean = preprocess_series(config, raw);
  const auto model_dir = config.output_dir / "models";

  for (const auto& [name, series] : scenario_series(config, clean)) {
    if (flags.scenario && name != *flags.scenario) continue;
    const PreparedScenario prep = prepare_scenario(config, name, series);
    std::map<std::string, MetricBundle> bundles;
    OrderedJson models;
    for (const std::string& model_name : config.enabled_models()) {
      const auto path = model_dir / ("model_" + name + "_" + model_name + ".json");
      if (!std::filesystem::exists(path))
        throw std::runtime_error("evaluate: missing model file " + path.string() +
                                 " (run the train subcommand first)");
      Eigen::VectorXd pred;
      if (model_name == "gbt") {
        pred = predict(load_gbt_model(path), prep.test);
      } else if (model_name == "svr") {
        pred = predict_svr(load_svr_model(path), prep.test.X);
      } else {
        const ArimaModel model = load_arima_model(path);
        pred = walk_forward_day_ahead(model, prep.series, prep.test_start,
                                      model.beta.has_value());
      }
      const MetricBundle bundle = evaluate(prep.test.y, pred, config.mape_floor);
      bundles[model_name] = bundle;
      models[model_name] = metrics_to_json(bundle);
    }
    OrderedJson j;
    j["schema"] = "loadcast.evaluation/1";
    j["scenario"] = name;
    j["test_rows"] = prep.test.rows();
    j["models"] = std::move(models);
    j["ranking_by_mae"] = rank_models(bundles, "mae");
    write_json(config.output_dir / ("eval_" + name + ".json"), j);
    std::cout << "scenario " << name << ":";
    for (const std::string& m : rank_models(bundles, "mae")) std::cout << " " << m;
    std::cout << " (best first by MAE)\n";
  }
  return 0;
}

int cmd_run(const CommonFlags& flags) {
  const PipelineConfig config = configure(flags);
  RunOptions options;
  options.scenario_filter = flags.scenario;
  options.use_full_grid = flags.full_grid;
  const RunResult result = run_pipeline(config, options);
  std::cout << report_to_text(result);
  std::cout << "\nreport written to " << (config.output_dir / "report.json").string() << "\n";
  for (const ScenarioResult& s : result.scenarios)
    if (!s.error.empty()) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loadcast — 24-hour-ahead residential load forecasting toolkit"};
  app.set_version_flag("--version", loadcast::kVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  auto* generate = app.add_subcommand("generate", "emit a synthetic dataset as CSV + sidecars");
  auto* preprocess = app.add_subcommand("preprocess", "resample, clean and split the input data");
  auto* tune = app.add_subcommand("tune", "grid-search GBT hyperparameters with expanding-window CV");
  auto* train = app.add_subcommand("train", "fit the configured models and serialize them");
  auto* evaluate = app.add_subcommand("evaluate", "score serialized models on the test window");
  auto* run = app.add_subcommand("run", "full pipeline: ingest, clean, tune, fit, evaluate, export");
  for (auto* cmd : {generate, preprocess, tune, train, evaluate, run}) add_common(cmd, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(flags);
    if (preprocess->parsed()) return cmd_preprocess(flags);
    if (tune->parsed()) return cmd_tune(flags);
    if (train->parsed()) return cmd_train(flags);
    if (evaluate->parsed()) return cmd_evaluate(flags);
    if (run->parsed()) return cmd_run(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
