#pragma once

#include "loadcast/config.hpp"
#include "loadcast/csv.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/plot.hpp"

#include <map>
#include <optional>

namespace loadcast {

struct DataSummary {
  Eigen::Index hours = 0;
  Eigen::Index missing_before = 0;
  Eigen::Index outliers_flagged = 0;
  Eigen::Index missing_filled = 0;
  std::string source;
};

struct TuningSummary {
  std::size_t candidates = 0;
  std::size_t feasible = 0;
  std::size_t best_index = 0;
  ParamSet best_params;
  double best_mean_mae = 0.0;
  std::vector<double> candidate_mean_mae;
  std::vector<double> wall_ms;  // reported under timing only
};

struct ModelOutcome {
  MetricBundle metrics;
  Eigen::VectorXd predictions;  // over the test window
  std::string model_path;       // empty when not serialized
};

struct ScenarioResult {
  std::string name;
  Eigen::Index hours = 0;
  Eigen::Index train_rows = 0;
  Eigen::Index test_rows = 0;
  std::map<std::string, ModelOutcome> models;
  std::optional<TuningSummary> gbt_tuning;
  std::vector<std::string> ranking_by_mae;
  std::vector<std::string> warnings;
  std::string error;  // non-empty when the scenario aborted
  std::vector<std::int64_t> test_timestamps;
  Eigen::VectorXd test_actuals;
};

struct RunResult {
  PipelineConfig config;
  DataSummary data;
  std::vector<ScenarioResult> scenarios;
  std::vector<std::string> artifacts;
  double wall_ms_total = 0.0;
};

/// Step 1: synthetic generation + resampling, or CSV ingestion + resampling.
HourlySeries acquire_series(const PipelineConfig& config, DataSummary* summary = nullptr,
                            InjectionLog* log = nullptr);

/// Steps 2-3a: outlier pass then imputation on the full series.
HourlySeries preprocess_series(const PipelineConfig& config, const HourlySeries& raw,
                               DataSummary* summary = nullptr);

/// Step 3b: "full" plus one slice per configured season range.
std::vector<std::pair<std::string, HourlySeries>> scenario_series(const PipelineConfig& config,
                                                                  const HourlySeries& clean);

struct PreparedScenario {
  std::string name;
  HourlySeries series;
  FeatureMatrix train;  // standardized
  FeatureMatrix test;   // standardized with train statistics
  ScalerStats scaler;
  int max_lag = 0;
  Eigen::Index test_start = 0;  // series index of the first test target hour
};

PreparedScenario prepare_scenario(const PipelineConfig& config, const std::string& name,
                                  const HourlySeries& series);

/// Day-ahead rolling evaluation: one 24 h walk-forward block per test day,
/// history extended with observed actuals between blocks.
Eigen::VectorXd walk_forward_day_ahead(const ArimaModel& model, const HourlySeries& series,
                                       Eigen::Index test_start, bool use_exog);

struct RunOptions {
  std::optional<std::string> scenario_filter;
  bool write_outputs = true;
  bool use_full_grid = false;  // substitute the full 65,536-candidate search space
  int max_threads = 0;
};

/// Steps 1-6 for every scenario; a failing scenario records its diagnostic
/// and does not stop the others.
RunResult run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

/// The canonical 8-knob search space (4 values per knob).
ParamGrid full_search_grid();

OrderedJson metrics_to_json(const MetricBundle& bundle);
OrderedJson report_to_json(const RunResult& result);
std::string report_to_text(const RunResult& result);
void write_report(const RunResult& result, const std::filesystem::path& dir);

}  // namespace loadcast
