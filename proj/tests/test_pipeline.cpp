#include "loadcast/pipeline.hpp"

#include <doctest.h>

#include <fstream>

using namespace loadcast;

namespace {

OrderedJson small_config_json() {
  // 60 days, two models, no grid: quick but end-to-end
  return OrderedJson::parse(R"({
    "seed": 7,
    "output_dir": "unused",
    "input": {"kind": "synthetic", "profile": "tropical", "resolution": "30min",
              "start": "2023-09-23", "end": "2023-11-21"},
    "preprocess": {"z_threshold": 3.0, "outlier_replacement": "median", "short_gap_max_hours": 2},
    "seasons": [
      {"name": "early", "start": "2023-09-23", "end": "2023-10-20"},
      {"name": "late", "start": "2023-10-21", "end": "2023-11-21"}
    ],
    "features": {"lags": [24, 25, 48, 168], "horizon": 24, "use_temperature": true,
                 "train_fraction": 0.8, "cv_folds": 5},
    "models": {
      "gbt": {"enabled": true, "params": {"n_estimators": 25, "max_depth": 3},
               "grid": null, "early_stopping_patience": null},
      "arima": {"enabled": true, "order": [1, 1, 1]},
      "arimax": {"enabled": false},
      "svr": {"enabled": false}
    },
    "plots": true
  })");
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config parsing, validation and echo") {
  const PipelineConfig config = config_from_json(small_config_json());
  CHECK(config.seed == 7);
  CHECK(config.input.kind == InputConfig::Kind::Synthetic);
  CHECK(config.features.lags == std::vector<int>{24, 25, 48, 168});
  CHECK(config.gbt.enabled);
  CHECK(!config.svr.enabled);
  CHECK(config.enabled_models() == std::vector<std::string>{"gbt", "arima"});

  // echo parses back to the same config JSON
  const PipelineConfig again = config_from_json(to_json(config));
  CHECK(to_json(again) == to_json(config));

  auto leaky = small_config_json();
  leaky["features"]["lags"] = {12, 24};
  CHECK_THROWS_AS(config_from_json(leaky), std::invalid_argument);

  auto none = small_config_json();
  none["models"]["gbt"]["enabled"] = false;
  none["models"]["arima"]["enabled"] = false;
  CHECK_THROWS_AS(config_from_json(none), std::invalid_argument);

  auto bad_horizon = small_config_json();
  bad_horizon["features"]["horizon"] = 12;
  CHECK_THROWS_AS(config_from_json(bad_horizon), std::invalid_argument);
}

TEST_CASE("end-to-end run: structure, artifacts and ranking consistency") {
  PipelineConfig config = config_from_json(small_config_json());
  const auto out = fresh_dir("loadcast_pipeline_run");
  config.output_dir = out;

  const RunResult result = run_pipeline(config);
  REQUIRE(result.scenarios.size() == 3);  // full + 2 seasons
  Eigen::Index bundles = 0;
  for (const ScenarioResult& s : result.scenarios) {
    INFO(s.name << ": " << s.error);
    REQUIRE(s.error.empty());
    CHECK(s.models.size() == 2);  // every enabled model exactly once
    bundles += static_cast<Eigen::Index>(s.models.size());
    // ranking is recomputable from the bundles it summarizes
    std::map<std::string, MetricBundle> check;
    for (const auto& [name, outcome] : s.models) check[name] = outcome.metrics;
    CHECK(rank_models(check, "mae") == s.ranking_by_mae);
    // predictions align with the test window
    for (const auto& [name, outcome] : s.models)
      CHECK(outcome.predictions.size() == s.test_rows);
  }
  CHECK(bundles == 6);  // 2 models x (full + 2 seasons)

  CHECK(std::filesystem::exists(out / "report.json"));
  CHECK(std::filesystem::exists(out / "report.txt"));
  CHECK(std::filesystem::exists(out / "models" / "model_full_gbt.json"));
  CHECK(std::filesystem::exists(out / "models" / "model_late_arima.json"));
  CHECK(std::filesystem::exists(out / "plots" / "full_gbt_2w.svg"));
  CHECK(std::filesystem::exists(out / "plots" / "full_arima_1d.svg"));

  // report parses and matches in-memory state
  const auto report = OrderedJson::parse(slurp(out / "report.json"));
  CHECK(report.at("schema") == "loadcast.run_report/1");
  CHECK(report.at("scenarios").size() == 3);
  CHECK(report.at("scenarios").at(0).at("models").size() == 2);

  std::filesystem::remove_all(out);
}

TEST_CASE("plot files carry the expected point counts and clip warnings") {
  PipelineConfig config = config_from_json(small_config_json());
  const auto out = fresh_dir("loadcast_pipeline_plots");
  config.output_dir = out;
  const RunResult result = run_pipeline(config);

  // full scenario test window is ~264 rows -> the 336 h window must clip
  const ScenarioResult& full = result.scenarios.front();
  REQUIRE(full.test_rows < 336);
  bool clip_warning = false;
  for (const std::string& w : full.warnings)
    clip_warning = clip_warning || w.find("clipped") != std::string::npos;
  CHECK(clip_warning);

  const std::string one_day = slurp(out / "plots" / "full_gbt_1d.svg");
  // two polylines of 24 points each
  std::size_t lines = 0, pos = 0;
  while ((pos = one_day.find("<polyline", pos)) != std::string::npos) {
    ++lines;
    const std::size_t from = one_day.find("points=\"", pos) + 8;
    const std::size_t to = one_day.find('"', from);
    const std::string pts = one_day.substr(from, to - from);
    CHECK(std::count(pts.begin(), pts.end(), ',') == 24);
    pos = to;
  }
  CHECK(lines == 2);

  const std::string two_week = slurp(out / "plots" / "full_gbt_2w.svg");
  pos = two_week.find("points=\"");
  const std::string pts = two_week.substr(pos + 8, two_week.find('"', pos + 8) - pos - 8);
  CHECK(std::count(pts.begin(), pts.end(), ',') == full.test_rows);  // clipped window

  std::filesystem::remove_all(out);
}

TEST_CASE("a failing scenario does not stop the others") {
  PipelineConfig config = config_from_json(small_config_json());
  // a season with no overlap produces an empty slice that cannot be prepared
  config.seasons.push_back(SeasonRange{"mars", {2031, 1, 1}, {2031, 2, 1}});
  const auto out = fresh_dir("loadcast_pipeline_fail");
  config.output_dir = out;
  const RunResult result = run_pipeline(config);
  REQUIRE(result.scenarios.size() == 4);
  CHECK(result.scenarios[0].error.empty());
  CHECK(!result.scenarios[3].error.empty());
  CHECK(result.scenarios[3].error.find("mars") != std::string::npos);  // diagnostic names the spot
  std::filesystem::remove_all(out);
}

TEST_CASE("identical config and seed reproduce models and metrics byte for byte") {
  PipelineConfig config = config_from_json(small_config_json());
  const auto out_a = fresh_dir("loadcast_repro_a");
  const auto out_b = fresh_dir("loadcast_repro_b");

  config.output_dir = out_a;
  const RunResult a = run_pipeline(config);
  config.output_dir = out_b;
  const RunResult b = run_pipeline(config);

  for (const char* file : {"models/model_full_gbt.json", "models/model_full_arima.json",
                           "models/model_early_gbt.json"})
    CHECK(slurp(out_a / file) == slurp(out_b / file));

  for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
    for (const auto& [name, outcome] : a.scenarios[i].models) {
      const auto& other = b.scenarios[i].models.at(name);
      CHECK(metrics_to_json(outcome.metrics).dump() == metrics_to_json(other.metrics).dump());
    }
  }

  // reports agree outside the timing subtree
  auto ra = OrderedJson::parse(slurp(out_a / "report.json"));
  auto rb = OrderedJson::parse(slurp(out_b / "report.json"));
  ra.erase("timing");
  rb.erase("timing");
  ra["config"].erase("output_dir");
  rb["config"].erase("output_dir");
  CHECK(ra.dump() == rb.dump());

  std::filesystem::remove_all(out_a);
  std::filesystem::remove_all(out_b);
}

TEST_CASE("scenario filter restricts execution") {
  PipelineConfig config = config_from_json(small_config_json());
  const auto out = fresh_dir("loadcast_pipeline_filter");
  config.output_dir = out;
  RunOptions options;
  options.scenario_filter = "early";
  const RunResult result = run_pipeline(config, options);
  REQUIRE(result.scenarios.size() == 1);
  CHECK(result.scenarios[0].name == "early");
  std::filesystem::remove_all(out);
}

TEST_CASE("arima test predictions align with the feature-matrix test window") {
  PipelineConfig config = config_from_json(small_config_json());
  DataSummary summary;
  const HourlySeries raw = acquire_series(config, &summary);
  const HourlySeries clean = preprocess_series(config, raw, &summary);
  const PreparedScenario prep = prepare_scenario(config, "full", clean);
  // the series tail beyond test_start is exactly the test target vector
  REQUIRE(prep.series.size() - prep.test_start == prep.test.rows());
  for (Eigen::Index i = 0; i < prep.test.rows(); ++i) {
    CHECK(prep.series.load_kw[prep.test_start + i] == prep.test.y[i]);
    CHECK(prep.series.timestamp_at(prep.test_start + i) ==
          prep.test.row_timestamps[static_cast<std::size_t>(i)]);
  }
}
