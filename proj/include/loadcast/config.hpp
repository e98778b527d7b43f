#pragma once

#include "loadcast/arima.hpp"
#include "loadcast/features.hpp"
#include "loadcast/gbt.hpp"
#include "loadcast/preprocess.hpp"
#include "loadcast/svr.hpp"
#include "loadcast/synthetic.hpp"
#include "loadcast/tuning.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace loadcast {

using OrderedJson = nlohmann::ordered_json;

struct InputConfig {
  enum class Kind { Synthetic, Csv };
  Kind kind = Kind::Synthetic;

  // synthetic source
  std::string profile = "tropical";
  CivilDate start{2023, 9, 23};
  CivilDate end{2024, 7, 6};  // inclusive; generation covers [start, end + 1 day)
  InjectionSpec injections;
  std::optional<OrderedJson> profile_overrides;  // field-wise overrides of the preset

  // csv source
  std::filesystem::path csv_path;
  ValueKind csv_unit = ValueKind::PowerKw;

  Resolution resolution = Resolution::ThirtyMinutes;

  ClimateProfile resolved_profile() const;
};

struct PreprocessConfig {
  OutlierPolicy outlier_policy;
  int short_gap_max_hours = 2;
};

struct FeatureConfig {
  std::vector<int> lags{24, 25, 26, 48, 72, 168};
  int horizon = 24;
  bool use_temperature = true;
  double train_fraction = 0.8;
  int cv_folds = 5;
};

struct GbtModelConfig {
  bool enabled = true;
  GbtHyperParams params;
  std::optional<ParamGrid> grid;
  std::optional<int> early_stopping_patience = 20;
};

struct ArimaModelConfig {
  bool enabled = false;
  ArimaOrder order{2, 1, 2};
};

struct SvrModelConfig {
  bool enabled = false;
  SvrKernel kernel = SvrKernel::Rbf;
  double C = 1.0;
  std::optional<double> epsilon;  // absolute tube half-width; factor mode when absent
  double epsilon_factor = 0.1;    // epsilon = factor * std(train y)
  std::optional<double> gamma;
  double tolerance = 1e-3;
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "out";
  InputConfig input;
  PreprocessConfig preprocess;
  std::vector<SeasonRange> seasons;
  FeatureConfig features;
  GbtModelConfig gbt;
  ArimaModelConfig arima;
  ArimaModelConfig arimax;
  SvrModelConfig svr;
  double mape_floor = 0.01;
  bool plots = true;

  void validate() const;
  std::vector<std::string> enabled_models() const;
};

PipelineConfig config_from_json(const OrderedJson& j);
PipelineConfig load_config(const std::filesystem::path& path);
OrderedJson to_json(const PipelineConfig& config);

/// Deterministic per-component seed fan-out from the top-level seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag);

}  // namespace loadcast
