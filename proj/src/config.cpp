#include "loadcast/config.hpp"

#include <fstream>
#include <stdexcept>

namespace loadcast {

namespace {

CivilDate date_from(const OrderedJson& j, const char* key, const CivilDate& fallback) {
  if (!j.contains(key)) return fallback;
  return parse_date(j.at(key).get<std::string>());
}

void apply_profile_overrides(ClimateProfile& p, const OrderedJson& j) {
  if (j.contains("base_load_kw")) p.base_load_kw = j.at("base_load_kw").get<double>();
  if (j.contains("daily_shape")) {
    const auto shape = j.at("daily_shape").get<std::vector<double>>();
    if (shape.size() != 24)
      throw std::invalid_argument("profile_overrides.daily_shape must have 24 entries");
    std::copy(shape.begin(), shape.end(), p.daily_shape.begin());
  }
  if (j.contains("weekend_multiplier")) p.weekend_multiplier = j.at("weekend_multiplier").get<double>();
  if (j.contains("temp_annual_mean_c")) p.temp_annual_mean_c = j.at("temp_annual_mean_c").get<double>();
  if (j.contains("temp_annual_amplitude_c"))
    p.temp_annual_amplitude_c = j.at("temp_annual_amplitude_c").get<double>();
  if (j.contains("temp_diurnal_amplitude_c"))
    p.temp_diurnal_amplitude_c = j.at("temp_diurnal_amplitude_c").get<double>();
  if (j.contains("temp_noise_std_c")) p.temp_noise_std_c = j.at("temp_noise_std_c").get<double>();
  if (j.contains("coupling_kw_per_c")) p.coupling_kw_per_c = j.at("coupling_kw_per_c").get<double>();
  if (j.contains("noise_std_kw")) p.noise_std_kw = j.at("noise_std_kw").get<double>();
  if (j.contains("noise_ar1")) p.noise_ar1 = j.at("noise_ar1").get<double>();
  if (j.contains("volatility")) p.volatility = j.at("volatility").get<double>();
}

GbtHyperParams gbt_params_from_config(const OrderedJson& j, const GbtHyperParams& base) {
  GbtHyperParams p = base;
  if (j.contains("n_estimators")) p.n_estimators = j.at("n_estimators").get<int>();
  if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("max_depth")) p.max_depth = j.at("max_depth").get<int>();
  if (j.contains("min_child_weight")) p.min_child_weight = j.at("min_child_weight").get<double>();
  if (j.contains("subsample")) p.subsample = j.at("subsample").get<double>();
  if (j.contains("colsample_bytree")) p.colsample_bytree = j.at("colsample_bytree").get<double>();
  if (j.contains("lambda")) p.lambda = j.at("lambda").get<double>();
  if (j.contains("alpha")) p.alpha = j.at("alpha").get<double>();
  if (j.contains("gamma")) p.gamma = j.at("gamma").get<double>();
  if (j.contains("loss"))
    p.loss = j.at("loss").get<std::string>() == "absolute" ? GbtLoss::AbsoluteError
                                                           : GbtLoss::SquaredError;
  if (j.contains("base_score") && !j.at("base_score").is_null())
    p.base_score = j.at("base_score").get<double>();
  return p;
}

OrderedJson gbt_params_to_config(const GbtHyperParams& p) {
  OrderedJson j;
  j["n_estimators"] = p.n_estimators;
  j["learning_rate"] = p.learning_rate;
  j["max_depth"] = p.max_depth;
  j["min_child_weight"] = p.min_child_weight;
  j["subsample"] = p.subsample;
  j["colsample_bytree"] = p.colsample_bytree;
  j["lambda"] = p.lambda;
  j["alpha"] = p.alpha;
  j["gamma"] = p.gamma;
  j["loss"] = p.loss == GbtLoss::AbsoluteError ? "absolute" : "squared";
  return j;
}

}  // namespace

ClimateProfile InputConfig::resolved_profile() const {
  ClimateProfile p;
  if (profile == "maritime")
    p = maritime_profile();
  else if (profile == "tropical")
    p = tropical_profile();
  else
    throw std::invalid_argument("unknown climate profile '" + profile + "'");
  if (profile_overrides) apply_profile_overrides(p, *profile_overrides);
  p.validate();
  return p;
}

void PipelineConfig::validate() const {
  if (features.horizon != 24)
    throw std::invalid_argument("config: the shipped pipeline forecasts a 24-hour horizon");
  for (int lag : features.lags)
    if (lag < features.horizon)
      throw std::invalid_argument("config: every lag must be >= the 24 h horizon");
  if (enabled_models().empty()) throw std::invalid_argument("config: no model enabled");
  if (features.cv_folds < 1) throw std::invalid_argument("config: cv_folds must be >= 1");
  if (!(features.train_fraction > 0.0 && features.train_fraction < 1.0))
    throw std::invalid_argument("config: train_fraction must be in (0, 1)");
  preprocess.outlier_policy.validate();
  for (const SeasonRange& s : seasons) s.validate();
  gbt.params.validate();
  if (gbt.grid) gbt.grid->validate();
  arima.order.validate();
  arimax.order.validate();
}

std::vector<std::string> PipelineConfig::enabled_models() const {
  std::vector<std::string> models;
  if (gbt.enabled) models.push_back("gbt");
  if (arima.enabled) models.push_back("arima");
  if (arimax.enabled) models.push_back("arimax");
  if (svr.enabled) models.push_back("svr");
  return models;
}

PipelineConfig config_from_json(const OrderedJson& j) {
  PipelineConfig c;
  c.seed = j.value("seed", c.seed);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();

  if (j.contains("input")) {
    const auto& ji = j.at("input");
    const std::string kind = ji.value("kind", std::string("synthetic"));
    if (kind == "synthetic")
      c.input.kind = InputConfig::Kind::Synthetic;
    else if (kind == "csv")
      c.input.kind = InputConfig::Kind::Csv;
    else
      throw std::invalid_argument("config: input.kind must be 'synthetic' or 'csv'");
    c.input.profile = ji.value("profile", c.input.profile);
    c.input.start = date_from(ji, "start", c.input.start);
    c.input.end = date_from(ji, "end", c.input.end);
    if (ji.contains("resolution"))
      c.input.resolution = resolution_from_string(ji.at("resolution").get<std::string>());
    if (ji.contains("csv_path")) c.input.csv_path = ji.at("csv_path").get<std::string>();
    if (ji.contains("csv_unit"))
      c.input.csv_unit = value_kind_from_string(ji.at("csv_unit").get<std::string>());
    if (ji.contains("injections")) {
      const auto& jj = ji.at("injections");
      c.input.injections.outlier_count = jj.value("outlier_count", 0);
      c.input.injections.outlier_sigma = jj.value("outlier_sigma", 8.0);
      c.input.injections.gap_count = jj.value("gap_count", 0);
      c.input.injections.gap_min_hours = jj.value("gap_min_hours", 1);
      c.input.injections.gap_max_hours = jj.value("gap_max_hours", 30);
    }
    if (ji.contains("profile_overrides")) c.input.profile_overrides = ji.at("profile_overrides");
  }

  if (j.contains("preprocess")) {
    const auto& jp = j.at("preprocess");
    c.preprocess.outlier_policy.z_threshold = jp.value("z_threshold", 3.0);
    const std::string repl = jp.value("outlier_replacement", std::string("median"));
    if (repl == "median")
      c.preprocess.outlier_policy.replacement = OutlierReplacement::DatasetMedian;
    else if (repl == "missing")
      c.preprocess.outlier_policy.replacement = OutlierReplacement::TreatAsMissing;
    else
      throw std::invalid_argument("config: outlier_replacement must be 'median' or 'missing'");
    c.preprocess.short_gap_max_hours = jp.value("short_gap_max_hours", 2);
  }

  if (j.contains("seasons")) {
    for (const auto& js : j.at("seasons")) {
      SeasonRange range;
      range.name = js.at("name").get<std::string>();
      range.start_date = parse_date(js.at("start").get<std::string>());
      range.end_date = parse_date(js.at("end").get<std::string>());
      c.seasons.push_back(range);
    }
  }

  if (j.contains("features")) {
    const auto& jf = j.at("features");
    if (jf.contains("lags")) c.features.lags = jf.at("lags").get<std::vector<int>>();
    c.features.horizon = jf.value("horizon", 24);
    c.features.use_temperature = jf.value("use_temperature", true);
    c.features.train_fraction = jf.value("train_fraction", 0.8);
    c.features.cv_folds = jf.value("cv_folds", 5);
  }

  if (j.contains("models")) {
    const auto& jm = j.at("models");
    if (jm.contains("gbt")) {
      const auto& jg = jm.at("gbt");
      c.gbt.enabled = jg.value("enabled", true);
      if (jg.contains("params")) c.gbt.params = gbt_params_from_config(jg.at("params"), c.gbt.params);
      if (jg.contains("grid") && !jg.at("grid").is_null()) {
        ParamGrid grid;
        for (const auto& [name, values] : jg.at("grid").items())
          grid.axes.emplace_back(name, values.get<std::vector<double>>());
        c.gbt.grid = std::move(grid);
      }
      if (jg.contains("early_stopping_patience")) {
        if (jg.at("early_stopping_patience").is_null())
          c.gbt.early_stopping_patience.reset();
        else
          c.gbt.early_stopping_patience = jg.at("early_stopping_patience").get<int>();
      }
    }
    const auto parse_arima = [&jm](const char* key, ArimaModelConfig& cfg) {
      if (!jm.contains(key)) return;
      const auto& ja = jm.at(key);
      cfg.enabled = ja.value("enabled", false);
      if (ja.contains("order")) {
        const auto order = ja.at("order").get<std::vector<int>>();
        if (order.size() != 3)
          throw std::invalid_argument("config: ARIMA order must be [p, d, q]");
        cfg.order = ArimaOrder{order[0], order[1], order[2]};
      }
    };
    parse_arima("arima", c.arima);
    parse_arima("arimax", c.arimax);
    if (jm.contains("svr")) {
      const auto& js = jm.at("svr");
      c.svr.enabled = js.value("enabled", false);
      const std::string kernel = js.value("kernel", std::string("rbf"));
      if (kernel == "rbf")
        c.svr.kernel = SvrKernel::Rbf;
      else if (kernel == "linear")
        c.svr.kernel = SvrKernel::Linear;
      else
        throw std::invalid_argument("config: svr kernel must be 'rbf' or 'linear'");
      c.svr.C = js.value("C", 1.0);
      if (js.contains("epsilon") && !js.at("epsilon").is_null())
        c.svr.epsilon = js.at("epsilon").get<double>();
      c.svr.epsilon_factor = js.value("epsilon_factor", 0.1);
      if (js.contains("gamma") && !js.at("gamma").is_null())
        c.svr.gamma = js.at("gamma").get<double>();
      c.svr.tolerance = js.value("tolerance", 1e-3);
    }
  }

  if (j.contains("evaluation")) c.mape_floor = j.at("evaluation").value("mape_floor", 0.01);
  c.plots = j.value("plots", true);

  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  OrderedJson j;
  try {
    j = OrderedJson::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

OrderedJson to_json(const PipelineConfig& c) {
  OrderedJson j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();

  OrderedJson ji;
  ji["kind"] = c.input.kind == InputConfig::Kind::Synthetic ? "synthetic" : "csv";
  ji["resolution"] = to_string(c.input.resolution);
  if (c.input.kind == InputConfig::Kind::Synthetic) {
    ji["profile"] = c.input.profile;
    ji["start"] = format_date(c.input.start);
    ji["end"] = format_date(c.input.end);
    OrderedJson jj;
    jj["outlier_count"] = c.input.injections.outlier_count;
    jj["outlier_sigma"] = c.input.injections.outlier_sigma;
    jj["gap_count"] = c.input.injections.gap_count;
    jj["gap_min_hours"] = c.input.injections.gap_min_hours;
    jj["gap_max_hours"] = c.input.injections.gap_max_hours;
    ji["injections"] = std::move(jj);
    if (c.input.profile_overrides) ji["profile_overrides"] = *c.input.profile_overrides;
  } else {
    ji["csv_path"] = c.input.csv_path.string();
    ji["csv_unit"] = to_string(c.input.csv_unit);
  }
  j["input"] = std::move(ji);

  OrderedJson jp;
  jp["z_threshold"] = c.preprocess.outlier_policy.z_threshold;
  jp["outlier_replacement"] =
      c.preprocess.outlier_policy.replacement == OutlierReplacement::DatasetMedian ? "median"
                                                                                   : "missing";
  jp["short_gap_max_hours"] = c.preprocess.short_gap_max_hours;
  j["preprocess"] = std::move(jp);

  OrderedJson seasons = OrderedJson::array();
  for (const SeasonRange& s : c.seasons) {
    OrderedJson js;
    js["name"] = s.name;
    js["start"] = format_date(s.start_date);
    js["end"] = format_date(s.end_date);
    seasons.push_back(std::move(js));
  }
  j["seasons"] = std::move(seasons);

  OrderedJson jf;
  jf["lags"] = c.features.lags;
  jf["horizon"] = c.features.horizon;
  jf["use_temperature"] = c.features.use_temperature;
  jf["train_fraction"] = c.features.train_fraction;
  jf["cv_folds"] = c.features.cv_folds;
  j["features"] = std::move(jf);

  OrderedJson jm;
  {
    OrderedJson jg;
    jg["enabled"] = c.gbt.enabled;
    jg["params"] = gbt_params_to_config(c.gbt.params);
    if (c.gbt.grid) {
      OrderedJson grid;
      for (const auto& [name, values] : c.gbt.grid->axes) grid[name] = values;
      jg["grid"] = std::move(grid);
    } else {
      jg["grid"] = nullptr;
    }
    if (c.gbt.early_stopping_patience)
      jg["early_stopping_patience"] = *c.gbt.early_stopping_patience;
    else
      jg["early_stopping_patience"] = nullptr;
    jm["gbt"] = std::move(jg);
  }
  const auto arima_json = [](const ArimaModelConfig& cfg) {
    OrderedJson ja;
    ja["enabled"] = cfg.enabled;
    ja["order"] = {cfg.order.p, cfg.order.d, cfg.order.q};
    return ja;
  };
  jm["arima"] = arima_json(c.arima);
  jm["arimax"] = arima_json(c.arimax);
  {
    OrderedJson js;
    js["enabled"] = c.svr.enabled;
    js["kernel"] = c.svr.kernel == SvrKernel::Rbf ? "rbf" : "linear";
    js["C"] = c.svr.C;
    if (c.svr.epsilon)
      js["epsilon"] = *c.svr.epsilon;
    else
      js["epsilon"] = nullptr;
    js["epsilon_factor"] = c.svr.epsilon_factor;
    if (c.svr.gamma)
      js["gamma"] = *c.svr.gamma;
    else
      js["gamma"] = nullptr;
    js["tolerance"] = c.svr.tolerance;
    jm["svr"] = std::move(js);
  }
  j["models"] = std::move(jm);

  OrderedJson je;
  je["mape_floor"] = c.mape_floor;
  j["evaluation"] = std::move(je);
  j["plots"] = c.plots;
  return j;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag) {
  // FNV-1a over the tag, then splitmix64-style finalization.
  std::uint64_t h = 14695981039346656037ull ^ seed;
  for (char ch : tag) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  h += 0x9e3779b97f4a7c15ull;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

}  // namespace loadcast
