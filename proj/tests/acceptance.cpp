// Acceptance suite: every criterion prints one [PASS]/[FAIL] line with its
// runtime; the process exit code is the number of failures.

#include "loadcast/pipeline.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace loadcast;

namespace {

#ifndef LOADCAST_CONFIG_DIR
#define LOADCAST_CONFIG_DIR "configs"
#endif

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

class Runner {
 public:
  template <typename Fn>
  void criterion(int number, const std::string& title, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
      report(number, title, true, "", t0);
    } catch (const std::exception& e) {
      ++failures_;
      report(number, title, false, e.what(), t0);
    }
  }
  int failures() const { return failures_; }

 private:
  void report(int number, const std::string& title, bool ok, const std::string& detail,
              std::chrono::steady_clock::time_point t0) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", number,
                title.c_str(), seconds, detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
  }
  int failures_ = 0;
};

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

FeatureMatrix matrix_from(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  FeatureMatrix m;
  m.X = X;
  m.y = y;
  for (Eigen::Index c = 0; c < X.cols(); ++c) m.feature_names.push_back("f" + std::to_string(c));
  m.row_timestamps.resize(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    m.row_timestamps[static_cast<std::size_t>(i)] = i * 3600;
  return m;
}

// Structured regression surface with noise, a stand-in for desk-scale data.
FeatureMatrix synthetic_matrix(Eigen::Index rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(rows, 5);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < 5; ++c) X(r, c) = gauss(rng);
    y[r] = 1.2 + std::sin(X(r, 0)) + 0.5 * X(r, 1) * (X(r, 2) > 0 ? 1.0 : -1.0) +
           0.1 * gauss(rng);
  }
  return matrix_from(X, y);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

double mape_of(const ScenarioResult& s, const std::string& model) {
  const auto it = s.models.find(model);
  require(it != s.models.end(), "missing model " + model + " in scenario " + s.name);
  require(it->second.metrics.mape.has_value(), model + " MAPE undefined");
  return *it->second.metrics.mape;
}

const ScenarioResult& full_scenario(const RunResult& run) {
  for (const ScenarioResult& s : run.scenarios)
    if (s.name == "full") {
      require(s.error.empty(), "full scenario failed: " + s.error);
      return s;
    }
  throw Failure("no full scenario in the run");
}

struct ClimateRuns {
  RunResult first;
  RunResult second;
  std::filesystem::path out_first;
  std::filesystem::path out_second;
};

ClimateRuns run_twice(const std::filesystem::path& config_path, const std::string& tag) {
  PipelineConfig config = load_config(config_path);
  ClimateRuns runs;
  runs.out_first = std::filesystem::temp_directory_path() / ("loadcast_acc_" + tag + "_a");
  runs.out_second = std::filesystem::temp_directory_path() / ("loadcast_acc_" + tag + "_b");
  std::filesystem::remove_all(runs.out_first);
  std::filesystem::remove_all(runs.out_second);
  config.output_dir = runs.out_first;
  runs.first = run_pipeline(config);
  config.output_dir = runs.out_second;
  runs.second = run_pipeline(config);
  return runs;
}

}  // namespace

int main() {
  Runner runner;
  std::optional<ClimateRuns> maritime, tropical;

  runner.criterion(1, "metric oracle on hand-computed values", [] {
    const MetricBundle b = evaluate(vec({1, 2, 3}), vec({2, 2, 2}));
    require(std::abs(b.mae - 0.6667) < 1e-3, "MAE off");
    require(std::abs(b.mse - 0.6667) < 1e-3, "MSE off");
    require(std::abs(b.rmse - 0.8165) < 1e-3, "RMSE off");
    require(b.mape && std::abs(*b.mape - 44.44) < 1e-1, "MAPE off");
    require(b.r2 && std::abs(*b.r2 - 0.0) < 1e-3, "R2 off");
    const Eigen::VectorXd y = vec({0.4, 1.1, 2.2, 0.9});
    const MetricBundle p = evaluate(y, y);
    require(p.mae == 0.0 && p.mse == 0.0 && p.rmse == 0.0, "perfect fit must be exactly zero");
    require(p.mape && *p.mape == 0.0, "perfect-fit MAPE must be exactly zero");
    require(p.r2 && *p.r2 == 1.0, "perfect-fit R2 must be exactly one");
  });

  runner.criterion(2, "split finding matches exhaustive enumeration on 1200 datasets", [] {
    std::mt19937_64 rng(20240923);
    std::uniform_int_distribution<int> rows_pick(2, 8), cols_pick(1, 3), grid_pick(0, 4);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    const double lambdas[] = {0.0, 0.1, 1.0};
    const double gammas[] = {0.0, 0.5};
    int found = 0;
    for (int trial = 0; trial < 1200; ++trial) {
      const int rows = rows_pick(rng), cols = cols_pick(rng);
      Eigen::MatrixXd X(rows, cols);
      Eigen::VectorXd g(rows), h = Eigen::VectorXd::Ones(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c)
          X(r, c) = trial % 3 == 0 ? static_cast<double>(grid_pick(rng)) : unit(rng);
        g[r] = trial % 2 == 0 ? unit(rng) : std::round(unit(rng));
      }
      const double lambda = lambdas[trial % 3];
      const double gamma = gammas[trial % 2];
      const auto ours = best_split(X, g, h, lambda, gamma, 0.0);
      const auto expected = oracles::best_split_exhaustive(X, g, h, lambda, gamma, 0.0);
      require(ours.has_value() == expected.found, "existence disagrees at trial " +
                                                      std::to_string(trial));
      if (!expected.found) continue;
      ++found;
      require(ours->feature == expected.feature,
              "feature disagrees at trial " + std::to_string(trial));
      require(ours->threshold == expected.threshold,
              "threshold disagrees at trial " + std::to_string(trial));
      require(ours->gain == expected.gain, "gain disagrees at trial " + std::to_string(trial));
    }
    require(found >= 500, "too few datasets produced splits: " + std::to_string(found));
  });

  runner.criterion(3, "training MSE non-increasing over 100 rounds on 500 rows", [] {
    const FeatureMatrix train = synthetic_matrix(500, 77);
    GbtHyperParams params;
    params.n_estimators = 100;
    params.learning_rate = 0.1;
    params.subsample = 1.0;
    params.colsample_bytree = 1.0;
    params.gamma = 0.0;
    params.max_depth = 5;
    const GbtModel model = fit_gbt(train, params);
    require(model.trees.size() == 100, "expected 100 rounds");
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(train.rows(), model.base_score);
    double prev = (pred - train.y).squaredNorm() / static_cast<double>(train.rows());
    for (const RegressionTree& tree : model.trees) {
      for (Eigen::Index i = 0; i < train.rows(); ++i)
        pred[i] += model.learning_rate * tree.value_at(train.X.row(i));
      const double mse = (pred - train.y).squaredNorm() / static_cast<double>(train.rows());
      require(mse <= prev + 1e-12, "MSE increased by " + std::to_string(mse - prev));
      prev = mse;
    }
  });

  runner.criterion(4, "lambda shrinks leaf weights; alpha can zero the tree", [] {
    const FeatureMatrix train = synthetic_matrix(300, 78);
    GbtHyperParams params;
    params.n_estimators = 1;
    params.max_depth = 4;
    params.lambda = 0.0;
    const GbtModel model = fit_gbt(train, params);
    int leaves = 0;
    for (const TreeNode& node : model.trees[0].nodes) {
      if (!node.is_leaf()) continue;
      ++leaves;
      double prev = std::abs(leaf_weight(node.sum_grad, node.sum_hess, 0.0, 0.0));
      for (double lambda : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double w = std::abs(leaf_weight(node.sum_grad, node.sum_hess, lambda, 0.0));
        require(w <= prev, "|leaf weight| must weakly decrease in lambda");
        prev = w;
      }
    }
    require(leaves >= 4, "tree too small to be meaningful");

    auto [g, h] = gradients(train.y, Eigen::VectorXd::Constant(train.rows(), train.y.mean()),
                            GbtLoss::SquaredError);
    GbtHyperParams zeroing = params;
    zeroing.alpha = g.cwiseAbs().sum() + 1.0;
    const GbtModel zeroed = fit_gbt(train, zeroing);
    for (const TreeNode& node : zeroed.trees[0].nodes)
      if (node.is_leaf()) require(node.weight == 0.0, "alpha above every |G| must zero leaves");
  });

  runner.criterion(5, "ARIMA/ARIMAX recovery and exact differencing round trips", [] {
    const Eigen::VectorXd ar1 = oracles::simulate_ar1(0.7, 0.0, 1.0, 2000, 5001);
    const ArimaModel fitted = fit_arima(ar1, {1, 0, 0});
    require(fitted.phi[0] >= 0.6 && fitted.phi[0] <= 0.8,
            "phi = " + std::to_string(fitted.phi[0]) + " outside [0.6, 0.8]");

    std::mt19937_64 rng(5002);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd temp(2000);
    for (Eigen::Index i = 0; i < 2000; ++i) temp[i] = gauss(rng);
    const Eigen::VectorXd y = 2.0 * temp + oracles::simulate_ar1(0.7, 0.0, 0.5, 2000, 5003);
    const ArimaModel xfit = fit_arimax(y, temp, {1, 0, 0});
    require(xfit.beta && *xfit.beta >= 1.8 && *xfit.beta <= 2.2,
            "beta = " + std::to_string(xfit.beta.value_or(-1)) + " outside [1.8, 2.2]");

    std::uniform_int_distribution<int> pick(0, 8192);
    for (int d = 1; d <= 3; ++d) {
      Eigen::VectorXd x(300);
      for (Eigen::Index i = 0; i < 300; ++i) x[i] = pick(rng) / 1024.0;  // exactly representable
      const Eigen::Index m = 100;
      const Eigen::VectorXd rebuilt =
          undifference(difference(x, d).tail(300 - m), anchors_for(x.head(m), d));
      for (Eigen::Index i = 0; i < rebuilt.size(); ++i)
        require(rebuilt[i] == x[m + i], "round trip not exact at d = " + std::to_string(d));
    }
  });

  runner.criterion(6, "SVR dual feasibility and linear-target recovery", [] {
    std::mt19937_64 rng(6001);
    std::normal_distribution<double> gauss(0.0, 1.0);
    {
      Eigen::MatrixXd X(400, 1);
      Eigen::VectorXd y(400);
      for (Eigen::Index i = 0; i < 400; ++i) {
        X(i, 0) = gauss(rng);
        y[i] = 3.0 * X(i, 0) + 1.0;
      }
      SvrParams params;
      params.kernel = SvrKernel::Linear;
      params.C = 1000.0;
      params.epsilon = 0.01;
      const SvrModel model = fit_svr(matrix_from(X, y), params);
      const double worst = (predict_svr(model, X) - y).cwiseAbs().maxCoeff();
      require(worst <= 0.05, "train error " + std::to_string(worst) + " above 0.05");
    }
    {
      Eigen::MatrixXd X(800, 3);
      Eigen::VectorXd y(800);
      for (Eigen::Index i = 0; i < 800; ++i) {
        for (Eigen::Index c = 0; c < 3; ++c) X(i, c) = gauss(rng);
        y[i] = std::sin(X(i, 0)) + 0.3 * X(i, 1) + 0.05 * gauss(rng);
      }
      SvrParams params;
      params.C = 1.5;
      params.epsilon = 0.05;
      const SvrModel model = fit_svr(matrix_from(X, y), params);
      for (Eigen::Index i = 0; i < model.dual_coeffs.size(); ++i)
        require(std::abs(model.dual_coeffs[i]) <= params.C + 1e-9, "|dual| above C");
      require(std::abs(model.dual_coeffs.sum()) <= 1e-6, "dual sum above 1e-6");
    }
  });

  runner.criterion(7, "expanding-window folds: causality, expansion, tiling (n in [6,500])", [] {
    for (Eigen::Index n = 6; n <= 500; ++n) {
      const auto folds = ts_cv_folds(n, 5);
      require(folds.size() == 5, "expected 5 folds");
      const Eigen::Index t = n / 6;
      for (std::size_t i = 0; i < folds.size(); ++i) {
        require(folds[i].train_end >= 1 && folds[i].val_end > folds[i].train_end,
                "degenerate fold at n = " + std::to_string(n));
        if (i > 0) {
          require(folds[i].train_end > folds[i - 1].train_end, "training must strictly expand");
          require(folds[i].train_end == folds[i - 1].val_end,
                  "validation windows must be consecutive");
        }
      }
      // the validation windows tile [n - 5t, n) exactly once; the first
      // window starts at t itself whenever 6 divides n
      require(folds.front().train_end == n - 5 * t, "first validation start");
      require(folds.back().val_end == n, "last validation end");
      if (n % 6 == 0)
        require(folds.front().train_end == t, "tiling must start at t when 6 | n");
    }
  });

  runner.criterion(8, "preprocess recovers injected spikes and gaps exactly", [] {
    ClimateProfile profile;
    profile.name = "oracle";
    profile.base_load_kw = 1.0;
    for (int h = 0; h < 24; ++h)
      profile.daily_shape[static_cast<std::size_t>(h)] =
          1.0 + 0.25 * std::sin(2.0 * 3.14159265358979323846 * (h - 12) / 24.0);
    profile.weekend_multiplier = 1.0;
    profile.temp_annual_mean_c = 15.0;
    profile.temp_annual_amplitude_c = 2.0;
    profile.temp_diurnal_amplitude_c = 1.0;
    profile.temp_noise_std_c = 0.3;
    profile.coupling_kw_per_c = 0.02;
    profile.noise_std_kw = 0.02;
    profile.noise_ar1 = 0.7;
    profile.volatility = 0.0;

    const std::int64_t start = days_from_civil({2023, 9, 23}) * kSecondsPerDay;
    InjectionSpec inject;
    inject.outlier_count = 12;
    inject.outlier_sigma = 8.0;
    inject.gap_count = 5;
    inject.gap_min_hours = 1;
    inject.gap_max_hours = 30;
    const SyntheticData data = generate(profile, start, start + 150 * kSecondsPerDay,
                                        Resolution::ThirtyMinutes, 20230923, inject);
    const HourlySeries s =
        resample_to_hourly(data.records, {ValueKind::PowerKw, 2});

    const auto mask = detect_outliers(s, {3.0, OutlierReplacement::DatasetMedian});
    std::set<Eigen::Index> spikes;
    for (const auto& [idx, magnitude] : data.log.outliers) spikes.insert(idx);
    for (Eigen::Index i = 0; i < s.size(); ++i)
      require(mask[static_cast<std::size_t>(i)] == (spikes.count(i) > 0),
              "flag mismatch at hour " + std::to_string(i));

    std::set<Eigen::Index> gap_hours;
    for (const auto& [first, last] : data.log.gaps)
      for (Eigen::Index i = first; i <= last; ++i) gap_hours.insert(i);
    for (Eigen::Index i = 0; i < s.size(); ++i)
      require(is_missing(s.load_kw[i]) == (gap_hours.count(i) > 0),
              "gap mismatch at hour " + std::to_string(i));

    const HourlySeries filled = impute(s, 2);
    require(filled.missing_load_count() == 0, "missing values remain after impute");
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (gap_hours.count(i) == 0)
        require(filled.load_kw[i] == s.load_kw[i], "impute touched a non-gap hour");
  });

  runner.criterion(9, "end-to-end ranking: tuned GBT beats every baseline in both climates", [&] {
    maritime = run_twice(std::filesystem::path(LOADCAST_CONFIG_DIR) / "acceptance_maritime.json",
                         "maritime");
    tropical = run_twice(std::filesystem::path(LOADCAST_CONFIG_DIR) / "acceptance_tropical.json",
                         "tropical");
    for (const auto* runs : {&*maritime, &*tropical}) {
      const ScenarioResult& full = full_scenario(runs->first);
      const double gbt = mape_of(full, "gbt");
      for (const char* baseline : {"svr", "arima", "arimax"}) {
        const double other = mape_of(full, baseline);
        require(gbt < other, runs->first.data.source + ": GBT MAPE " + std::to_string(gbt) +
                                 " not below " + baseline + " " + std::to_string(other));
      }
    }
    const auto& trop_full = full_scenario(tropical->first);
    const auto& r2 = trop_full.models.at("gbt").metrics.r2;
    require(r2.has_value(), "tropical GBT R2 undefined");
    require(*r2 >= 0.85, "tropical GBT R2 " + std::to_string(*r2) + " below 0.85");
  });

  runner.criterion(10, "volatile climate is at least as hard as the stable one", [&] {
    require(maritime && tropical, "criterion 9 runs unavailable");
    const double hard = mape_of(full_scenario(maritime->first), "gbt");
    const double easy = mape_of(full_scenario(tropical->first), "gbt");
    require(hard >= easy, "maritime GBT MAPE " + std::to_string(hard) +
                              " below tropical " + std::to_string(easy));
  });

  runner.criterion(11, "byte-identical models and metrics across reruns", [&] {
    require(maritime && tropical, "criterion 9 runs unavailable");
    for (const auto* runs : {&*maritime, &*tropical}) {
      for (const char* model : {"gbt", "arima", "arimax", "svr"}) {
        const std::string file = std::string("models/model_full_") + model + ".json";
        require(slurp(runs->out_first / file) == slurp(runs->out_second / file),
                file + " differs between reruns");
      }
      const ScenarioResult& a = full_scenario(runs->first);
      const ScenarioResult& b = full_scenario(runs->second);
      for (const auto& [name, outcome] : a.models)
        require(metrics_to_json(outcome.metrics).dump() ==
                    metrics_to_json(b.models.at(name).metrics).dump(),
                name + " metric bundle differs between reruns");
    }
  });

  runner.criterion(12, "grid bookkeeping and shipped reference configurations", [] {
    const auto candidates = enumerate_grid(full_search_grid());
    require(candidates.size() == 65536, "full grid must have 65,536 candidates, got " +
                                            std::to_string(candidates.size()));
    require(candidates.front() == ParamSet{{"n_estimators", 50},
                                           {"learning_rate", 0.01},
                                           {"max_depth", 3},
                                           {"min_child_weight", 1},
                                           {"subsample", 0.7},
                                           {"colsample_bytree", 0.7},
                                           {"lambda", 0},
                                           {"alpha", 0}},
            "first candidate out of order");
    require(candidates.back() == ParamSet{{"n_estimators", 200},
                                          {"learning_rate", 0.2},
                                          {"max_depth", 10},
                                          {"min_child_weight", 7},
                                          {"subsample", 1.0},
                                          {"colsample_bytree", 1.0},
                                          {"lambda", 10},
                                          {"alpha", 10}},
            "last candidate out of order");

    for (const char* name : {"maritime_summer", "maritime_winter", "maritime_full", "tropical_dry",
                             "tropical_wet", "tropical_full"}) {
      const auto path = std::filesystem::path(LOADCAST_CONFIG_DIR) / "reference" /
                        (std::string(name) + ".json");
      const PipelineConfig config = load_config(path);
      const HourlySeries clean = preprocess_series(config, acquire_series(config));
      const PreparedScenario prep = prepare_scenario(config, "full", clean);
      auto [model, metrics] = final_fit(prep.train, prep.test, config.gbt.params,
                                        config.gbt.early_stopping_patience, config.mape_floor);
      require(std::isfinite(metrics.mae) && metrics.mae > 0.0,
              std::string(name) + ": degenerate fit");
    }
  });

  if (maritime) {
    std::filesystem::remove_all(maritime->out_first);
    std::filesystem::remove_all(maritime->out_second);
  }
  if (tropical) {
    std::filesystem::remove_all(tropical->out_first);
    std::filesystem::remove_all(tropical->out_second);
  }

  if (runner.failures() == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", runner.failures());
  return runner.failures();
}
