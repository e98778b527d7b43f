#include "loadcast/tuning.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace loadcast {

void ParamGrid::validate() const {
  if (axes.empty()) throw std::invalid_argument("ParamGrid: no axes");
  for (const auto& [name, values] : axes)
    if (values.empty())
      throw std::invalid_argument("ParamGrid: axis '" + name + "' has no candidate values");
}

std::size_t ParamGrid::size() const {
  std::size_t total = 1;
  for (const auto& [name, values] : axes) total *= values.size();
  return total;
}

std::vector<ParamSet> enumerate_grid(const ParamGrid& grid) {
  grid.validate();
  const std::size_t total = grid.size();
  std::vector<ParamSet> out;
  out.reserve(total);
  std::vector<std::size_t> odometer(grid.axes.size(), 0);
  for (std::size_t c = 0; c < total; ++c) {
    ParamSet params;
    params.reserve(grid.axes.size());
    for (std::size_t a = 0; a < grid.axes.size(); ++a)
      params.emplace_back(grid.axes[a].first, grid.axes[a].second[odometer[a]]);
    out.push_back(std::move(params));
    // increment, last axis fastest
    for (std::size_t a = grid.axes.size(); a-- > 0;) {
      if (++odometer[a] < grid.axes[a].second.size()) break;
      odometer[a] = 0;
    }
  }
  return out;
}

GbtHyperParams gbt_params_from(const ParamSet& params, const GbtHyperParams& base) {
  GbtHyperParams p = base;
  for (const auto& [name, value] : params) {
    if (name == "n_estimators")
      p.n_estimators = static_cast<int>(std::llround(value));
    else if (name == "learning_rate")
      p.learning_rate = value;
    else if (name == "max_depth")
      p.max_depth = static_cast<int>(std::llround(value));
    else if (name == "min_child_weight")
      p.min_child_weight = value;
    else if (name == "subsample")
      p.subsample = value;
    else if (name == "colsample_bytree")
      p.colsample_bytree = value;
    else if (name == "lambda")
      p.lambda = value;
    else if (name == "alpha")
      p.alpha = value;
    else if (name == "gamma")
      p.gamma = value;
    else if (name == "seed")
      p.seed = static_cast<std::uint64_t>(std::llround(value));
    else
      throw std::invalid_argument("gbt_params_from: unknown hyperparameter '" + name + "'");
  }
  p.validate();
  return p;
}

TuningResult grid_search(const FeatureMatrix& train, const ParamGrid& grid, int k,
                         const FoldTrainer& trainer, int max_threads) {
  const std::vector<CvFold> folds = ts_cv_folds(train.rows(), k);
  const std::vector<ParamSet> candidates = enumerate_grid(grid);

  TuningResult result;
  result.folds = k;
  result.candidates.resize(candidates.size());

  // Folds are index ranges into `train`; slices are materialized once and
  // shared read-only across candidate workers.
  std::vector<FeatureMatrix> fold_train, fold_val;
  fold_train.reserve(folds.size());
  fold_val.reserve(folds.size());
  for (const CvFold& fold : folds) {
    fold_train.push_back(train.slice_rows(0, fold.train_end));
    fold_val.push_back(train.slice_rows(fold.train_end, fold.val_end));
  }

  const auto run_candidate = [&](std::size_t c) {
    CandidateResult& r = result.candidates[c];
    r.params = candidates[c];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      double total = 0.0;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const Eigen::VectorXd pred = trainer(fold_train[f], fold_val[f], candidates[c]);
        if (pred.size() != fold_val[f].rows())
          throw std::runtime_error("trainer returned " + std::to_string(pred.size()) +
                                   " predictions for a fold of " +
                                   std::to_string(fold_val[f].rows()));
        const double mae = (pred - fold_val[f].y).cwiseAbs().mean();
        r.fold_mae.push_back(mae);
        total += mae;
      }
      r.mean_mae = total / static_cast<double>(folds.size());
    } catch (const std::exception& e) {
      r.feasible = false;
      r.error = e.what();
      r.fold_mae.clear();
      r.mean_mae = std::numeric_limits<double>::infinity();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  };

  unsigned workers = max_threads > 0 ? static_cast<unsigned>(max_threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(candidates.size()));
  if (workers <= 1) {
    for (std::size_t c = 0; c < candidates.size(); ++c) run_candidate(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t c = next.fetch_add(1); c < candidates.size(); c = next.fetch_add(1))
          run_candidate(c);
      });
    for (std::thread& t : pool) t.join();
  }

  bool any_feasible = false;
  std::size_t best = 0;
  for (std::size_t c = 0; c < result.candidates.size(); ++c) {
    if (!result.candidates[c].feasible) continue;
    if (!any_feasible || result.candidates[c].mean_mae < result.candidates[best].mean_mae) {
      any_feasible = true;
      best = c;
    }
  }
  if (!any_feasible) throw std::runtime_error("grid_search: every candidate failed to fit");
  result.best_index = best;
  result.best_params = result.candidates[best].params;
  return result;
}

std::pair<GbtModel, MetricBundle> final_fit(const FeatureMatrix& train, const FeatureMatrix& test,
                                            const GbtHyperParams& params,
                                            std::optional<int> early_stopping_patience,
                                            double mape_floor) {
  GbtHyperParams p = params;
  p.early_stopping_patience = early_stopping_patience;

  GbtModel model;
  if (early_stopping_patience) {
    const Eigen::Index holdout =
        std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(0.1 * train.rows())));
    if (train.rows() - holdout < 1)
      throw std::invalid_argument("final_fit: training set too small for an early-stopping tail");
    const FeatureMatrix head = train.slice_rows(0, train.rows() - holdout);
    const FeatureMatrix tail = train.slice_rows(train.rows() - holdout, train.rows());
    model = fit_gbt(head, p, &tail);
  } else {
    model = fit_gbt(train, p, nullptr);
  }
  const MetricBundle metrics = evaluate(test.y, predict(model, test), mape_floor);
  return {std::move(model), metrics};
}

}  // namespace loadcast
