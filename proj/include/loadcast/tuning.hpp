#pragma once

#include "loadcast/gbt.hpp"
#include "loadcast/metrics.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace loadcast {

/// One hyperparameter assignment, in the grid's declared name order.
using ParamSet = std::vector<std::pair<std::string, double>>;

struct ParamGrid {
  /// Candidate values per hyperparameter, in declaration order.
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  void validate() const;
  std::size_t size() const;
};

/// Full Cartesian product, lexicographic in the declared name order (the
/// first axis varies slowest).
std::vector<ParamSet> enumerate_grid(const ParamGrid& grid);

struct CandidateResult {
  ParamSet params;
  std::vector<double> fold_mae;
  double mean_mae = 0.0;
  bool feasible = true;
  std::string error;
  double wall_ms = 0.0;
};

struct TuningResult {
  ParamSet best_params;
  std::size_t best_index = 0;
  std::vector<CandidateResult> candidates;
  int folds = 0;
};

/// Fits on a fold's training window and returns predictions on its
/// validation window.
using FoldTrainer =
    std::function<Eigen::VectorXd(const FeatureMatrix& fold_train, const FeatureMatrix& fold_val,
                                  const ParamSet& params)>;

/// Expanding-window CV over every candidate; the winner minimizes mean fold
/// MAE, ties broken by enumeration order. Candidates whose fit throws are
/// recorded infeasible and skipped. Candidates run concurrently; results
/// merge by candidate index, so the outcome is independent of scheduling.
/// The test window never enters here by construction.
TuningResult grid_search(const FeatureMatrix& train, const ParamGrid& grid, int k,
                         const FoldTrainer& trainer, int max_threads = 0);

/// Applies a ParamSet over base GBT hyperparameters; unknown names reject.
GbtHyperParams gbt_params_from(const ParamSet& params, const GbtHyperParams& base);

/// Refits on train with the chronological last 10% held out for early
/// stopping (when patience is set), then scores the untouched test set.
std::pair<GbtModel, MetricBundle> final_fit(const FeatureMatrix& train, const FeatureMatrix& test,
                                            const GbtHyperParams& params,
                                            std::optional<int> early_stopping_patience,
                                            double mape_floor = 0.01);

}  // namespace loadcast
