#pragma once

#include "loadcast/time_series.hpp"

#include <utility>
#include <vector>

namespace loadcast {

/// Supervised learning table: one row per forecast-target hour.
struct FeatureMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;  // kW
  std::vector<std::string> feature_names;
  std::vector<std::int64_t> row_timestamps;  // target hours, strictly increasing

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  FeatureMatrix slice_rows(Eigen::Index begin, Eigen::Index end) const;
};

struct SupervisedSpec {
  std::vector<int> lags{24, 25, 26, 48, 72, 168};  // hour offsets
  int horizon = 24;                                // causality floor: min lag >= horizon
  bool use_temperature = true;                     // day-ahead forecast temperature at t
  void validate() const;
};

/// Features per target hour t: load at each t - lag, the calendar
/// decomposition of t, and (optionally) temperature at t. Requires a fully
/// imputed series; rejects lag sets that would leak past the issuance time.
FeatureMatrix build_supervised(const HourlySeries& series, const SupervisedSpec& spec);

struct ScalerStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;             // population std, >= 0
  std::vector<bool> zero_variance;    // unit-divisor flag per feature
  Eigen::VectorXd divisors() const;   // stddev with 1.0 where degenerate
};

ScalerStats fit_scaler(const FeatureMatrix& train);
FeatureMatrix apply_scaler(const ScalerStats& stats, const FeatureMatrix& matrix);

/// First floor(train_fraction * N) rows train, remainder test; no shuffling.
std::pair<FeatureMatrix, FeatureMatrix> chrono_split(const FeatureMatrix& matrix,
                                                     double train_fraction = 0.8);

/// Expanding-window fold: train [0, train_end), validation [train_end, val_end).
struct CvFold {
  Eigen::Index train_end = 0;
  Eigen::Index val_end = 0;
};

/// With t = floor(n / (k+1)), fold i in 1..k trains on [0, n-(k-i+1)*t) and
/// validates on the next t rows; training sets strictly expand and the
/// validation windows tile [n - k*t, n).
std::vector<CvFold> ts_cv_folds(Eigen::Index n, int k = 5);

}  // namespace loadcast
