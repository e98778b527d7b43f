#include "loadcast/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace loadcast {

FeatureMatrix FeatureMatrix::slice_rows(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end < begin || end > rows())
    throw std::out_of_range("FeatureMatrix::slice_rows out of range");
  FeatureMatrix out;
  out.X = X.middleRows(begin, end - begin);
  out.y = y.segment(begin, end - begin);
  out.feature_names = feature_names;
  out.row_timestamps.assign(row_timestamps.begin() + begin, row_timestamps.begin() + end);
  return out;
}

void SupervisedSpec::validate() const {
  if (lags.empty()) throw std::invalid_argument("SupervisedSpec: at least one lag required");
  if (horizon < 1) throw std::invalid_argument("SupervisedSpec: horizon must be >= 1");
  for (int lag : lags)
    if (lag < horizon)
      throw std::invalid_argument("SupervisedSpec: lag " + std::to_string(lag) +
                                  " below the horizon of " + std::to_string(horizon) +
                                  " hours would leak unobservable data");
}

FeatureMatrix build_supervised(const HourlySeries& series, const SupervisedSpec& spec) {
  spec.validate();
  std::vector<int> lags = spec.lags;
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  const int max_lag = lags.back();

  const Eigen::Index n = series.size();
  if (n < max_lag + 1)
    throw std::invalid_argument("build_supervised: series of " + std::to_string(n) +
                                " h is shorter than max lag + 1 = " + std::to_string(max_lag + 1));
  if (series.missing_load_count() > 0)
    throw std::invalid_argument("build_supervised: series has missing load values; impute first");

  FeatureMatrix m;
  for (int lag : lags) m.feature_names.push_back("lag_" + std::to_string(lag));
  m.feature_names.insert(m.feature_names.end(),
                         {"hour_of_day", "day_of_week", "day_of_year", "is_weekend"});
  if (spec.use_temperature) m.feature_names.push_back("temperature");

  const Eigen::Index rows = n - max_lag;
  const Eigen::Index cols = static_cast<Eigen::Index>(m.feature_names.size());
  m.X.resize(rows, cols);
  m.y.resize(rows);
  m.row_timestamps.resize(static_cast<std::size_t>(rows));

  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = r + max_lag;
    Eigen::Index c = 0;
    for (int lag : lags) m.X(r, c++) = series.load_kw[t - lag];
    const CalendarFeatures cal = calendar_of(series.timestamp_at(t));
    m.X(r, c++) = cal.hour_of_day;
    m.X(r, c++) = cal.day_of_week;
    m.X(r, c++) = cal.day_of_year;
    m.X(r, c++) = cal.is_weekend ? 1.0 : 0.0;
    if (spec.use_temperature) {
      const double temp = series.temperature_c[t];
      if (is_missing(temp))
        throw std::invalid_argument("build_supervised: missing temperature at row " +
                                    std::to_string(r) + "; impute first or disable the feature");
      m.X(r, c++) = temp;
    }
    m.y[r] = series.load_kw[t];
    m.row_timestamps[static_cast<std::size_t>(r)] = series.timestamp_at(t);
  }
  return m;
}

Eigen::VectorXd ScalerStats::divisors() const {
  Eigen::VectorXd d = stddev;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (zero_variance[static_cast<std::size_t>(i)]) d[i] = 1.0;
  return d;
}

ScalerStats fit_scaler(const FeatureMatrix& train) {
  if (train.rows() == 0) throw std::invalid_argument("fit_scaler: empty matrix");
  ScalerStats s;
  s.mean = train.X.colwise().mean();
  const Eigen::MatrixXd centered = train.X.rowwise() - s.mean.transpose();
  s.stddev = (centered.array().square().colwise().sum() / static_cast<double>(train.rows()))
                 .sqrt()
                 .matrix()
                 .transpose();
  s.zero_variance.resize(static_cast<std::size_t>(s.stddev.size()));
  for (Eigen::Index i = 0; i < s.stddev.size(); ++i)
    s.zero_variance[static_cast<std::size_t>(i)] = s.stddev[i] == 0.0;
  return s;
}

FeatureMatrix apply_scaler(const ScalerStats& stats, const FeatureMatrix& matrix) {
  if (stats.mean.size() != matrix.cols())
    throw std::invalid_argument("apply_scaler: feature count mismatch");
  FeatureMatrix out = matrix;
  const Eigen::VectorXd div = stats.divisors();
  out.X = (matrix.X.rowwise() - stats.mean.transpose()).array().rowwise() /
          div.transpose().array();
  return out;
}

std::pair<FeatureMatrix, FeatureMatrix> chrono_split(const FeatureMatrix& matrix,
                                                     double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("chrono_split: train_fraction must be in (0, 1)");
  const Eigen::Index n = matrix.rows();
  if (n < 5) throw std::invalid_argument("chrono_split: need at least 5 rows");
  const Eigen::Index n_train =
      static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(n)));
  return {matrix.slice_rows(0, n_train), matrix.slice_rows(n_train, n)};
}

std::vector<CvFold> ts_cv_folds(Eigen::Index n, int k) {
  if (k < 1) throw std::invalid_argument("ts_cv_folds: k must be >= 1");
  if (n < k + 1)
    throw std::invalid_argument("ts_cv_folds: need at least k + 1 = " + std::to_string(k + 1) +
                                " samples, got " + std::to_string(n));
  const Eigen::Index t = n / (k + 1);
  std::vector<CvFold> folds;
  folds.reserve(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) {
    CvFold fold;
    fold.train_end = n - static_cast<Eigen::Index>(k - i + 1) * t;
    fold.val_end = n - static_cast<Eigen::Index>(k - i) * t;
    folds.push_back(fold);
  }
  return folds;
}

}  // namespace loadcast
