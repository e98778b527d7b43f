#include "loadcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loadcast {

namespace {

// Kahan-compensated accumulator; season-long sums of small kW errors lose
// digits under naive summation.
class CompensatedSum {
 public:
  void add(double value) {
    const double y = value - compensation_;
    const double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace

MetricBundle evaluate(const Eigen::Ref<const Eigen::VectorXd>& y,
                      const Eigen::Ref<const Eigen::VectorXd>& yhat, double mape_floor) {
  const Eigen::Index n = y.size();
  if (n == 0) throw std::invalid_argument("evaluate: empty input");
  if (yhat.size() != n) throw std::invalid_argument("evaluate: length mismatch");

  CompensatedSum abs_err, sq_err, y_sum;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = yhat[i] - y[i];
    abs_err.add(std::abs(e));
    sq_err.add(e * e);
    y_sum.add(y[i]);
  }

  MetricBundle b;
  b.n = n;
  b.mae = abs_err.value() / static_cast<double>(n);
  b.mse = sq_err.value() / static_cast<double>(n);
  b.rmse = std::sqrt(b.mse);

  CompensatedSum ape;
  Eigen::Index included = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(y[i]) > mape_floor) {
      ape.add(std::abs((yhat[i] - y[i]) / y[i]));
      ++included;
    }
  }
  b.mape_excluded = n - included;
  if (included > 0) b.mape = 100.0 * ape.value() / static_cast<double>(included);

  const double mean = y_sum.value() / static_cast<double>(n);
  CompensatedSum tss;
  for (Eigen::Index i = 0; i < n; ++i) tss.add((y[i] - mean) * (y[i] - mean));
  if (tss.value() > 0.0) b.r2 = 1.0 - sq_err.value() / tss.value();
  return b;
}

std::vector<std::string> rank_models(const std::map<std::string, MetricBundle>& reports,
                                     const std::string& key) {
  auto value_of = [&key](const MetricBundle& b) -> double {
    if (key == "mae") return b.mae;
    if (key == "mse") return b.mse;
    if (key == "rmse") return b.rmse;
    if (key == "mape") {
      if (!b.mape) throw std::invalid_argument("rank_models: undefined mape in a bundle");
      return *b.mape;
    }
    if (key == "r2") {
      if (!b.r2) throw std::invalid_argument("rank_models: undefined r2 in a bundle");
      return *b.r2;
    }
    throw std::invalid_argument("rank_models: unknown metric '" + key + "'");
  };

  std::vector<std::pair<std::string, double>> entries;
  entries.reserve(reports.size());
  for (const auto& [name, bundle] : reports) entries.emplace_back(name, value_of(bundle));

  const bool descending = key == "r2";
  std::stable_sort(entries.begin(), entries.end(), [descending](const auto& a, const auto& b) {
    if (a.second != b.second) return descending ? a.second > b.second : a.second < b.second;
    return a.first < b.first;
  });

  std::vector<std::string> order;
  order.reserve(entries.size());
  for (const auto& [name, value] : entries) order.push_back(name);
  return order;
}

}  // namespace loadcast
