#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace loadcast {

/// The five-metric suite reported for every model/scenario pair. MAPE is
/// empty when every target sits under the floor; R² is empty for
/// zero-variance targets.
struct MetricBundle {
  double mae = 0.0;   // kW
  double mse = 0.0;   // kW²
  double rmse = 0.0;  // kW
  std::optional<double> mape;  // percent
  std::optional<double> r2;
  Eigen::Index n = 0;
  Eigen::Index mape_excluded = 0;  // terms dropped by the floor
};

MetricBundle evaluate(const Eigen::Ref<const Eigen::VectorXd>& y,
                      const Eigen::Ref<const Eigen::VectorXd>& yhat, double mape_floor = 0.01);

/// Ascending for error metrics, descending for r2; ties break alphabetically.
/// key is one of "mae", "mse", "rmse", "mape", "r2".
std::vector<std::string> rank_models(const std::map<std::string, MetricBundle>& reports,
                                     const std::string& key);

}  // namespace loadcast
