#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>

namespace loadcast {

struct ArimaOrder {
  int p = 2;  // AR lags
  int d = 1;  // differencing order
  int q = 2;  // MA lags
  void validate() const;
};

struct ArimaModel {
  ArimaOrder order;
  bool with_intercept = false;  // fitted only when d == 0
  double intercept = 0.0;
  Eigen::VectorXd phi;    // AR coefficients
  Eigen::VectorXd theta;  // MA coefficients
  std::optional<double> beta;  // exogenous temperature coefficient (ARIMAX)
  double residual_variance = 0.0;
  double css = 0.0;  // conditional sum of squares at the fitted coefficients
};

/// d-fold first differences; output is d elements shorter.
Eigen::VectorXd difference(const Eigen::Ref<const Eigen::VectorXd>& series, int d);

/// Inverts `difference` given the last observed value of each difference
/// level, ordered from order d-1 down to the raw levels (see anchors_for).
Eigen::VectorXd undifference(const Eigen::Ref<const Eigen::VectorXd>& deltas,
                             const Eigen::Ref<const Eigen::VectorXd>& anchors);

/// anchors[j] = last value of difference(series, d-1-j); anchors[d-1] is the
/// last raw level.
Eigen::VectorXd anchors_for(const Eigen::Ref<const Eigen::VectorXd>& series, int d);

/// Least-squares AR-plus-exogenous start (theta = 0); the simplex search
/// refines it.
ArimaModel arima_least_squares_start(const Eigen::Ref<const Eigen::VectorXd>& series,
                                     const Eigen::VectorXd* exog, const ArimaOrder& order);

/// Conditional sum of squared one-step residuals on the differenced series;
/// residuals before max(p, q) are pinned to zero.
double arima_css(const ArimaModel& model, const Eigen::Ref<const Eigen::VectorXd>& series,
                 const Eigen::VectorXd* exog);

/// CSS minimization by Nelder-Mead from the least-squares start. Rejects on
/// non-convergence, reporting the best objective reached.
ArimaModel fit_arima(const Eigen::Ref<const Eigen::VectorXd>& series, const ArimaOrder& order);
ArimaModel fit_arimax(const Eigen::Ref<const Eigen::VectorXd>& series,
                      const Eigen::Ref<const Eigen::VectorXd>& exog, const ArimaOrder& order);

/// Iterates the one-step predictor `horizon` times, feeding each prediction
/// back as the next lagged observation; future shocks are zero. Exogenous
/// history/future are required iff the model carries beta.
Eigen::VectorXd forecast_walk_forward(const ArimaModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& history,
                                      const Eigen::VectorXd* exog_history,
                                      const Eigen::VectorXd* exog_future, int horizon = 24);

std::string to_json_string(const ArimaModel& model);
ArimaModel arima_model_from_json(const std::string& text);
void save_arima_model(const ArimaModel& model, const std::filesystem::path& path);
ArimaModel load_arima_model(const std::filesystem::path& path);

}  // namespace loadcast
