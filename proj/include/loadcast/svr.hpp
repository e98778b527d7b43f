#pragma once

#include "loadcast/features.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace loadcast {

enum class SvrKernel { Rbf, Linear };

struct SvrParams {
  SvrKernel kernel = SvrKernel::Rbf;
  std::optional<double> gamma;  // RBF exp(-gamma * ||a-b||^2); defaults to 1/n_features
  double C = 1.0;
  double epsilon = 0.1;    // tube half-width, target units
  double tolerance = 1e-3; // KKT violation threshold for stopping
  std::int64_t max_iterations = 0;  // 0 picks max(10^7, 1000 * n)
  void validate() const;
};

struct SvrModel {
  SvrKernel kernel = SvrKernel::Rbf;
  double gamma = 0.0;
  double C = 1.0;
  double epsilon = 0.1;
  Eigen::MatrixXd support_vectors;  // one row per SV
  Eigen::VectorXd dual_coeffs;      // alpha_i - alpha_i^* per SV
  double bias = 0.0;
  std::vector<std::string> feature_names;
  std::int64_t iterations = 0;
};

/// Epsilon-insensitive dual solved by sequential pairwise coordinate
/// optimization (maximal-violating-pair selection) over the precomputed
/// kernel matrix; stops once the KKT gap falls below `tolerance`. Expects
/// standardized features. Rejects when the iteration cap is reached,
/// reporting the remaining violation.
SvrModel fit_svr(const FeatureMatrix& train, const SvrParams& params);

/// f(x) = sum_i dual_i * k(sv_i, x) + bias.
Eigen::VectorXd predict_svr(const SvrModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X);

std::string to_json_string(const SvrModel& model);
SvrModel svr_model_from_json(const std::string& text);
void save_svr_model(const SvrModel& model, const std::filesystem::path& path);
SvrModel load_svr_model(const std::filesystem::path& path);

}  // namespace loadcast
