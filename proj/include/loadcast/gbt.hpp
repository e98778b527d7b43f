#pragma once

#include "loadcast/features.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace loadcast {

enum class GbtLoss { SquaredError, AbsoluteError };

struct GbtHyperParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 5;              // 0 forces a single-leaf root
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double subsample = 1.0;         // row fraction per tree, without replacement
  double colsample_bytree = 1.0;  // feature fraction per tree
  double lambda = 1.0;            // L2 leaf penalty
  double alpha = 0.0;             // L1 leaf penalty
  double gamma = 0.0;             // per-leaf penalty
  std::optional<int> early_stopping_patience;
  std::uint64_t seed = 0;
  GbtLoss loss = GbtLoss::SquaredError;
  std::optional<double> base_score;  // overrides the training-target mean

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  bool default_left = true;  // route for missing feature values
  double weight = 0.0;       // leaf output before shrinkage
  double sum_grad = 0.0;     // node statistics, kept for diagnostics
  double sum_hess = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root, children in DFS order

  /// Leaf weight for one sample; accepts any Eigen row expression. Missing
  /// (NaN) feature values follow each node's default direction.
  template <typename Derived>
  double value_at(const Eigen::MatrixBase<Derived>& row) const {
    int id = 0;
    while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
      const TreeNode& n = nodes[static_cast<std::size_t>(id)];
      const double v = row(n.feature);
      if (std::isnan(v))
        id = n.default_left ? n.left : n.right;
      else
        id = v < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(id)].weight;
  }
};

struct GbtModel {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<std::string> feature_names;
  std::optional<int> best_iteration;   // trees used by predict; all when absent
  std::vector<double> validation_mae;  // per-round history when a validation set was given
  GbtHyperParams params;

  Eigen::Index trees_used() const {
    return best_iteration ? *best_iteration : static_cast<Eigen::Index>(trees.size());
  }
};

/// First/second derivatives of the training loss at the current predictions.
/// Squared error: g = pred - y, h = 1. Absolute error: g = sign(pred - y)
/// with the constant-hessian surrogate h = 1.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gradients(const Eigen::Ref<const Eigen::VectorXd>& y,
                                                      const Eigen::Ref<const Eigen::VectorXd>& pred,
                                                      GbtLoss loss);

/// Regularized Newton leaf: -soft_threshold(G, alpha) / (H + lambda).
double leaf_weight(double grad_sum, double hess_sum, double lambda, double alpha);

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  bool default_left = true;
};

/// Exact greedy search over every midpoint between consecutive distinct
/// values of every feature; children must each carry at least
/// min_child_weight hessian. Missing values ride with whichever side gains
/// more (ties go left). Returns nothing when the best gain is <= 0.
/// Equal gains break toward the lowest feature index, then lowest threshold.
std::optional<SplitCandidate> best_split(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                         const Eigen::Ref<const Eigen::VectorXd>& g,
                                         const Eigen::Ref<const Eigen::VectorXd>& h,
                                         double lambda, double gamma, double min_child_weight);

/// Boosted fit: base score, then n_estimators regularized trees grown
/// depth-first on the current gradients, each shrunk by the learning rate.
/// With a validation set and patience, stops once validation MAE has not
/// improved for `patience` consecutive rounds and records the best round.
GbtModel fit_gbt(const FeatureMatrix& train, const GbtHyperParams& params,
                 const FeatureMatrix* validation = nullptr);

Eigen::VectorXd predict(const GbtModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                        const std::vector<std::string>& feature_names);
Eigen::VectorXd predict(const GbtModel& model, const FeatureMatrix& matrix);

/// Versioned JSON schema; round-trips bit-exactly.
std::string to_json_string(const GbtModel& model);
GbtModel gbt_model_from_json(const std::string& text);
void save_gbt_model(const GbtModel& model, const std::filesystem::path& path);
GbtModel load_gbt_model(const std::filesystem::path& path);

}  // namespace loadcast
