#include "loadcast/gbt.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

namespace loadcast {

void GbtHyperParams::validate() const {
  if (n_estimators < 1) throw std::invalid_argument("GbtHyperParams: n_estimators must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw std::invalid_argument("GbtHyperParams: learning_rate must be in (0, 1]");
  if (max_depth < 0) throw std::invalid_argument("GbtHyperParams: max_depth must be >= 0");
  if (min_child_weight < 0.0)
    throw std::invalid_argument("GbtHyperParams: min_child_weight must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0))
    throw std::invalid_argument("GbtHyperParams: subsample must be in (0, 1]");
  if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0))
    throw std::invalid_argument("GbtHyperParams: colsample_bytree must be in (0, 1]");
  if (lambda < 0.0) throw std::invalid_argument("GbtHyperParams: lambda must be >= 0");
  if (alpha < 0.0) throw std::invalid_argument("GbtHyperParams: alpha must be >= 0");
  if (gamma < 0.0) throw std::invalid_argument("GbtHyperParams: gamma must be >= 0");
  if (early_stopping_patience && *early_stopping_patience < 1)
    throw std::invalid_argument("GbtHyperParams: early_stopping_patience must be >= 1");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gradients(const Eigen::Ref<const Eigen::VectorXd>& y,
                                                      const Eigen::Ref<const Eigen::VectorXd>& pred,
                                                      GbtLoss loss) {
  if (y.size() != pred.size()) throw std::invalid_argument("gradients: length mismatch");
  Eigen::VectorXd g(y.size());
  switch (loss) {
    case GbtLoss::SquaredError:
      g = pred - y;
      break;
    case GbtLoss::AbsoluteError:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double r = pred[i] - y[i];
        g[i] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      }
      break;
    default:
      throw std::invalid_argument("gradients: unknown loss");
  }
  return {std::move(g), Eigen::VectorXd::Ones(y.size())};
}

double leaf_weight(double grad_sum, double hess_sum, double lambda, double alpha) {
  const double denom = hess_sum + lambda;
  if (!(denom > 0.0)) throw std::invalid_argument("leaf_weight: H + lambda must be > 0");
  double g = 0.0;
  if (grad_sum > alpha)
    g = grad_sum - alpha;
  else if (grad_sum < -alpha)
    g = grad_sum + alpha;
  return -g / denom;
}

namespace {

double structure_score(double g, double h, double lambda) { return g * g / (h + lambda); }

struct ScanResult {
  bool found = false;
  double threshold = 0.0;
  double gain = 0.0;
  bool default_left = true;
};

// One feature's exact scan. `order` holds row ids sorted ascending by value
// (missing excluded); strict > comparisons keep the lowest winning threshold
// and send missing-value ties left.
ScanResult scan_feature(const std::vector<int>& order, const std::vector<int>& missing,
                        const double* values, const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                        double sum_g, double sum_h, double lambda, double gamma,
                        double min_child_weight) {
  ScanResult best;
  if (order.size() < 1) return best;

  double g_miss = 0.0, h_miss = 0.0;
  for (int r : missing) {
    g_miss += g[r];
    h_miss += h[r];
  }
  const double parent_score = structure_score(sum_g, sum_h, lambda);

  double g_prefix = 0.0, h_prefix = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    g_prefix += g[order[i]];
    h_prefix += h[order[i]];
    const double v = values[order[i]];
    const double v_next = values[order[i + 1]];
    if (v == v_next) continue;  // no threshold separates equal values
    const double threshold = 0.5 * (v + v_next);
    for (int miss_left = 1; miss_left >= 0; --miss_left) {
      const double gl = g_prefix + (miss_left ? g_miss : 0.0);
      const double hl = h_prefix + (miss_left ? h_miss : 0.0);
      const double gr = sum_g - gl;
      const double hr = sum_h - hl;
      if (hl < min_child_weight || hr < min_child_weight) continue;
      const double gain =
          0.5 * (structure_score(gl, hl, lambda) + structure_score(gr, hr, lambda) - parent_score) -
          gamma;
      if (!best.found || gain > best.gain) {
        best.found = true;
        best.gain = gain;
        best.threshold = threshold;
        best.default_left = miss_left == 1;
      }
    }
  }
  return best;
}

// Per-feature row ids for one node: `order` sorted ascending by value,
// `missing` holding rows whose value is NaN.
struct FeatureRows {
  std::vector<int> order;
  std::vector<int> missing;
};

struct NodeRows {
  std::vector<FeatureRows> per_feature;  // parallel to the sampled feature list
  double sum_g = 0.0;
  double sum_h = 0.0;
  std::size_t count = 0;
};

struct TreeBuilder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& g;
  const Eigen::VectorXd& h;
  const std::vector<int>& features;  // sampled global column indices, ascending
  const GbtHyperParams& params;
  std::vector<TreeNode> nodes;

  int build(NodeRows&& node, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[id].sum_grad = node.sum_g;
    nodes[id].sum_hess = node.sum_h;

    std::optional<SplitCandidate> split;
    if (depth < params.max_depth && node.count >= 2) split = find_split(node);
    if (!split) {
      nodes[id].weight = leaf_weight(node.sum_g, node.sum_h, params.lambda, params.alpha);
      return id;
    }

    auto [left, right] = partition(node, *split);
    node = NodeRows{};  // release before recursing
    const int left_id = build(std::move(left), depth + 1);
    const int right_id = build(std::move(right), depth + 1);
    nodes[id].feature = split->feature;
    nodes[id].threshold = split->threshold;
    nodes[id].default_left = split->default_left;
    nodes[id].left = left_id;
    nodes[id].right = right_id;
    return id;
  }

  std::optional<SplitCandidate> find_split(const NodeRows& node) const {
    SplitCandidate best;
    bool found = false;
    for (std::size_t f = 0; f < features.size(); ++f) {
      const ScanResult r =
          scan_feature(node.per_feature[f].order, node.per_feature[f].missing,
                       X.col(features[f]).data(), g, h, node.sum_g, node.sum_h, params.lambda,
                       params.gamma, params.min_child_weight);
      if (r.found && (!found || r.gain > best.gain)) {
        found = true;
        best.feature = features[f];
        best.threshold = r.threshold;
        best.gain = r.gain;
        best.default_left = r.default_left;
      }
    }
    if (!found || best.gain <= 0.0) return std::nullopt;
    return best;
  }

  // Routes every per-feature list through the split predicate in one stable
  // pass, so children stay sorted without re-sorting.
  std::pair<NodeRows, NodeRows> partition(const NodeRows& node, const SplitCandidate& split) const {
    NodeRows left, right;
    left.per_feature.resize(features.size());
    right.per_feature.resize(features.size());
    const auto goes_left = [&](int row) {
      const double v = X(row, split.feature);
      if (std::isnan(v)) return split.default_left;
      return v < split.threshold;
    };
    for (std::size_t f = 0; f < features.size(); ++f) {
      for (int row : node.per_feature[f].order)
        (goes_left(row) ? left : right).per_feature[f].order.push_back(row);
      for (int row : node.per_feature[f].missing)
        (goes_left(row) ? left : right).per_feature[f].missing.push_back(row);
    }
    for (int row : node.per_feature[0].order) {
      auto& side = goes_left(row) ? left : right;
      side.sum_g += g[row];
      side.sum_h += h[row];
      ++side.count;
    }
    for (int row : node.per_feature[0].missing) {
      auto& side = goes_left(row) ? left : right;
      side.sum_g += g[row];
      side.sum_h += h[row];
      ++side.count;
    }
    return {std::move(left), std::move(right)};
  }
};

// Whole-matrix value order per feature, computed once per fit and filtered
// per tree; row subsampling preserves sortedness, so trees never re-sort.
struct FeaturePresort {
  std::vector<int> order;    // rows ascending by value, stable by row index
  std::vector<int> missing;  // rows whose value is NaN
};

std::vector<FeaturePresort> presort_features(const Eigen::MatrixXd& X) {
  std::vector<FeaturePresort> out(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    auto& fp = out[static_cast<std::size_t>(f)];
    const auto col = X.col(f);
    fp.order.reserve(static_cast<std::size_t>(X.rows()));
    for (int r = 0; r < X.rows(); ++r)
      (std::isnan(col[r]) ? fp.missing : fp.order).push_back(r);
    std::stable_sort(fp.order.begin(), fp.order.end(),
                     [&col](int a, int b) { return col[a] < col[b]; });
  }
  return out;
}

NodeRows make_root(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                   const std::vector<int>& rows, const std::vector<int>& features,
                   const std::vector<FeaturePresort>& presort, std::vector<char>& in_sample) {
  NodeRows root;
  root.per_feature.resize(features.size());
  root.count = rows.size();
  std::fill(in_sample.begin(), in_sample.end(), char(0));
  for (int r : rows) {
    in_sample[static_cast<std::size_t>(r)] = 1;
    root.sum_g += g[r];
    root.sum_h += h[r];
  }
  for (std::size_t f = 0; f < features.size(); ++f) {
    auto& fr = root.per_feature[f];
    const FeaturePresort& fp = presort[static_cast<std::size_t>(features[f])];
    fr.order.reserve(rows.size());
    for (int r : fp.order)
      if (in_sample[static_cast<std::size_t>(r)]) fr.order.push_back(r);
    for (int r : fp.missing)
      if (in_sample[static_cast<std::size_t>(r)]) fr.missing.push_back(r);
  }
  return root;
}

RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& h, const std::vector<int>& rows,
                         const std::vector<int>& features,
                         const std::vector<FeaturePresort>& presort,
                         std::vector<char>& in_sample, const GbtHyperParams& params) {
  TreeBuilder builder{X, g, h, features, params, {}};
  builder.build(make_root(g, h, rows, features, presort, in_sample), 0);
  RegressionTree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

// k distinct draws from [0, n), returned ascending.
std::vector<int> sample_without_replacement(int n, double fraction, std::mt19937_64& rng) {
  const int k = std::max(1, static_cast<int>(std::floor(fraction * n)));
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  if (k < n) {
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
  }
  return pool;
}

}  // namespace

std::optional<SplitCandidate> best_split(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                         const Eigen::Ref<const Eigen::VectorXd>& g,
                                         const Eigen::Ref<const Eigen::VectorXd>& h,
                                         double lambda, double gamma, double min_child_weight) {
  if (X.rows() < 2) return std::nullopt;
  if (g.size() != X.rows() || h.size() != X.rows())
    throw std::invalid_argument("best_split: gradient length mismatch");
  const Eigen::MatrixXd Xd = X;  // dense copy so columns are contiguous
  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) rows[static_cast<std::size_t>(i)] = static_cast<int>(i);
  std::vector<int> features(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index f = 0; f < X.cols(); ++f)
    features[static_cast<std::size_t>(f)] = static_cast<int>(f);

  const Eigen::VectorXd gd = g, hd = h;
  GbtHyperParams params;
  params.lambda = lambda;
  params.gamma = gamma;
  params.min_child_weight = min_child_weight;
  params.max_depth = 1;
  TreeBuilder builder{Xd, gd, hd, features, params, {}};
  const std::vector<FeaturePresort> presort = presort_features(Xd);
  std::vector<char> in_sample(static_cast<std::size_t>(Xd.rows()), 0);
  return builder.find_split(make_root(gd, hd, rows, features, presort, in_sample));
}

GbtModel fit_gbt(const FeatureMatrix& train, const GbtHyperParams& params,
                 const FeatureMatrix* validation) {
  params.validate();
  if (train.rows() == 0) throw std::invalid_argument("fit_gbt: empty training set");
  if (params.early_stopping_patience && !validation)
    throw std::invalid_argument("fit_gbt: early stopping requires a validation set");
  if (validation && validation->feature_names != train.feature_names)
    throw std::invalid_argument("fit_gbt: validation feature names differ from training");

  const int n = static_cast<int>(train.rows());
  const int n_features = static_cast<int>(train.cols());

  GbtModel model;
  model.params = params;
  model.feature_names = train.feature_names;
  model.learning_rate = params.learning_rate;
  model.base_score = params.base_score ? *params.base_score : train.y.mean();

  Eigen::VectorXd pred = Eigen::VectorXd::Constant(n, model.base_score);
  Eigen::VectorXd val_pred;
  if (validation) val_pred = Eigen::VectorXd::Constant(validation->rows(), model.base_score);

  std::mt19937_64 rng(params.seed);
  double best_mae = std::numeric_limits<double>::infinity();
  int best_round = 0;
  int rounds_since_improvement = 0;

  const std::vector<FeaturePresort> presort = presort_features(train.X);
  std::vector<char> in_sample(static_cast<std::size_t>(n), 0);

  for (int k = 0; k < params.n_estimators; ++k) {
    auto [g, h] = gradients(train.y, pred, params.loss);
    const std::vector<int> rows = sample_without_replacement(n, params.subsample, rng);
    const std::vector<int> features = sample_without_replacement(n_features, params.colsample_bytree, rng);
    RegressionTree tree = grow_tree(train.X, g, h, rows, features, presort, in_sample, params);

    for (int i = 0; i < n; ++i)
      pred[i] += params.learning_rate * tree.value_at(train.X.row(i));
    model.trees.push_back(std::move(tree));

    if (validation) {
      const RegressionTree& grown = model.trees.back();
      for (Eigen::Index i = 0; i < validation->rows(); ++i)
        val_pred[i] += params.learning_rate * grown.value_at(validation->X.row(i));
      const double mae = (val_pred - validation->y).cwiseAbs().mean();
      model.validation_mae.push_back(mae);
      if (mae < best_mae) {
        best_mae = mae;
        best_round = k + 1;
        rounds_since_improvement = 0;
      } else {
        ++rounds_since_improvement;
      }
      if (params.early_stopping_patience &&
          rounds_since_improvement >= *params.early_stopping_patience)
        break;
    }
  }
  if (params.early_stopping_patience) model.best_iteration = best_round;
  return model;
}

Eigen::VectorXd predict(const GbtModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                        const std::vector<std::string>& feature_names) {
  if (feature_names != model.feature_names)
    throw std::invalid_argument("predict: feature names do not match the trained model");
  if (X.cols() != static_cast<Eigen::Index>(model.feature_names.size()))
    throw std::invalid_argument("predict: column count mismatch");
  const Eigen::Index used = model.trees_used();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), model.base_score);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < used; ++k)
      acc += model.trees[static_cast<std::size_t>(k)].value_at(X.row(i));
    out[i] += model.learning_rate * acc;
  }
  return out;
}

Eigen::VectorXd predict(const GbtModel& model, const FeatureMatrix& matrix) {
  return predict(model, matrix.X, matrix.feature_names);
}

namespace {

nlohmann::json params_to_json(const GbtHyperParams& p) {
  nlohmann::json j;
  j["n_estimators"] = p.n_estimators;
  j["learning_rate"] = p.learning_rate;
  j["max_depth"] = p.max_depth;
  j["min_child_weight"] = p.min_child_weight;
  j["subsample"] = p.subsample;
  j["colsample_bytree"] = p.colsample_bytree;
  j["lambda"] = p.lambda;
  j["alpha"] = p.alpha;
  j["gamma"] = p.gamma;
  if (p.early_stopping_patience)
    j["early_stopping_patience"] = *p.early_stopping_patience;
  else
    j["early_stopping_patience"] = nullptr;
  j["seed"] = p.seed;
  j["loss"] = p.loss == GbtLoss::SquaredError ? "squared" : "absolute";
  if (p.base_score)
    j["base_score"] = *p.base_score;
  else
    j["base_score"] = nullptr;
  return j;
}

GbtHyperParams params_from_json(const nlohmann::json& j) {
  GbtHyperParams p;
  p.n_estimators = j.at("n_estimators").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_child_weight = j.at("min_child_weight").get<double>();
  p.subsample = j.at("subsample").get<double>();
  p.colsample_bytree = j.at("colsample_bytree").get<double>();
  p.lambda = j.at("lambda").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.gamma = j.at("gamma").get<double>();
  if (!j.at("early_stopping_patience").is_null())
    p.early_stopping_patience = j.at("early_stopping_patience").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.loss = j.at("loss").get<std::string>() == "absolute" ? GbtLoss::AbsoluteError
                                                         : GbtLoss::SquaredError;
  if (!j.at("base_score").is_null()) p.base_score = j.at("base_score").get<double>();
  return p;
}

}  // namespace

std::string to_json_string(const GbtModel& model) {
  nlohmann::json j;
  j["schema"] = "loadcast.gbt_model/1";
  j["base_score"] = model.base_score;
  j["learning_rate"] = model.learning_rate;
  j["feature_names"] = model.feature_names;
  if (model.best_iteration)
    j["best_iteration"] = *model.best_iteration;
  else
    j["best_iteration"] = nullptr;
  j["validation_mae"] = model.validation_mae;
  j["hyperparams"] = params_to_json(model.params);
  nlohmann::json trees = nlohmann::json::array();
  for (const RegressionTree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.default_left, n.weight,
                       n.sum_grad, n.sum_hess});
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j.dump(2) + "\n";
}

GbtModel gbt_model_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("schema").get<std::string>() != "loadcast.gbt_model/1")
    throw std::runtime_error("gbt_model_from_json: unsupported schema");
  GbtModel model;
  model.base_score = j.at("base_score").get<double>();
  model.learning_rate = j.at("learning_rate").get<double>();
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  if (!j.at("best_iteration").is_null()) model.best_iteration = j.at("best_iteration").get<int>();
  model.validation_mae = j.at("validation_mae").get<std::vector<double>>();
  model.params = params_from_json(j.at("hyperparams"));
  for (const auto& jt : j.at("trees")) {
    RegressionTree tree;
    for (const auto& jn : jt.at("nodes")) {
      TreeNode n;
      n.feature = jn.at(0).get<int>();
      n.threshold = jn.at(1).get<double>();
      n.left = jn.at(2).get<int>();
      n.right = jn.at(3).get<int>();
      n.default_left = jn.at(4).get<bool>();
      n.weight = jn.at(5).get<double>();
      n.sum_grad = jn.at(6).get<double>();
      n.sum_hess = jn.at(7).get<double>();
      tree.nodes.push_back(n);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void save_gbt_model(const GbtModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_json_string(model);
}

GbtModel load_gbt_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return gbt_model_from_json(text);
}

}  // namespace loadcast
