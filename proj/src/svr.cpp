#include "loadcast/svr.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace loadcast {

void SvrParams::validate() const {
  if (!(C > 0.0)) throw std::invalid_argument("SvrParams: C must be > 0");
  if (epsilon < 0.0) throw std::invalid_argument("SvrParams: epsilon must be >= 0");
  if (!(tolerance > 0.0)) throw std::invalid_argument("SvrParams: tolerance must be > 0");
  if (gamma && !(*gamma > 0.0)) throw std::invalid_argument("SvrParams: gamma must be > 0");
}

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              SvrKernel kernel, double gamma) {
  Eigen::MatrixXd G = A * B.transpose();
  if (kernel == SvrKernel::Linear) return G;
  const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
  G = ((-2.0 * G).colwise() + a2).rowwise() + b2.transpose();
  return (-gamma * G.array()).exp();
}

}  // namespace

// Epsilon-SVR dual in the stacked 2n form: variables [alpha; alpha*] with
// signs z = [+1; -1], minimizing 1/2 l'Ql + p'l over the box [0, C] under
// z'l = 0. Pairs are picked by maximal KKT violation and solved analytically,
// as in the classic SMO scheme. With r = y - K*beta, the violation values are
// r - eps on the alpha side and r + eps on the alpha* side.
SvrModel fit_svr(const FeatureMatrix& train, const SvrParams& params) {
  params.validate();
  const Eigen::Index n = train.rows();
  if (n < 1) throw std::invalid_argument("fit_svr: empty training set");

  const double gamma = params.gamma ? *params.gamma : 1.0 / static_cast<double>(train.cols());
  const Eigen::MatrixXd K = kernel_matrix(train.X, train.X, params.kernel, gamma);
  const Eigen::VectorXd& y = train.y;
  const double C = params.C;
  const double eps = params.epsilon;

  Eigen::VectorXd alpha_pos = Eigen::VectorXd::Zero(n);   // alpha
  Eigen::VectorXd alpha_neg = Eigen::VectorXd::Zero(n);   // alpha*
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);           // K * beta, no bias
  const std::int64_t max_iter =
      params.max_iterations > 0 ? params.max_iterations
                                : std::max<std::int64_t>(100000, 200 * static_cast<std::int64_t>(n));

  std::int64_t iter = 0;
  double gap = std::numeric_limits<double>::infinity();
  constexpr double kTau = 1e-12;

  for (; iter < max_iter; ++iter) {
    // Maximal violating pair over both halves; index s in [0, 2n).
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1, j = -1;
    for (Eigen::Index s = 0; s < n; ++s) {
      const double r = y[s] - f[s];
      const double v_pos = r - eps;  // z = +1 slot
      const double v_neg = r + eps;  // z = -1 slot
      if (alpha_pos[s] < C && v_pos > m_up) {
        m_up = v_pos;
        i = s;
      }
      if (alpha_neg[s] > 0.0 && v_neg > m_up) {
        m_up = v_neg;
        i = s + n;
      }
      if (alpha_pos[s] > 0.0 && v_pos < m_low) {
        m_low = v_pos;
        j = s;
      }
      if (alpha_neg[s] < C && v_neg < m_low) {
        m_low = v_neg;
        j = s + n;
      }
    }
    gap = m_up - m_low;
    if (gap <= params.tolerance) break;

    const Eigen::Index ib = i % n, jb = j % n;
    const double zi = i < n ? 1.0 : -1.0;
    const double zj = j < n ? 1.0 : -1.0;
    auto lambda_of = [&](Eigen::Index s) -> double& {
      return s < n ? alpha_pos[s] : alpha_neg[s - n];
    };
    // Gradient entries of the stacked problem.
    const double gi = zi * (f[ib] - y[ib]) + eps;
    const double gj = zj * (f[jb] - y[jb]) + eps;

    double& li = lambda_of(i);
    double& lj = lambda_of(j);
    const double old_li = li, old_lj = lj;

    if (zi != zj) {
      double quad = K(ib, ib) + K(jb, jb) - 2.0 * K(ib, jb);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-gi - gj) / quad;
      const double diff = li - lj;
      li += delta;
      lj += delta;
      if (diff > 0.0 && lj < 0.0) {
        lj = 0.0;
        li = diff;
      } else if (diff <= 0.0 && li < 0.0) {
        li = 0.0;
        lj = -diff;
      }
      if (diff > 0.0 && li > C) {
        li = C;
        lj = C - diff;
      } else if (diff <= 0.0 && lj > C) {
        lj = C;
        li = C + diff;
      }
    } else {
      double quad = K(ib, ib) + K(jb, jb) - 2.0 * K(ib, jb);
      if (quad <= 0.0) quad = kTau;
      const double delta = (gi - gj) / quad;
      const double sum = li + lj;
      li -= delta;
      lj += delta;
      if (sum > C) {
        if (li > C) {
          li = C;
          lj = sum - C;
        }
      } else if (lj < 0.0) {
        lj = 0.0;
        li = sum;
      }
      if (sum > C) {
        if (lj > C) {
          lj = C;
          li = sum - C;
        }
      } else if (li < 0.0) {
        li = 0.0;
        lj = sum;
      }
    }

    const double dbeta_i = zi * (li - old_li);
    const double dbeta_j = zj * (lj - old_lj);
    if (dbeta_i != 0.0) f += dbeta_i * K.col(ib);
    if (dbeta_j != 0.0) f += dbeta_j * K.col(jb);
  }

  if (gap > params.tolerance)
    throw std::runtime_error("fit_svr: SMO hit the iteration cap after " + std::to_string(iter) +
                             " iterations with KKT violation " + std::to_string(gap));

  const Eigen::VectorXd beta = alpha_pos - alpha_neg;

  // Bias from free support vectors; otherwise the midpoint of the KKT
  // feasible interval.
  double free_sum = 0.0;
  Eigen::Index free_count = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < n; ++s) {
    const double r = y[s] - f[s];
    if (alpha_pos[s] > 0.0 && alpha_pos[s] < C) {
      free_sum += r - eps;
      ++free_count;
    }
    if (alpha_neg[s] > 0.0 && alpha_neg[s] < C) {
      free_sum += r + eps;
      ++free_count;
    }
    if (alpha_pos[s] == 0.0) lo = std::max(lo, r - eps);
    if (alpha_pos[s] >= C) hi = std::min(hi, r - eps);
    if (alpha_neg[s] == 0.0) hi = std::min(hi, r + eps);
    if (alpha_neg[s] >= C) lo = std::max(lo, r + eps);
  }
  double bias;
  if (free_count > 0)
    bias = free_sum / static_cast<double>(free_count);
  else
    bias = 0.5 * (lo + hi);

  SvrModel model;
  model.kernel = params.kernel;
  model.gamma = gamma;
  model.C = C;
  model.epsilon = eps;
  model.bias = bias;
  model.feature_names = train.feature_names;
  model.iterations = iter;

  std::vector<Eigen::Index> sv;
  for (Eigen::Index s = 0; s < n; ++s)
    if (std::abs(beta[s]) > 1e-12) sv.push_back(s);
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), train.cols());
  model.dual_coeffs.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.support_vectors.row(static_cast<Eigen::Index>(k)) = train.X.row(sv[k]);
    model.dual_coeffs[static_cast<Eigen::Index>(k)] = beta[sv[k]];
  }
  return model;
}

Eigen::VectorXd predict_svr(const SvrModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.cols() != static_cast<Eigen::Index>(model.feature_names.size()))
    throw std::invalid_argument("predict_svr: feature dimension mismatch");
  if (model.dual_coeffs.size() == 0)
    return Eigen::VectorXd::Constant(X.rows(), model.bias);
  const Eigen::MatrixXd K = kernel_matrix(X, model.support_vectors, model.kernel, model.gamma);
  return (K * model.dual_coeffs).array() + model.bias;
}

std::string to_json_string(const SvrModel& model) {
  nlohmann::json j;
  j["schema"] = "loadcast.svr_model/1";
  j["kernel"] = model.kernel == SvrKernel::Rbf ? "rbf" : "linear";
  j["gamma"] = model.gamma;
  j["C"] = model.C;
  j["epsilon"] = model.epsilon;
  j["bias"] = model.bias;
  j["feature_names"] = model.feature_names;
  j["iterations"] = model.iterations;
  j["dual_coeffs"] = std::vector<double>(model.dual_coeffs.data(),
                                         model.dual_coeffs.data() + model.dual_coeffs.size());
  nlohmann::json svs = nlohmann::json::array();
  for (Eigen::Index r = 0; r < model.support_vectors.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(model.support_vectors.cols()));
    for (Eigen::Index c = 0; c < model.support_vectors.cols(); ++c)
      row[static_cast<std::size_t>(c)] = model.support_vectors(r, c);
    svs.push_back(row);
  }
  j["support_vectors"] = std::move(svs);
  return j.dump(2) + "\n";
}

SvrModel svr_model_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("schema").get<std::string>() != "loadcast.svr_model/1")
    throw std::runtime_error("svr_model_from_json: unsupported schema");
  SvrModel m;
  m.kernel = j.at("kernel").get<std::string>() == "linear" ? SvrKernel::Linear : SvrKernel::Rbf;
  m.gamma = j.at("gamma").get<double>();
  m.C = j.at("C").get<double>();
  m.epsilon = j.at("epsilon").get<double>();
  m.bias = j.at("bias").get<double>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.iterations = j.at("iterations").get<std::int64_t>();
  const auto duals = j.at("dual_coeffs").get<std::vector<double>>();
  m.dual_coeffs =
      Eigen::Map<const Eigen::VectorXd>(duals.data(), static_cast<Eigen::Index>(duals.size()));
  const auto& svs = j.at("support_vectors");
  const Eigen::Index cols = static_cast<Eigen::Index>(m.feature_names.size());
  m.support_vectors.resize(static_cast<Eigen::Index>(svs.size()), cols);
  for (Eigen::Index r = 0; r < m.support_vectors.rows(); ++r) {
    const auto row = svs.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    for (Eigen::Index c = 0; c < cols; ++c)
      m.support_vectors(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

void save_svr_model(const SvrModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_json_string(model);
}

SvrModel load_svr_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return svr_model_from_json(text);
}

}  // namespace loadcast
