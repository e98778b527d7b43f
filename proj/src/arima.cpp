#include "loadcast/arima.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace loadcast {

void ArimaOrder::validate() const {
  if (p < 0 || d < 0 || q < 0) throw std::invalid_argument("ArimaOrder: orders must be >= 0");
  if (p + q + d < 1) throw std::invalid_argument("ArimaOrder: (0,0,0) fits nothing");
}

Eigen::VectorXd difference(const Eigen::Ref<const Eigen::VectorXd>& series, int d) {
  if (d < 0) throw std::invalid_argument("difference: d must be >= 0");
  if (series.size() <= d)
    throw std::invalid_argument("difference: series length must exceed d");
  Eigen::VectorXd w = series;
  for (int pass = 0; pass < d; ++pass)
    w = (w.tail(w.size() - 1) - w.head(w.size() - 1)).eval();
  return w;
}

Eigen::VectorXd anchors_for(const Eigen::Ref<const Eigen::VectorXd>& series, int d) {
  if (series.size() <= d)
    throw std::invalid_argument("anchors_for: series length must exceed d");
  Eigen::VectorXd anchors(d);
  for (int j = 0; j < d; ++j) {
    const Eigen::VectorXd level = difference(series, d - 1 - j);
    anchors[j] = level[level.size() - 1];
  }
  return anchors;
}

Eigen::VectorXd undifference(const Eigen::Ref<const Eigen::VectorXd>& deltas,
                             const Eigen::Ref<const Eigen::VectorXd>& anchors) {
  Eigen::VectorXd out = deltas;
  for (Eigen::Index j = 0; j < anchors.size(); ++j) {
    double level = anchors[j];
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      level += out[i];
      out[i] = level;
    }
  }
  return out;
}

namespace {

constexpr double kExogRidge = 1e-6;  // stabilizes collinear exogenous columns

struct CssProblem {
  Eigen::VectorXd w;    // differenced series
  Eigen::VectorXd xw;   // differenced exogenous, empty when absent
  int p = 0;
  int q = 0;
  bool with_intercept = false;
  bool with_exog = false;

  int dim() const { return (with_intercept ? 1 : 0) + p + q + (with_exog ? 1 : 0); }
  int burn_in() const { return std::max(p, q); }
  Eigen::Index effective_n() const { return w.size() - burn_in(); }

  // params = [c?, phi_1..p, theta_1..q, beta?]
  double css(const Eigen::VectorXd& params) const {
    int idx = 0;
    const double c = with_intercept ? params[idx++] : 0.0;
    const auto phi = params.segment(idx, p);
    idx += p;
    const auto theta = params.segment(idx, q);
    idx += q;
    const double beta = with_exog ? params[idx] : 0.0;

    const Eigen::Index n = w.size();
    Eigen::VectorXd eps = Eigen::VectorXd::Zero(n);
    double ssq = 0.0;
    for (Eigen::Index t = burn_in(); t < n; ++t) {
      double pred = c;
      for (int i = 0; i < p; ++i) pred += phi[i] * w[t - 1 - i];
      for (int j = 0; j < q; ++j) pred += theta[j] * eps[t - 1 - j];
      if (with_exog) pred += beta * xw[t];
      eps[t] = w[t] - pred;
      ssq += eps[t] * eps[t];
    }
    if (with_exog) ssq += kExogRidge * beta * beta;
    return ssq;
  }

  Eigen::VectorXd pack(const ArimaModel& m) const {
    Eigen::VectorXd params(dim());
    int idx = 0;
    if (with_intercept) params[idx++] = m.intercept;
    params.segment(idx, p) = m.phi;
    idx += p;
    params.segment(idx, q) = m.theta;
    idx += q;
    if (with_exog) params[idx] = m.beta.value_or(0.0);
    return params;
  }

  void unpack(const Eigen::VectorXd& params, ArimaModel& m) const {
    int idx = 0;
    m.intercept = with_intercept ? params[idx++] : 0.0;
    m.phi = params.segment(idx, p);
    idx += p;
    m.theta = params.segment(idx, q);
    idx += q;
    if (with_exog) m.beta = params[idx];
  }
};

CssProblem make_problem(const Eigen::Ref<const Eigen::VectorXd>& series,
                        const Eigen::VectorXd* exog, const ArimaOrder& order) {
  order.validate();
  if (exog && exog->size() != series.size())
    throw std::invalid_argument("arima: exogenous series must align with the load series");
  CssProblem prob;
  prob.w = difference(series, order.d);
  if (exog) prob.xw = difference(*exog, order.d);
  prob.p = order.p;
  prob.q = order.q;
  prob.with_intercept = order.d == 0;  // differencing removes the level
  prob.with_exog = exog != nullptr;
  return prob;
}

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  bool converged = false;
  int evaluations = 0;
};

// Standard simplex search (reflect 1, expand 2, contract 1/2, shrink 1/2).
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, double tol, int max_evals) {
  const int n = static_cast<int>(x0.size());
  NelderMeadResult result;
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  for (int i = 0; i < n; ++i)
    simplex[static_cast<std::size_t>(i + 1)][i] += x0[i] != 0.0 ? 0.1 * std::abs(x0[i]) + 0.01 : 0.1;

  std::vector<double> fv(static_cast<std::size_t>(n + 1));
  for (std::size_t i = 0; i < simplex.size(); ++i) fv[i] = f(simplex[i]);
  result.evaluations = n + 1;

  std::vector<std::size_t> idx(simplex.size());
  while (result.evaluations < max_evals) {
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second_worst = idx[idx.size() - 2];

    const double spread = std::abs(fv[worst] - fv[best]);
    if (spread <= tol * (1.0 + std::abs(fv[best]))) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i : idx)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    ++result.evaluations;
    if (fr < fv[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      ++result.evaluations;
      if (fe < fr) {
        simplex[worst] = expanded;
        fv[worst] = fe;
      } else {
        simplex[worst] = reflected;
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      simplex[worst] = reflected;
      fv[worst] = fr;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[worst] - centroid);
      const double fc = f(contracted);
      ++result.evaluations;
      if (fc < fv[worst]) {
        simplex[worst] = contracted;
        fv[worst] = fc;
      } else {
        for (std::size_t i : idx) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          fv[i] = f(simplex[i]);
          ++result.evaluations;
        }
      }
    }
  }

  const std::size_t best =
      static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  result.x = simplex[best];
  result.fx = fv[best];
  return result;
}

ArimaModel fit_css(const Eigen::Ref<const Eigen::VectorXd>& series, const Eigen::VectorXd* exog,
                   const ArimaOrder& order) {
  const CssProblem prob = make_problem(series, exog, order);
  const int min_obs = 10 * (order.p + order.q + 1);
  if (prob.w.size() < min_obs)
    throw std::invalid_argument("arima: need at least " + std::to_string(min_obs) +
                                " observations after differencing, got " +
                                std::to_string(prob.w.size()));

  ArimaModel model = arima_least_squares_start(series, exog, order);

  if (prob.dim() > 0) {
    const Eigen::VectorXd x0 = prob.pack(model);
    const auto objective = [&prob](const Eigen::VectorXd& params) { return prob.css(params); };
    const int max_evals = 2000 * std::max(1, prob.dim());
    const NelderMeadResult nm = nelder_mead(objective, x0, 1e-10, max_evals);
    if (!nm.converged)
      throw std::runtime_error("arima: simplex search did not converge after " +
                               std::to_string(nm.evaluations) +
                               " evaluations (best CSS = " + std::to_string(nm.fx) + ")");
    // Keep whichever of start/refined scores lower; the simplex never
    // reports a point worse than its own start.
    if (nm.fx <= prob.css(x0)) prob.unpack(nm.x, model);
  }

  model.css = prob.css(prob.pack(model));
  const Eigen::Index eff = prob.effective_n();
  model.residual_variance = eff > 0 ? model.css / static_cast<double>(eff) : 0.0;
  return model;
}

}  // namespace

ArimaModel arima_least_squares_start(const Eigen::Ref<const Eigen::VectorXd>& series,
                                     const Eigen::VectorXd* exog, const ArimaOrder& order) {
  const CssProblem prob = make_problem(series, exog, order);
  ArimaModel model;
  model.order = order;
  model.with_intercept = prob.with_intercept;
  model.phi = Eigen::VectorXd::Zero(order.p);
  model.theta = Eigen::VectorXd::Zero(order.q);
  if (prob.with_exog) model.beta = 0.0;

  // Regress w_t on [1?, w_{t-1..t-p}, x_t?]; theta starts at zero.
  const int p = order.p;
  const Eigen::Index n = prob.w.size();
  const Eigen::Index rows = n - p;
  const int cols = (prob.with_intercept ? 1 : 0) + p + (prob.with_exog ? 1 : 0);
  if (cols == 0 || rows < cols) return model;

  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = r + p;
    int c = 0;
    if (prob.with_intercept) A(r, c++) = 1.0;
    for (int i = 0; i < p; ++i) A(r, c++) = prob.w[t - 1 - i];
    if (prob.with_exog) A(r, c++) = prob.xw[t];
    b[r] = prob.w[t];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
  int c = 0;
  if (prob.with_intercept) model.intercept = coef[c++];
  for (int i = 0; i < p; ++i) model.phi[i] = coef[c++];
  if (prob.with_exog) model.beta = coef[c];
  return model;
}

double arima_css(const ArimaModel& model, const Eigen::Ref<const Eigen::VectorXd>& series,
                 const Eigen::VectorXd* exog) {
  const CssProblem prob = make_problem(series, exog, model.order);
  return prob.css(prob.pack(model));
}

ArimaModel fit_arima(const Eigen::Ref<const Eigen::VectorXd>& series, const ArimaOrder& order) {
  return fit_css(series, nullptr, order);
}

ArimaModel fit_arimax(const Eigen::Ref<const Eigen::VectorXd>& series,
                      const Eigen::Ref<const Eigen::VectorXd>& exog, const ArimaOrder& order) {
  const Eigen::VectorXd exog_copy = exog;
  return fit_css(series, &exog_copy, order);
}

Eigen::VectorXd forecast_walk_forward(const ArimaModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& history,
                                      const Eigen::VectorXd* exog_history,
                                      const Eigen::VectorXd* exog_future, int horizon) {
  if (horizon < 1) throw std::invalid_argument("forecast_walk_forward: horizon must be >= 1");
  const bool with_exog = model.beta.has_value();
  if (with_exog && (!exog_history || !exog_future))
    throw std::invalid_argument("forecast_walk_forward: ARIMAX needs exogenous history and future");
  if (with_exog && exog_future->size() < horizon)
    throw std::invalid_argument("forecast_walk_forward: exogenous future shorter than horizon");

  const int d = model.order.d;
  if (history.size() <= d)
    throw std::invalid_argument("forecast_walk_forward: history too short for differencing");

  const Eigen::VectorXd w = difference(history, d);
  Eigen::VectorXd xw;
  if (with_exog) {
    // Difference the concatenated exogenous path once so future deltas line up.
    Eigen::VectorXd full(exog_history->size() + exog_future->size());
    full << *exog_history, *exog_future;
    xw = difference(full, d);
  }

  const int p = model.order.p, q = model.order.q;
  const int burn = std::max(p, q);
  const Eigen::Index n = w.size();

  // In-sample one-step residuals, zero before the burn-in and for the future.
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(n + horizon);
  Eigen::VectorXd wext(n + horizon);
  wext.head(n) = w;
  const Eigen::Index exog_offset = with_exog ? xw.size() - (n + horizon) : 0;
  for (Eigen::Index t = burn; t < n + horizon; ++t) {
    double pred = model.intercept;
    for (int i = 0; i < p; ++i) pred += model.phi[i] * (t - 1 - i >= 0 ? wext[t - 1 - i] : 0.0);
    for (int j = 0; j < q; ++j) pred += model.theta[j] * (t - 1 - j >= 0 ? eps[t - 1 - j] : 0.0);
    if (with_exog) pred += *model.beta * xw[exog_offset + t];
    if (t < n)
      eps[t] = wext[t] - pred;
    else
      wext[t] = pred;
  }

  const Eigen::VectorXd deltas = wext.tail(horizon);
  if (d == 0) return deltas;
  return undifference(deltas, anchors_for(history, d));
}

std::string to_json_string(const ArimaModel& model) {
  nlohmann::json j;
  j["schema"] = "loadcast.arima_model/1";
  j["order"] = {model.order.p, model.order.d, model.order.q};
  j["with_intercept"] = model.with_intercept;
  j["intercept"] = model.intercept;
  j["phi"] = std::vector<double>(model.phi.data(), model.phi.data() + model.phi.size());
  j["theta"] = std::vector<double>(model.theta.data(), model.theta.data() + model.theta.size());
  if (model.beta)
    j["beta"] = *model.beta;
  else
    j["beta"] = nullptr;
  j["residual_variance"] = model.residual_variance;
  j["css"] = model.css;
  return j.dump(2) + "\n";
}

ArimaModel arima_model_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("schema").get<std::string>() != "loadcast.arima_model/1")
    throw std::runtime_error("arima_model_from_json: unsupported schema");
  ArimaModel m;
  m.order.p = j.at("order").at(0).get<int>();
  m.order.d = j.at("order").at(1).get<int>();
  m.order.q = j.at("order").at(2).get<int>();
  m.with_intercept = j.at("with_intercept").get<bool>();
  m.intercept = j.at("intercept").get<double>();
  const auto phi = j.at("phi").get<std::vector<double>>();
  const auto theta = j.at("theta").get<std::vector<double>>();
  m.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()));
  m.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  if (!j.at("beta").is_null()) m.beta = j.at("beta").get<double>();
  m.residual_variance = j.at("residual_variance").get<double>();
  m.css = j.at("css").get<double>();
  return m;
}

void save_arima_model(const ArimaModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_json_string(model);
}

ArimaModel load_arima_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return arima_model_from_json(text);
}

}  // namespace loadcast
