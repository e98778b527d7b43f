#pragma once

// Test-only oracles. They recompute expected results through independent
// code paths (exhaustive enumeration, direct recursions) so library
// implementations are checked against them, never against themselves.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracles {

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exhaustive scan of every (feature, midpoint) pair. Sums are recomputed per
// candidate from scratch over rows taken in value order (stable by row
// index), so mathematically tied gains are bitwise tied as well and the
// lowest-feature / lowest-threshold tie-break is exact.
inline Split best_split_exhaustive(const Eigen::MatrixXd& X, const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& h, double lambda, double gamma,
                                   double min_child_weight) {
  const auto score = [lambda](double gs, double hs) { return gs * gs / (hs + lambda); };
  double total_g = 0.0, total_h = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    total_g += g[i];
    total_h += h[i];
  }
  Split best;
  for (int f = 0; f < X.cols(); ++f) {
    std::vector<int> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&X, f](int a, int b) { return X(a, f) < X(b, f); });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      if (X(order[i], f) == X(order[i + 1], f)) continue;
      const double threshold = 0.5 * (X(order[i], f) + X(order[i + 1], f));
      double gl = 0.0, hl = 0.0;
      for (std::size_t j = 0; j <= i; ++j) {
        gl += g[order[j]];
        hl += h[order[j]];
      }
      const double gr = total_g - gl;
      const double hr = total_h - hl;
      if (hl < min_child_weight || hr < min_child_weight) continue;
      const double gain =
          0.5 * (score(gl, hl) + score(gr, hr) - score(total_g, total_h)) - gamma;
      if (!best.found || gain > best.gain) {
        best.found = true;
        best.feature = f;
        best.threshold = threshold;
        best.gain = gain;
      }
    }
  }
  if (best.found && best.gain <= 0.0) best.found = false;
  return best;
}

// Seeded AR(1): x_t = intercept + phi * x_{t-1} + N(0, noise_std^2).
inline Eigen::VectorXd simulate_ar1(double phi, double intercept, double noise_std,
                                    Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std);
  Eigen::VectorXd x(n);
  double state = intercept / (1.0 - phi);
  for (Eigen::Index t = 0; t < n; ++t) {
    state = intercept + phi * state + noise(rng);
    x[t] = state;
  }
  return x;
}

}  // namespace oracles
