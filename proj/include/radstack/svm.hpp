#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "radstack/common.hpp"

namespace radstack {

/// Linear decision function w.x + b. The bias is trained as an augmented
/// always-one feature, so it shares the L2 penalty.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double regularization_c = 1.0;
  double objective = 0.0;

  double decision(const std::vector<double>& x) const {
    double s = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * x[j];
    return s;
  }
};

/// L1-hinge linear SVM minimizing 0.5*||w||^2 + C*sum hinge(y_i * f(x_i)),
/// trained by dual coordinate descent. Runs until the primal-dual gap drops
/// below `tol` relative to the primal objective (or max_epochs).
/// Deterministic given the seed. X is row-major n x p; y entries are +-1.
inline LinearModel train_linear_svm(const std::vector<double>& X, const std::vector<int>& y, std::size_t n,
                                    std::size_t p, double C = 1.0, std::uint64_t seed = 0,
                                    double tol = 1e-4, int max_epochs = 2000) {
  if (n == 0 || y.size() != n || X.size() != n * p) throw validation_error("train_linear_svm: bad shapes");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == -1) has_neg = true;
    else throw validation_error("train_linear_svm: labels must be +-1");
  }
  if (!has_pos || !has_neg) throw validation_error("train_linear_svm: single class");

  const std::size_t pa = p + 1;  // augmented bias column
  std::vector<double> w(pa, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = 1.0;  // bias feature
    for (std::size_t j = 0; j < p; ++j) q += X[i * p + j] * X[i * p + j];
    qdiag[i] = q;
  }

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  auto decision = [&](std::size_t i) {
    double s = w[p];
    for (std::size_t j = 0; j < p; ++j) s += w[j] * X[i * p + j];
    return s;
  };

  double primal = 0;
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const double yi = y[idx];
      const double g = yi * decision(idx) - 1.0;
      double pg = g;
      if (alpha[idx] == 0) pg = std::min(g, 0.0);
      else if (alpha[idx] == C) pg = std::max(g, 0.0);
      if (pg == 0) continue;
      const double old = alpha[idx];
      alpha[idx] = std::min(std::max(alpha[idx] - g / qdiag[idx], 0.0), C);
      const double delta = (alpha[idx] - old) * yi;
      if (delta != 0) {
        for (std::size_t j = 0; j < p; ++j) w[j] += delta * X[idx * p + j];
        w[p] += delta;
      }
    }
    // primal-dual gap check once per epoch
    double wnorm2 = 0;
    for (double v : w) wnorm2 += v * v;
    double hinge = 0, asum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      hinge += std::max(0.0, 1.0 - y[i] * decision(i));
      asum += alpha[i];
    }
    primal = 0.5 * wnorm2 + C * hinge;
    const double dual = asum - 0.5 * wnorm2;
    if (primal - dual <= tol * std::max(1.0, std::abs(primal))) break;
  }

  LinearModel model;
  model.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p));
  model.bias = w[p];
  model.regularization_c = C;
  model.objective = primal;
  return model;
}

}  // namespace radstack
