#pragma once

// Test-only reference implementations. They share no code path with the
// library beyond the public data types, so they can serve as independent
// oracles.

#include "opocmab/core.hpp"
#include "opocmab/oracle.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace opocmab::testing {

/// Ridge solution from the stacked design matrix. Solves the augmented least
/// squares problem [X; sqrt(lambda) I] w = [y; 0] with column-pivoted QR.
inline Vector dense_ridge_solve(const BanditDataset& data, Index dim, Index actions, double lambda) {
  const Index p = dim * actions;
  const Index n = static_cast<Index>(data.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + p, p);
  Vector y = Vector::Zero(n + p);
  for (Index i = 0; i < n; ++i) {
    const LossSample& s = data[static_cast<std::size_t>(i)];
    for (Index j = 0; j < dim; ++j) a(i, s.action * dim + j) = s.context.features()[j];
    y[i] = s.loss;
  }
  a.bottomRows(p) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
  return a.colPivHouseholderQr().solve(y);
}

/// Plain-loop evaluation of the policy after t-1 optimistic exponential
/// updates on one context. `weights[k-1]` are the weights of snapshot k;
/// identity link, clipped.
inline std::vector<double> reference_policy(const std::vector<double>& context,
                                            const std::vector<std::vector<double>>& weights, std::size_t t,
                                            Index actions, double eta,
                                            const std::function<double(std::size_t)>& beta_at) {
  const auto n = static_cast<std::size_t>(actions);
  const std::size_t d = context.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> counts(n, 0.0);
  for (std::size_t k = 1; k < t; ++k) {
    std::vector<double> loss(n);
    for (std::size_t a = 0; a < n; ++a) {
      double z = 0.0;
      for (std::size_t j = 0; j < d; ++j) z += weights[k - 1][a * d + j] * context[j];
      const double fhat = std::min(1.0, std::max(0.0, z));
      const double b = std::min(1.0, (beta_at(k) / 2.0) / (1.0 + counts[a]));
      loss[a] = std::max(0.0, fhat - b);
    }
    double total = 0.0;
    std::vector<double> next(n);
    for (std::size_t a = 0; a < n; ++a) {
      next[a] = pi[a] * std::exp(-eta * loss[a]);
      total += next[a];
    }
    for (std::size_t a = 0; a < n; ++a) {
      counts[a] += pi[a];
      pi[a] = next[a] / total;
    }
  }
  return pi;
}

/// Double loop over history and arms.
inline double brute_force_squared_error(const SnapshotStore& store, std::size_t round,
                                        const std::vector<HistoryEntry>& history, const Environment& env) {
  double total = 0.0;
  for (const HistoryEntry& h : history)
    for (Index a = 0; a < env.num_actions(); ++a) {
      const double diff = store.predict_at_round(round, h.context, a) - env.expected_loss(h.context, a);
      total += h.policy[a] * diff * diff;
    }
  return total;
}

/// Random point in the probability simplex. `sharpness` > 1 concentrates mass.
inline Vector random_simplex(Rng& rng, Index n, double sharpness = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = std::pow(-std::log(1.0 - rng.uniform()), sharpness);
  return v / v.sum();
}

}  // namespace opocmab::testing
