#pragma once

// Optimistic policy optimization with counterfactual exploration bonuses.
//
// For a fresh context c_t the learner replays every past round k = 1..t-1:
// it evaluates snapshot f_k at c_t, subtracts the bonus
//
//     b_k(c, a) = min{1, (beta_k / 2) / (1 + sum_{i<k} pi_i(c, a))},
//
// clips at zero, and applies an exponential-weights step to pi_k(c_t, .).
// The last policy pi_t(c_t, .) is the one that is played.

#include "opocmab/core.hpp"
#include "opocmab/learner.hpp"
#include "opocmab/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace opocmab {

template <typename Scalar>
Scalar bonus(Scalar cum_prob, Scalar beta_k) {
  using std::min;
  return min(Scalar(1), (beta_k / Scalar(2)) / (Scalar(1) + cum_prob));
}

template <typename Scalar>
Scalar optimistic_loss(Scalar fhat, Scalar bonus_value) {
  using std::max;
  return max(Scalar(0), fhat - bonus_value);
}

/// pi'(a) proportional to pi(a) * exp(-eta * loss(a)), computed after shifting
/// the losses by their minimum. Writes into `next`, which may alias neither
/// input.
template <typename DerivedP, typename DerivedL, typename DerivedOut>
void exp_weights(const Eigen::MatrixBase<DerivedP>& current, const Eigen::MatrixBase<DerivedL>& losses,
                 typename DerivedP::Scalar eta, Eigen::MatrixBase<DerivedOut> const& next) {
  auto& out = const_cast<Eigen::MatrixBase<DerivedOut>&>(next);
  const auto shift = losses.minCoeff();
  out = current.cwiseProduct((-eta * (losses.array() - shift)).exp().matrix());
  out /= out.sum();
}

ActionDistribution exp_update(const ActionDistribution& current, const Vector& losses, double eta);

enum class BonusMode { kStatic, kAdaptive };

/// beta_k: constant `beta` (static) or gamma * sqrt(k / |A|) (adaptive).
struct BonusSchedule {
  BonusMode mode = BonusMode::kAdaptive;
  double beta = 1.0;
  double gamma = 0.1;

  double at(std::size_t round, Index actions) const;
  void validate() const;
};

/// sqrt(34 K (log 4 + logF + 3 log K + log(1/delta)) / |A|). Throws
/// std::invalid_argument when delta is outside (0,1).
double theoretical_beta(std::size_t horizon, Index actions, double log_f, double delta);

/// sqrt(34 K log_term / |A|), the same formula with the logarithm supplied.
double theoretical_beta_from_log_term(std::size_t horizon, Index actions, double log_term);

struct OpoConfig {
  double eta = 0.1;
  BonusSchedule bonus;
  std::size_t horizon = 1;
  double delta = 0.05;
  double log_f = 0.0;

  void validate() const;

  /// eta = sqrt(2 log|A| / K) (1 when |A| = 1), adaptive bonus with the given
  /// gamma.
  static OpoConfig defaults(std::size_t horizon, Index actions, double gamma = 0.1);

  /// Static bonus at the theoretical beta, with log|F| replaced by
  /// dim * |A| * log K.
  static OpoConfig theoretical(std::size_t horizon, Index actions, Index dim, double delta = 0.05);
};

/// Counterfactual replay for one context.
struct ReplayState {
  /// Column k-1 holds pi_k(c, .), for k = 1..t.
  Eigen::MatrixXd policies;
  /// sum_{i<t} pi_i(c, .); entries in [0, t-1], total t-1.
  Vector cum_probs;
};

struct PolicyReplay {
  ActionDistribution policy;
  ReplayState replay;
};

/// pi_t(context, .) from snapshots f_1..f_{t-1}. Throws std::out_of_range
/// ("missing snapshot") when the store is too short.
PolicyReplay compute_policy_at(const ContextVector& context, std::size_t t, const SnapshotStore& store,
                               const OpoConfig& config);

/// OPO-CMAB over a regression oracle. The snapshot store starts with the
/// zero-weight predictor f_1; every learn() call refits and appends the next
/// snapshot.
class OpoLearner final : public Learner {
 public:
  OpoLearner(Index dim, Index actions, OpoConfig config, OracleConfig oracle = {});

  std::string_view name() const override { return "opo"; }
  Decision decide(const ContextVector& context, std::size_t round) override;
  void learn(const ContextVector& context, Index action, double loss, std::optional<Index> label) override;

  const SnapshotStore& store() const { return store_; }
  const Regressor& regressor() const { return regressor_; }
  const BanditDataset& dataset() const { return dataset_; }
  const OpoConfig& config() const { return config_; }

 private:
  OpoConfig config_;
  Regressor regressor_;
  BanditDataset dataset_;
  SnapshotStore store_;
};

}  // namespace opocmab
