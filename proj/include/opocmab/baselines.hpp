#pragma once

// Comparison policies over the same regression oracle: greedy, epsilon-greedy,
// inverse gap weighting, optimistic (deterministic, counterfactual bonuses),
// full-feedback supervised, and uniform random.
//
// All policy maps take predicted *losses*; the best arm is the argmin, ties go
// to the lowest index.

#include "opocmab/core.hpp"
#include "opocmab/learner.hpp"
#include "opocmab/opo.hpp"
#include "opocmab/oracle.hpp"

namespace opocmab {

Index argmin_lowest(const Vector& values);

ActionDistribution greedy_policy(const Vector& predictions);

/// p(a) = 1 / (|A| + gamma_k (pred(a) - pred(a*))) for a != a*, remaining
/// mass on a*.
ActionDistribution igw_policy(const Vector& predictions, double gamma_k);

/// Point mass on argmin max{0, pred - bonus}.
ActionDistribution optimistic_policy(const Vector& predictions, const Vector& bonuses);

/// (1 - epsilon) * greedy + epsilon * uniform.
ActionDistribution epsilon_greedy_policy(const Vector& predictions, double epsilon);

enum class BaselineKind { kGreedy, kEpsilonGreedy, kIgw, kOptimistic, kSupervised, kUniform };

struct BaselineConfig {
  BaselineKind kind = BaselineKind::kGreedy;
  double epsilon = 0.05;
  double gamma0 = 100.0;  // igw scale gamma_k = gamma0 * k^rho
  double rho = 0.5;
  BonusSchedule bonus;    // optimistic only

  double igw_gamma(std::size_t round) const;
  void validate() const;
};

/// Greedy, epsilon-greedy and IGW: a stateless policy map applied to the
/// current oracle's predictions, bandit feedback only.
class PredictionLearner final : public Learner {
 public:
  PredictionLearner(Index dim, Index actions, BaselineConfig config, OracleConfig oracle = {});

  std::string_view name() const override;
  Decision decide(const ContextVector& context, std::size_t round) override;
  void learn(const ContextVector& context, Index action, double loss, std::optional<Index> label) override;

  const Regressor& regressor() const { return regressor_; }

 private:
  BaselineConfig config_;
  Regressor regressor_;
  BanditDataset dataset_;
};

/// Deterministic optimism: the played arm at round t is argmin of
/// max{0, f_t - b_t} where the bonus counts come from replaying the same
/// deterministic rule over snapshots f_1..f_{t-1} for the current context.
class OptimisticLearner final : public Learner {
 public:
  OptimisticLearner(Index dim, Index actions, BonusSchedule bonus, OracleConfig oracle = {});

  std::string_view name() const override { return "optimistic"; }
  Decision decide(const ContextVector& context, std::size_t round) override;
  void learn(const ContextVector& context, Index action, double loss, std::optional<Index> label) override;

 private:
  BonusSchedule bonus_;
  Regressor regressor_;
  BanditDataset dataset_;
  SnapshotStore store_;
};

/// Full-information reference: plays the greedy arm, then regresses every arm
/// on its true 0/1 loss for the context. Needs labels.
class SupervisedLearner final : public Learner {
 public:
  SupervisedLearner(Index dim, Index actions, OracleConfig oracle = {});

  std::string_view name() const override { return "supervised"; }
  Decision decide(const ContextVector& context, std::size_t round) override;
  void learn(const ContextVector& context, Index action, double loss, std::optional<Index> label) override;

  const Regressor& regressor() const { return regressor_; }

 private:
  Regressor regressor_;
  BanditDataset dataset_;
};

class UniformLearner final : public Learner {
 public:
  explicit UniformLearner(Index actions) : actions_(actions) {}

  std::string_view name() const override { return "uniform"; }
  Decision decide(const ContextVector&, std::size_t) override { return {uniform_policy(actions_), {}, {}}; }
  void learn(const ContextVector&, Index, double, std::optional<Index>) override {}

 private:
  ActionSet actions_;
};

}  // namespace opocmab
