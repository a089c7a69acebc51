#include "opocmab/opo.hpp"

#include <numbers>

namespace opocmab {

ActionDistribution exp_update(const ActionDistribution& current, const Vector& losses, double eta) {
  if (losses.size() != current.size()) throw std::invalid_argument("loss vector size mismatch");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
  Vector next(current.size());
  exp_weights(current.probs(), losses, eta, next);
  return normalize(next);
}

double BonusSchedule::at(std::size_t round, Index actions) const {
  if (mode == BonusMode::kStatic) return beta;
  return gamma * std::sqrt(static_cast<double>(round) / static_cast<double>(actions));
}

void BonusSchedule::validate() const {
  if (mode == BonusMode::kStatic && !(beta > 0.0 && std::isfinite(beta)))
    throw ConfigError("beta must be > 0");
  if (mode == BonusMode::kAdaptive && !(gamma > 0.0 && std::isfinite(gamma)))
    throw ConfigError("gamma must be > 0");
}

double theoretical_beta_from_log_term(std::size_t horizon, Index actions, double log_term) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  ActionSet{actions};
  return std::sqrt(34.0 * static_cast<double>(horizon) * log_term / static_cast<double>(actions));
}

double theoretical_beta(std::size_t horizon, Index actions, double log_f, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!(log_f >= 0.0)) throw std::invalid_argument("logF must be >= 0");
  const double log_term = std::log(4.0) + log_f + 3.0 * std::log(static_cast<double>(horizon)) -
                          std::log(delta);
  return theoretical_beta_from_log_term(horizon, actions, log_term);
}

void OpoConfig::validate() const {
  if (!(eta > 0.0 && std::isfinite(eta))) throw ConfigError("eta must be > 0");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  bonus.validate();
}

OpoConfig OpoConfig::defaults(std::size_t horizon, Index actions, double gamma) {
  OpoConfig config;
  config.horizon = horizon;
  config.eta = actions > 1 ? std::sqrt(2.0 * std::log(static_cast<double>(actions)) /
                                       static_cast<double>(horizon))
                           : 1.0;
  config.bonus.mode = BonusMode::kAdaptive;
  config.bonus.gamma = gamma;
  return config;
}

OpoConfig OpoConfig::theoretical(std::size_t horizon, Index actions, Index dim, double delta) {
  OpoConfig config = defaults(horizon, actions);
  config.delta = delta;
  config.log_f = static_cast<double>(dim * actions) * std::log(static_cast<double>(horizon));
  config.bonus.mode = BonusMode::kStatic;
  config.bonus.beta = theoretical_beta(horizon, actions, config.log_f, delta);
  return config;
}

PolicyReplay compute_policy_at(const ContextVector& context, std::size_t t, const SnapshotStore& store,
                               const OpoConfig& config) {
  if (t < 1) throw std::invalid_argument("rounds are 1-based");
  if (context.dim() != store.dim()) throw std::invalid_argument("context dimension mismatch");
  if (t > 1 && store.size() < t - 1) throw std::out_of_range("missing snapshot");

  const Index actions = store.num_actions();
  ReplayState state;
  state.policies.resize(actions, static_cast<Index>(t));
  state.policies.col(0).setConstant(1.0 / static_cast<double>(actions));
  state.cum_probs = Vector::Zero(actions);

  Vector pred(actions);
  Vector loss(actions);
  for (std::size_t k = 1; k < t; ++k) {
    store.predict_all_at_round(k, context.features(), pred);
    const double beta_k = config.bonus.at(k, actions);
    for (Index a = 0; a < actions; ++a)
      loss[a] = optimistic_loss(pred[a], bonus(state.cum_probs[a], beta_k));
    const auto col = static_cast<Index>(k);
    state.cum_probs += state.policies.col(col - 1);
    exp_weights(state.policies.col(col - 1), loss, config.eta, state.policies.col(col));
  }
  ActionDistribution policy = normalize(state.policies.col(static_cast<Index>(t) - 1));
  return {std::move(policy), std::move(state)};
}

OpoLearner::OpoLearner(Index dim, Index actions, OpoConfig config, OracleConfig oracle)
    : config_(config),
      regressor_(dim, actions, oracle),
      store_(dim, actions, link_for(oracle.kind)) {
  config_.validate();
  snapshot(regressor_, store_);
}

Decision OpoLearner::decide(const ContextVector& context, std::size_t round) {
  PolicyReplay replay = compute_policy_at(context, round, store_, config_);
  const Index actions = store_.num_actions();
  const double beta_t = config_.bonus.at(round, actions);

  Vector bonuses(actions);
  Vector pred(actions);
  store_.predict_all_at_round(round, context.features(), pred);
  Vector estimates(actions);
  for (Index a = 0; a < actions; ++a) {
    bonuses[a] = bonus(replay.replay.cum_probs[a], beta_t);
    estimates[a] = optimistic_loss(pred[a], bonuses[a]);
  }
  return {std::move(replay.policy), std::move(bonuses), std::move(estimates)};
}

void OpoLearner::learn(const ContextVector& context, Index action, double loss, std::optional<Index>) {
  dataset_.append(LossSample(context, action, loss));
  regressor_ = fit(dataset_, std::move(regressor_));
  snapshot(regressor_, store_);
}

}  // namespace opocmab
