#include "opocmab/baselines.hpp"

#include <cmath>

namespace opocmab {

namespace {

ActionDistribution point_mass(Index size, Index at) {
  Vector p = Vector::Zero(size);
  p[at] = 1.0;
  return normalize(p);
}

}  // namespace

Index argmin_lowest(const Vector& values) {
  if (values.size() == 0) throw std::invalid_argument("empty prediction vector");
  Index best = 0;
  for (Index a = 1; a < values.size(); ++a)
    if (values[a] < values[best]) best = a;
  return best;
}

ActionDistribution greedy_policy(const Vector& predictions) {
  return point_mass(predictions.size(), argmin_lowest(predictions));
}

ActionDistribution igw_policy(const Vector& predictions, double gamma_k) {
  if (!(gamma_k > 0.0)) throw std::invalid_argument("igw gamma must be > 0");
  const Index n = predictions.size();
  const Index best = argmin_lowest(predictions);
  Vector p(n);
  double rest = 0.0;
  for (Index a = 0; a < n; ++a) {
    if (a == best) continue;
    p[a] = 1.0 / (static_cast<double>(n) + gamma_k * (predictions[a] - predictions[best]));
    rest += p[a];
  }
  p[best] = 1.0 - rest;
  return normalize(p);
}

ActionDistribution optimistic_policy(const Vector& predictions, const Vector& bonuses) {
  if (predictions.size() != bonuses.size()) throw std::invalid_argument("bonus vector size mismatch");
  Vector values(predictions.size());
  for (Index a = 0; a < values.size(); ++a) values[a] = optimistic_loss(predictions[a], bonuses[a]);
  return greedy_policy(values);
}

ActionDistribution epsilon_greedy_policy(const Vector& predictions, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  const Index n = predictions.size();
  Vector p = Vector::Constant(n, epsilon / static_cast<double>(n));
  p[argmin_lowest(predictions)] += 1.0 - epsilon;
  return normalize(p);
}

double BaselineConfig::igw_gamma(std::size_t round) const {
  return gamma0 * std::pow(static_cast<double>(round), rho);
}

void BaselineConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0,1]");
  if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0,1]");
  if (kind == BaselineKind::kOptimistic) bonus.validate();
}

PredictionLearner::PredictionLearner(Index dim, Index actions, BaselineConfig config, OracleConfig oracle)
    : config_(config), regressor_(dim, actions, oracle) {
  config_.validate();
  if (config_.kind != BaselineKind::kGreedy && config_.kind != BaselineKind::kEpsilonGreedy &&
      config_.kind != BaselineKind::kIgw)
    throw ConfigError("PredictionLearner supports greedy, epsilon-greedy and igw");
}

std::string_view PredictionLearner::name() const {
  switch (config_.kind) {
    case BaselineKind::kEpsilonGreedy: return "epsilon-greedy";
    case BaselineKind::kIgw: return "igw";
    default: return "greedy";
  }
}

Decision PredictionLearner::decide(const ContextVector& context, std::size_t round) {
  const Vector pred = regressor_.predict_all(context);
  switch (config_.kind) {
    case BaselineKind::kEpsilonGreedy: return {epsilon_greedy_policy(pred, config_.epsilon), {}, {}};
    case BaselineKind::kIgw: return {igw_policy(pred, config_.igw_gamma(round)), {}, {}};
    default: return {greedy_policy(pred), {}, {}};
  }
}

void PredictionLearner::learn(const ContextVector& context, Index action, double loss,
                              std::optional<Index>) {
  dataset_.append(LossSample(context, action, loss));
  regressor_ = fit(dataset_, std::move(regressor_));
}

OptimisticLearner::OptimisticLearner(Index dim, Index actions, BonusSchedule bonus, OracleConfig oracle)
    : bonus_(bonus), regressor_(dim, actions, oracle), store_(dim, actions, link_for(oracle.kind)) {
  bonus_.validate();
  snapshot(regressor_, store_);
}

Decision OptimisticLearner::decide(const ContextVector& context, std::size_t round) {
  const Index actions = store_.num_actions();
  Vector counts = Vector::Zero(actions);
  Vector pred(actions);
  Vector bonuses(actions);
  for (std::size_t k = 1; k <= round; ++k) {
    store_.predict_all_at_round(k, context.features(), pred);
    const double beta_k = bonus_.at(k, actions);
    for (Index a = 0; a < actions; ++a) bonuses[a] = bonus(counts[a], beta_k);
    if (k == round) break;
    Vector values(actions);
    for (Index a = 0; a < actions; ++a) values[a] = optimistic_loss(pred[a], bonuses[a]);
    counts[argmin_lowest(values)] += 1.0;
  }
  return {optimistic_policy(pred, bonuses), bonuses, {}};
}

void OptimisticLearner::learn(const ContextVector& context, Index action, double loss,
                              std::optional<Index>) {
  dataset_.append(LossSample(context, action, loss));
  regressor_ = fit(dataset_, std::move(regressor_));
  snapshot(regressor_, store_);
}

SupervisedLearner::SupervisedLearner(Index dim, Index actions, OracleConfig oracle)
    : regressor_(dim, actions, oracle) {}

Decision SupervisedLearner::decide(const ContextVector& context, std::size_t) {
  return {greedy_policy(regressor_.predict_all(context)), {}, {}};
}

void SupervisedLearner::learn(const ContextVector& context, Index, double, std::optional<Index> label) {
  if (!label) throw std::invalid_argument("supervised baseline requires a labelled dataset environment");
  for (Index a = 0; a < regressor_.num_actions(); ++a)
    dataset_.append(LossSample(context, a, a == *label ? 0.0 : 1.0));
  regressor_ = fit(dataset_, std::move(regressor_));
}

}  // namespace opocmab
