#include "opocmab/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace opocmab {

void OracleConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("ridge lambda must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("oracle learning rate must be > 0");
  if (!(lr_decay >= 0.0)) throw ConfigError("learning rate decay must be >= 0");
}

Link link_for(OracleKind kind) {
  return kind == OracleKind::kSgdLogistic ? Link::kSigmoid : Link::kIdentity;
}

double link_value(Link link, double z) {
  if (link == Link::kSigmoid) return 1.0 / (1.0 + std::exp(-z));
  return std::clamp(z, 0.0, 1.0);
}

Regressor::Regressor(Index dim, Index actions, OracleConfig config)
    : dim_(dim), actions_(actions), config_(config), weights_(Vector::Zero(dim * actions)) {
  FeatureMap{dim, actions};
  config_.validate();
  if (config_.kind == OracleKind::kRidge) {
    gram_.assign(static_cast<std::size_t>(actions),
                 config_.lambda * Eigen::MatrixXd::Identity(dim, dim));
    moment_.assign(static_cast<std::size_t>(actions), Vector::Zero(dim));
  }
  block_updates_.assign(static_cast<std::size_t>(actions), 0);
}

void Regressor::check_context(const ContextVector& context) const {
  if (context.dim() != dim_) throw std::invalid_argument("context dimension mismatch");
}

void Regressor::update(const LossSample& sample) {
  check_context(sample.context);
  if (sample.action >= actions_) throw std::out_of_range("action index out of range");
  const auto a = static_cast<std::size_t>(sample.action);
  const Vector& c = sample.context.features();
  auto block = weights_.segment(sample.action * dim_, dim_);

  switch (config_.kind) {
    case OracleKind::kRidge:
      gram_[a].selfadjointView<Eigen::Lower>().rankUpdate(c);
      gram_[a].triangularView<Eigen::StrictlyUpper>() = gram_[a].transpose();
      moment_[a] += sample.loss * c;
      ++block_updates_[a];
      solve_block(sample.action);
      break;
    case OracleKind::kSgdSquared:
    case OracleKind::kSgdLogistic: {
      const double step = config_.learning_rate /
                          std::pow(1.0 + static_cast<double>(block_updates_[a]), config_.lr_decay);
      const double z = block.dot(c);
      // Identity link: squared-loss gradient on the raw score. Sigmoid link:
      // logistic-loss gradient, which has the same (prediction - target) form.
      const double pred = config_.kind == OracleKind::kSgdLogistic ? 1.0 / (1.0 + std::exp(-z)) : z;
      block -= step * (pred - sample.loss) * c;
      ++block_updates_[a];
      break;
    }
  }
  ++fitted_;
}

void Regressor::solve_block(Index action) {
  const auto a = static_cast<std::size_t>(action);
  auto block = weights_.segment(action * dim_, dim_);
  if (config_.lambda == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram_[a]);
    if (lu.rank() < dim_) throw std::domain_error("ill-posed least squares; set λ>0");
    block = lu.solve(moment_[a]);
    return;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram_[a]);
  if (ldlt.info() != Eigen::Success) throw std::domain_error("ill-posed least squares; set λ>0");
  block = ldlt.solve(moment_[a]);
}

void Regressor::set_weights(Vector weights) {
  if (weights.size() != dim_ * actions_) throw std::invalid_argument("weight dimension mismatch");
  weights_ = std::move(weights);
}

double Regressor::predict(const ContextVector& context, Index action) const {
  check_context(context);
  if (action < 0 || action >= actions_) throw std::out_of_range("action index out of range");
  return link_value(link(), weights_.segment(action * dim_, dim_).dot(context.features()));
}

Vector Regressor::predict_all(const ContextVector& context) const {
  check_context(context);
  Vector out = Eigen::Map<const Eigen::MatrixXd>(weights_.data(), dim_, actions_).transpose() *
               context.features();
  for (Index a = 0; a < actions_; ++a) out[a] = link_value(link(), out[a]);
  return out;
}

Regressor fit(const BanditDataset& dataset, Regressor regressor) {
  if (regressor.fitted_count() > dataset.size())
    throw std::invalid_argument("regressor has seen more records than the dataset holds");
  for (std::size_t i = regressor.fitted_count(); i < dataset.size(); ++i) regressor.update(dataset[i]);
  return regressor;
}

double predict(const Regressor& regressor, const ContextVector& context, Index action) {
  return regressor.predict(context, action);
}

SnapshotStore::SnapshotStore(Index dim, Index actions, Link link)
    : dim_(dim), actions_(actions), link_(link) {
  FeatureMap{dim, actions};
}

void SnapshotStore::append(const Regressor& regressor) {
  if (regressor.dim() != dim_ || regressor.num_actions() != actions_ || regressor.link() != link_)
    throw std::invalid_argument("regressor shape does not match snapshot store");
  snapshots_.push_back(regressor.weights());
}

const Vector& SnapshotStore::weights_at(std::size_t round) const {
  if (round < 1 || round > snapshots_.size()) throw std::out_of_range("missing snapshot");
  return snapshots_[round - 1];
}

double SnapshotStore::predict_at_round(std::size_t round, const ContextVector& context,
                                       Index action) const {
  if (context.dim() != dim_) throw std::invalid_argument("context dimension mismatch");
  if (action < 0 || action >= actions_) throw std::out_of_range("action index out of range");
  const Vector& w = weights_at(round);
  return link_value(link_, w.segment(action * dim_, dim_).dot(context.features()));
}

void snapshot(const Regressor& regressor, SnapshotStore& store) { store.append(regressor); }

double predict_at_round(const SnapshotStore& store, std::size_t round, const ContextVector& context,
                        Index action) {
  return store.predict_at_round(round, context, action);
}

double cumulative_squared_error(const SnapshotStore& store, std::size_t round,
                                std::span<const HistoryEntry> history, const Environment& env) {
  if (!env.has_ground_truth())
    throw std::invalid_argument("diagnostic requires synthetic environment");
  Vector pred(store.num_actions());
  double total = 0.0;
  for (const HistoryEntry& entry : history) {
    store.predict_all_at_round(round, entry.context.features(), pred);
    const Vector diff = pred - expected_losses(env, entry.context);
    total += entry.policy.probs().dot(diff.cwiseAbs2());
  }
  return total;
}

}  // namespace opocmab
