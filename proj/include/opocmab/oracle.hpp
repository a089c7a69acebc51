#pragma once

// Least-squares regression oracles over the block-one-hot feature map, and the
// append-only store of per-round weight snapshots used for counterfactual
// replay.

#include "opocmab/core.hpp"

#include <span>
#include <vector>

namespace opocmab {

enum class OracleKind { kRidge, kSgdSquared, kSgdLogistic };
enum class Link { kIdentity, kSigmoid };

struct OracleConfig {
  OracleKind kind = OracleKind::kRidge;
  double lambda = 1e-6;         // ridge only
  double learning_rate = 0.1;   // sgd only: step_n = learning_rate / (1 + n)^lr_decay
  double lr_decay = 0.5;

  void validate() const;
};

Link link_for(OracleKind kind);

/// Applies the link and clips to [0,1].
double link_value(Link link, double z);

class BanditDataset {
 public:
  void append(LossSample sample) { records_.push_back(std::move(sample)); }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const LossSample& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

 private:
  std::vector<LossSample> records_;
};

/// Loss model f(c, a) = link(<w, phi(c, a)>) clipped to [0,1].
///
/// The ridge kind keeps, for every arm a, the Gram block G_a = lambda*I +
/// sum c c^T and the moment b_a = sum c * loss over the samples played on a;
/// each update adds one rank-1 term and re-solves the touched block with a
/// Cholesky (LDLT) factorization, so the weights always equal the exact
/// minimizer of sum (f(c_i, a_i) - l_i)^2 + lambda |w|^2.
class Regressor {
 public:
  Regressor(Index dim, Index actions, OracleConfig config = {});

  Index dim() const { return dim_; }
  Index num_actions() const { return actions_; }
  Link link() const { return link_for(config_.kind); }
  const OracleConfig& config() const { return config_; }
  const Vector& weights() const { return weights_; }
  /// Number of samples folded into the weights so far.
  std::size_t fitted_count() const { return fitted_; }

  void update(const LossSample& sample);

  /// Overrides the weights. Sufficient statistics are left untouched, so this
  /// is meant for fixed predictors (tests, ground truth), not for fitting.
  void set_weights(Vector weights);

  double predict(const ContextVector& context, Index action) const;
  Vector predict_all(const ContextVector& context) const;

 private:
  void check_context(const ContextVector& context) const;
  void solve_block(Index action);

  Index dim_;
  Index actions_;
  OracleConfig config_;
  Vector weights_;
  std::size_t fitted_ = 0;
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<Vector> moment_;
  std::vector<std::size_t> block_updates_;
};

/// Folds dataset records [regressor.fitted_count(), dataset.size()) into the
/// regressor and returns it. For ridge this yields the exact regularized
/// least-squares solution over the whole dataset; sgd kinds take one gradient
/// step per new record.
Regressor fit(const BanditDataset& dataset, Regressor regressor);

double predict(const Regressor& regressor, const ContextVector& context, Index action);

/// Weight snapshots f_1, f_2, ... in round order. Round k (1-based) maps to the
/// k-th appended snapshot; entries are never modified after append.
class SnapshotStore {
 public:
  SnapshotStore(Index dim, Index actions, Link link);

  Index dim() const { return dim_; }
  Index num_actions() const { return actions_; }
  Link link() const { return link_; }
  std::size_t size() const { return snapshots_.size(); }

  void append(const Regressor& regressor);

  /// Throws std::out_of_range("missing snapshot") for rounds not yet stored.
  const Vector& weights_at(std::size_t round) const;

  double predict_at_round(std::size_t round, const ContextVector& context, Index action) const;

  /// Predictions of snapshot `round` for every arm, written into `out`.
  template <typename Derived>
  void predict_all_at_round(std::size_t round, const Vector& features,
                            Eigen::MatrixBase<Derived> const& out) const {
    const Vector& w = weights_at(round);
    auto& dst = const_cast<Eigen::MatrixBase<Derived>&>(out);
    dst.noalias() = Eigen::Map<const Eigen::MatrixXd>(w.data(), dim_, actions_).transpose() * features;
    for (Index a = 0; a < actions_; ++a) dst(a) = link_value(link_, dst(a));
  }

 private:
  Index dim_;
  Index actions_;
  Link link_;
  std::vector<Vector> snapshots_;
};

void snapshot(const Regressor& regressor, SnapshotStore& store);

double predict_at_round(const SnapshotStore& store, std::size_t round, const ContextVector& context,
                        Index action);

struct HistoryEntry {
  ContextVector context;
  ActionDistribution policy;
};

/// sum_i E_{a ~ policy_i}[(f_round(c_i, a) - f*(c_i, a))^2] over every entry
/// of `history`, with f_round the snapshot for `round`. Requires ground truth.
double cumulative_squared_error(const SnapshotStore& store, std::size_t round,
                                std::span<const HistoryEntry> history, const Environment& env);

}  // namespace opocmab
