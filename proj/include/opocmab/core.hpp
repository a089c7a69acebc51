#pragma once

// Shared domain types: contexts, arm sets, action distributions, the
// block-one-hot feature map, and the environment interface every learner is
// driven through.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace opocmab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

/// Invalid run configuration. The CLI maps it to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File system failure. The CLI maps it to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Absolute tolerance on the sum of an ActionDistribution.
inline constexpr double kProbabilityTolerance = 1e-9;

/// Seeded generator. Independent streams are derived from (seed, stream, index)
/// so that e.g. the context drawn at round t never depends on what the learner
/// did before round t.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t index = 0);

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

class ContextVector {
 public:
  ContextVector() = default;
  explicit ContextVector(Vector features, std::optional<std::size_t> id = std::nullopt);

  const Vector& features() const { return features_; }
  Index dim() const { return features_.size(); }
  std::optional<std::size_t> id() const { return id_; }

 private:
  Vector features_;
  std::optional<std::size_t> id_;
};

struct ActionSet {
  explicit ActionSet(Index n);
  Index count;
};

/// Probability vector over arms 0..n-1. Sums to one within
/// kProbabilityTolerance and is entrywise nonnegative.
class ActionDistribution {
 public:
  /// Validates; throws std::invalid_argument on a vector that is not a
  /// distribution.
  static ActionDistribution from_probabilities(Vector probs);

  const Vector& probs() const { return probs_; }
  Index size() const { return probs_.size(); }
  double operator[](Index a) const { return probs_[a]; }

 private:
  explicit ActionDistribution(Vector probs) : probs_(std::move(probs)) {}
  Vector probs_;

  friend ActionDistribution normalize(const Vector& raw);
};

/// phi(c, a): c copied into block a of a (dim * actions) vector.
class FeatureMap {
 public:
  FeatureMap(Index dim, Index actions);

  Index dim() const { return dim_; }
  Index actions() const { return actions_; }
  Index output_dim() const { return dim_ * actions_; }

  Vector operator()(const ContextVector& context, Index action) const;

 private:
  Index dim_;
  Index actions_;
};

struct LossSample {
  LossSample(ContextVector context, Index action, double loss);

  ContextVector context;
  Index action;
  double loss;
};

/// Divides a nonnegative weight vector by its sum. Throws
/// std::invalid_argument("degenerate weight vector") when the vector is all
/// zero, negative somewhere, or non-finite.
ActionDistribution normalize(const Vector& raw);

/// Inverse-CDF draw in action-index order; consumes exactly one uniform.
Index sample_action(const ActionDistribution& dist, Rng& rng);

ActionDistribution uniform_policy(ActionSet actions);

/// Shannon entropy in nats.
double entropy(const ActionDistribution& dist);

/// Source of contexts and losses. Rounds are 1-based. Implementations are
/// immutable: context(t) and loss(t, ...) are pure functions of the
/// environment's seed and their arguments.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Index dim() const = 0;
  virtual Index num_actions() const = 0;
  /// Number of available rounds, or nullopt when unbounded.
  virtual std::optional<std::size_t> length() const = 0;

  virtual ContextVector context(std::size_t round) const = 0;
  virtual double loss(std::size_t round, const ContextVector& context, Index action) const = 0;

  /// Whether expected_loss is available (synthetic instances only).
  virtual bool has_ground_truth() const = 0;
  virtual double expected_loss(const ContextVector& context, Index action) const = 0;

  /// Class label of the row served at `round` (dataset environments only).
  virtual std::optional<Index> label(std::size_t round) const = 0;
};

/// f*(c, .) for every arm.
Vector expected_losses(const Environment& env, const ContextVector& context);

}  // namespace opocmab
