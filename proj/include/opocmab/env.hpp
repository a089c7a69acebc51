#pragma once

// Environments.
//
// SyntheticEnv is a realizable instance: contexts are c = (1, u) with u in the
// unit ball of R^{d-1}, and f*(c, a) = <w*_a, c> lies in [0,1] for every such c,
// so the linear ridge oracle can represent f* exactly and no clipping is ever
// active on the support.
//
// DatasetEnv replays a multiclass table in a seeded permutation; playing the
// row's label costs 0, anything else costs 1.

#include "opocmab/core.hpp"
#include "opocmab/oracle.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace opocmab {

enum class NoiseKind { kBernoulli, kTruncatedGaussian };
enum class ContextDist { kSphere, kBall };

struct SyntheticParams {
  Index dim = 5;
  Index actions = 4;
  NoiseKind noise = NoiseKind::kBernoulli;
  /// Standard deviation of the Gaussian before clipping to [0,1]. Clipping
  /// biases the mean toward 0.5 near the ends of the range.
  double sigma = 0.1;
  ContextDist contexts = ContextDist::kSphere;
  /// Seed of the ground-truth weights; the run seed only drives the streams.
  std::uint64_t instance_seed = 1;

  void validate() const;
};

class SyntheticEnv final : public Environment {
 public:
  SyntheticEnv(SyntheticParams params, Vector wstar, std::uint64_t seed);

  Index dim() const override { return params_.dim; }
  Index num_actions() const override { return params_.actions; }
  std::optional<std::size_t> length() const override { return std::nullopt; }

  ContextVector context(std::size_t round) const override;
  double loss(std::size_t round, const ContextVector& context, Index action) const override;

  bool has_ground_truth() const override { return true; }
  double expected_loss(const ContextVector& context, Index action) const override;
  std::optional<Index> label(std::size_t) const override { return std::nullopt; }

  const SyntheticParams& params() const { return params_; }
  const Vector& wstar() const { return wstar_; }
  std::uint64_t seed() const { return seed_; }

 private:
  SyntheticParams params_;
  Vector wstar_;
  std::uint64_t seed_;
};

/// Draws w* from params.instance_seed. Per arm, an intercept m_a ~ U[0.1, 0.9]
/// and a slope of norm at most min(m_a, 1 - m_a), so f* stays in [0,1].
SyntheticEnv synth_generate(const SyntheticParams& params, std::uint64_t seed);

/// Exact expected loss; throws std::invalid_argument on environments without
/// ground truth.
double fstar_query(const Environment& env, const ContextVector& context, Index action);

struct DatasetOptions {
  /// Column holding the class label; negative counts from the end (-1 = last).
  int label_column = -1;
  bool has_header = false;
  /// Append a constant 1 feature (intercept for the linear oracle).
  bool add_bias = true;
};

struct DatasetRow {
  Vector features;
  Index label;
};

class DatasetEnv final : public Environment {
 public:
  /// `permutation_seed` 0 keeps file order.
  DatasetEnv(std::vector<DatasetRow> rows, Index label_count, std::vector<std::string> label_names,
             std::uint64_t permutation_seed);

  Index dim() const override { return dim_; }
  Index num_actions() const override { return label_count_; }
  std::optional<std::size_t> length() const override { return rows_.size(); }

  ContextVector context(std::size_t round) const override;
  double loss(std::size_t round, const ContextVector& context, Index action) const override;

  bool has_ground_truth() const override { return false; }
  double expected_loss(const ContextVector& context, Index action) const override;
  std::optional<Index> label(std::size_t round) const override;

  /// Row served at `round` (1-based), after permutation.
  std::size_t row_at(std::size_t round) const;
  const std::vector<std::size_t>& permutation() const { return permutation_; }
  const std::vector<DatasetRow>& rows() const { return rows_; }
  const std::vector<std::string>& label_names() const { return label_names_; }

 private:
  std::vector<DatasetRow> rows_;
  Index label_count_;
  Index dim_;
  std::vector<std::string> label_names_;
  std::vector<std::size_t> permutation_;
};

/// Parses a comma-separated table: no quoting, optional single header line,
/// decimal feature columns, one categorical label column. Labels map to
/// 0..n-1 in order of first appearance in the file. Parse failures throw
/// std::invalid_argument naming the 1-based line; unreadable files throw
/// IoError.
DatasetEnv dataset_load(const std::filesystem::path& path, const DatasetOptions& options,
                        std::uint64_t permutation_seed);

/// 0 iff `action` is the label of the row at `row_index` (file order).
double bandit_feedback(const DatasetEnv& env, std::size_t row_index, Index action);

}  // namespace opocmab
