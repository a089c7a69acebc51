#pragma once

// Experiment runner, metrics and output files.

#include "opocmab/baselines.hpp"
#include "opocmab/core.hpp"
#include "opocmab/env.hpp"
#include "opocmab/learner.hpp"
#include "opocmab/opo.hpp"
#include "opocmab/oracle.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace opocmab {

enum class Algorithm { kOpo, kGreedy, kEpsilonGreedy, kIgw, kOptimistic, kSupervised, kUniform };

std::string_view to_string(Algorithm algorithm);
/// Throws ConfigError for unknown names.
Algorithm parse_algorithm(std::string_view name);

struct DatasetSpec {
  std::filesystem::path path;
  DatasetOptions options;
};

/// Default gamma of the adaptive bonus beta_k = gamma * sqrt(k / |A|).
inline constexpr double kDefaultGamma = 0.1;

struct RunConfig {
  Algorithm algorithm = Algorithm::kOpo;
  std::variant<SyntheticParams, DatasetSpec> environment = SyntheticParams{};
  std::size_t horizon = 1000;
  std::vector<std::uint64_t> seeds{1};

  // opo; unset values fall back to OpoConfig::defaults. Setting beta selects
  // the static bonus, gamma the adaptive one; at most one may be set.
  std::optional<double> eta;
  std::optional<double> beta;
  std::optional<double> gamma;

  // epsilon-greedy / igw; the optimistic baseline shares the opo bonus flags.
  BaselineConfig baseline;
  OracleConfig oracle;

  std::size_t log_every = 1;
  /// Keep per-round policies and loss estimates for decompose().
  bool record = false;
  unsigned threads = 1;

  void validate() const;
};

OpoConfig resolve_opo_config(const RunConfig& config, std::size_t horizon, Index actions);
BonusSchedule resolve_bonus(const RunConfig& config);

std::unique_ptr<Learner> make_learner(const RunConfig& config, const Environment& env, std::size_t horizon);

struct RoundLog {
  std::uint64_t run_seed = 0;
  std::size_t round = 0;
  std::size_t context_id = 0;
  Index action = 0;
  double loss = 0.0;
  double pv_loss = 0.0;
  std::optional<double> pseudo_regret;  // running sum, synthetic only
  std::optional<double> bonus_mean;
  std::optional<double> bonus_max;
  double entropy = 0.0;
};

struct RecordedRound {
  std::uint64_t run_seed = 0;
  std::size_t round = 0;
  Vector policy;
  /// Optimistic loss estimate paired with `policy`.
  Vector loss_estimate;
  /// f*(c_t, .)
  Vector expected_loss;
};

struct DecompositionReport {
  double term_i = 0.0;    // sum <pi_t, f* - l_t>
  double term_ii = 0.0;   // sum <pi_t - pi*, l_t>
  double term_iii = 0.0;  // sum <pi*, l_t - f*>
  double pseudo_regret = 0.0;
  std::size_t rounds = 0;

  double total() const { return term_i + term_ii + term_iii; }
};

/// Mean of the realized losses; throws on an empty sequence.
double pv_loss(std::span<const double> losses);

/// <pi, f*(c, .)> - min_a f*(c, a). Throws without ground truth.
double pseudo_regret_step(const ActionDistribution& policy, const ContextVector& context,
                          const Environment& env);

/// Three-way split of the pseudo-regret at the realized contexts. pi* is the
/// point mass on the lowest-index argmin of f*. Throws
/// std::invalid_argument when a round lacks its loss estimate.
DecompositionReport decompose(std::span<const RecordedRound> rounds);

/// One seeded run, one round at a time.
class Session {
 public:
  Session(const Environment& env, std::unique_ptr<Learner> learner, std::uint64_t seed, bool record = false);

  /// Plays the next round; nullopt once a finite environment is exhausted.
  std::optional<RoundLog> play_round();

  std::size_t rounds_played() const { return round_; }
  const Learner& learner() const { return *learner_; }
  const std::vector<RecordedRound>& trace() const { return trace_; }
  const std::vector<HistoryEntry>& history() const { return history_; }

 private:
  const Environment& env_;
  std::unique_ptr<Learner> learner_;
  std::uint64_t seed_;
  bool record_;
  Rng action_rng_;
  std::size_t round_ = 0;
  double loss_sum_ = 0.0;
  double regret_sum_ = 0.0;
  std::vector<RecordedRound> trace_;
  std::vector<HistoryEntry> history_;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  std::vector<RoundLog> logs;  // strided
  std::vector<RecordedRound> trace;
  double final_pv_loss = 0.0;
  std::optional<double> final_pseudo_regret;
  /// Cumulative squared error of the final opo snapshot over the played
  /// history (opo on synthetic environments).
  std::optional<double> oracle_squared_error;
  std::optional<std::string> error;
};

struct Statistic {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 for a single seed
};

Statistic summarize(std::span<const double> values);

struct ExperimentResult {
  Algorithm algorithm = Algorithm::kOpo;
  std::size_t horizon = 0;
  std::vector<SeedResult> runs;  // in config seed order
  Statistic pv_loss;
  std::optional<Statistic> pseudo_regret;
};

/// Thrown by run_experiment when a seed fails; carries everything completed.
class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(const std::string& what, std::shared_ptr<const ExperimentResult> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const ExperimentResult& partial() const { return *partial_; }

 private:
  std::shared_ptr<const ExperimentResult> partial_;
};

SeedResult run_seed(const RunConfig& config, const Environment& env, std::uint64_t seed);
ExperimentResult run_experiment(const RunConfig& config);

enum class OutputFormat { kCsv, kJsonl };

/// Writes the strided round logs to `path` and the summary to
/// `<path>.summary.json`. Throws IoError on failure.
void emit(const ExperimentResult& result, OutputFormat format, const std::filesystem::path& path);

std::filesystem::path summary_path(const std::filesystem::path& path);
std::string summary_json(const ExperimentResult& result);

/// Per-round trace as JSON lines (one object per round) for `bandit decompose`.
void write_trace(const ExperimentResult& result, const std::filesystem::path& path);
std::vector<RecordedRound> read_trace(const std::filesystem::path& path);

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);

}  // namespace opocmab
