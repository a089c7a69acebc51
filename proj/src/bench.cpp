#include "opocmab/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>

namespace opocmab {

namespace {

constexpr std::uint64_t kActionStream = 5;

using json = nlohmann::json;

struct AlgorithmName {
  Algorithm algorithm;
  std::string_view name;
};

constexpr AlgorithmName kAlgorithmNames[] = {
    {Algorithm::kOpo, "opo"},
    {Algorithm::kGreedy, "greedy"},
    {Algorithm::kEpsilonGreedy, "epsilon-greedy"},
    {Algorithm::kIgw, "igw"},
    {Algorithm::kOptimistic, "optimistic"},
    {Algorithm::kSupervised, "supervised"},
    {Algorithm::kUniform, "uniform"},
};

std::optional<std::size_t> finite_length(const Environment& env, std::size_t horizon) {
  if (auto n = env.length()) return std::min(*n, horizon);
  return horizon;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

std::string optional_field(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

json optional_json(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buffer, ptr);
}

std::string_view to_string(Algorithm algorithm) {
  for (const auto& entry : kAlgorithmNames)
    if (entry.algorithm == algorithm) return entry.name;
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& entry : kAlgorithmNames)
    if (entry.name == name) return entry.algorithm;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (log_every < 1) throw ConfigError("log-every must be >= 1");
  if (beta && gamma) throw ConfigError("--beta and --gamma are mutually exclusive");
  if (eta && !(*eta > 0.0)) throw ConfigError("eta must be > 0");
  if (beta && !(*beta > 0.0)) throw ConfigError("beta must be > 0");
  if (gamma && !(*gamma > 0.0)) throw ConfigError("gamma must be > 0");
  baseline.validate();
  oracle.validate();
  if (const auto* synth = std::get_if<SyntheticParams>(&environment)) {
    synth->validate();
    if (algorithm == Algorithm::kSupervised)
      throw ConfigError("supervised baseline requires a labelled dataset environment");
  }
  if (record && (algorithm != Algorithm::kOpo || !std::holds_alternative<SyntheticParams>(environment)))
    throw ConfigError("recording for decomposition requires --algo opo on a synthetic environment");
}

BonusSchedule resolve_bonus(const RunConfig& config) {
  BonusSchedule schedule;
  if (config.beta) {
    schedule.mode = BonusMode::kStatic;
    schedule.beta = *config.beta;
  } else {
    schedule.mode = BonusMode::kAdaptive;
    schedule.gamma = config.gamma.value_or(kDefaultGamma);
  }
  return schedule;
}

OpoConfig resolve_opo_config(const RunConfig& config, std::size_t horizon, Index actions) {
  OpoConfig opo = OpoConfig::defaults(horizon, actions);
  if (config.eta) opo.eta = *config.eta;
  opo.bonus = resolve_bonus(config);
  opo.validate();
  return opo;
}

std::unique_ptr<Learner> make_learner(const RunConfig& config, const Environment& env, std::size_t horizon) {
  const Index dim = env.dim();
  const Index actions = env.num_actions();
  BaselineConfig baseline = config.baseline;
  switch (config.algorithm) {
    case Algorithm::kOpo:
      return std::make_unique<OpoLearner>(dim, actions, resolve_opo_config(config, horizon, actions), config.oracle);
    case Algorithm::kGreedy:
      baseline.kind = BaselineKind::kGreedy;
      return std::make_unique<PredictionLearner>(dim, actions, baseline, config.oracle);
    case Algorithm::kEpsilonGreedy:
      baseline.kind = BaselineKind::kEpsilonGreedy;
      return std::make_unique<PredictionLearner>(dim, actions, baseline, config.oracle);
    case Algorithm::kIgw:
      baseline.kind = BaselineKind::kIgw;
      return std::make_unique<PredictionLearner>(dim, actions, baseline, config.oracle);
    case Algorithm::kOptimistic:
      return std::make_unique<OptimisticLearner>(dim, actions, resolve_bonus(config), config.oracle);
    case Algorithm::kSupervised:
      if (!env.label(1)) throw ConfigError("supervised baseline requires a labelled dataset environment");
      return std::make_unique<SupervisedLearner>(dim, actions, config.oracle);
    case Algorithm::kUniform:
      return std::make_unique<UniformLearner>(actions);
  }
  throw ConfigError("unknown algorithm");
}

double pv_loss(std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("PV loss of an empty sequence");
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

double pseudo_regret_step(const ActionDistribution& policy, const ContextVector& context,
                          const Environment& env) {
  if (!env.has_ground_truth()) throw std::invalid_argument("pseudo-regret requires synthetic environment");
  const Vector fstar = expected_losses(env, context);
  return std::max(0.0, policy.probs().dot(fstar) - fstar.minCoeff());
}

DecompositionReport decompose(std::span<const RecordedRound> rounds) {
  DecompositionReport report;
  for (const RecordedRound& r : rounds) {
    if (r.loss_estimate.size() == 0 || r.loss_estimate.size() != r.policy.size() ||
        r.expected_loss.size() != r.policy.size())
      throw std::invalid_argument("round " + std::to_string(r.round) + " is missing its loss-estimate recording");
    Index best = 0;
    r.expected_loss.minCoeff(&best);
    // minCoeff returns the first minimizer, matching the lowest-index rule.
    report.term_i += r.policy.dot(r.expected_loss - r.loss_estimate);
    report.term_ii += r.policy.dot(r.loss_estimate) - r.loss_estimate[best];
    report.term_iii += r.loss_estimate[best] - r.expected_loss[best];
    report.pseudo_regret += r.policy.dot(r.expected_loss) - r.expected_loss[best];
    ++report.rounds;
  }
  return report;
}

Session::Session(const Environment& env, std::unique_ptr<Learner> learner, std::uint64_t seed, bool record)
    : env_(env), learner_(std::move(learner)), seed_(seed), record_(record), action_rng_(seed, kActionStream, 0) {
  if (record_ && !env_.has_ground_truth()) throw ConfigError("recording requires a synthetic environment");
}

std::optional<RoundLog> Session::play_round() {
  if (const auto n = env_.length(); n && round_ >= *n) return std::nullopt;
  const std::size_t t = ++round_;
  const ContextVector context = env_.context(t);
  Decision decision = learner_->decide(context, t);
  const Index action = sample_action(decision.policy, action_rng_);
  const double loss = env_.loss(t, context, action);
  learner_->learn(context, action, loss, env_.label(t));

  loss_sum_ += loss;
  RoundLog log;
  log.run_seed = seed_;
  log.round = t;
  log.context_id = context.id().value_or(t);
  log.action = action;
  log.loss = loss;
  log.pv_loss = loss_sum_ / static_cast<double>(t);
  log.entropy = entropy(decision.policy);
  if (decision.bonuses) {
    log.bonus_mean = decision.bonuses->mean();
    log.bonus_max = decision.bonuses->maxCoeff();
  }
  if (env_.has_ground_truth()) {
    regret_sum_ += pseudo_regret_step(decision.policy, context, env_);
    log.pseudo_regret = regret_sum_;
    if (record_) {
      RecordedRound rec;
      rec.run_seed = seed_;
      rec.round = t;
      rec.policy = decision.policy.probs();
      rec.loss_estimate = decision.loss_estimates.value_or(Vector());
      rec.expected_loss = expected_losses(env_, context);
      trace_.push_back(std::move(rec));
    }
    if (learner_->name() == "opo") history_.push_back({context, decision.policy});
  }
  return log;
}

SeedResult run_seed(const RunConfig& config, const Environment& env, std::uint64_t seed) {
  SeedResult result;
  result.seed = seed;
  const std::size_t total = *finite_length(env, config.horizon);
  try {
    Session session(env, make_learner(config, env, total), seed, config.record);
    while (session.rounds_played() < total) {
      auto log = session.play_round();
      if (!log) break;
      result.rounds = log->round;
      result.final_pv_loss = log->pv_loss;
      result.final_pseudo_regret = log->pseudo_regret;
      if (log->round % config.log_every == 0 || log->round == total) result.logs.push_back(*log);
    }
    result.trace = session.trace();
    if (const auto* opo = dynamic_cast<const OpoLearner*>(&session.learner()); opo && env.has_ground_truth())
      result.oracle_squared_error =
          cumulative_squared_error(opo->store(), opo->store().size(), session.history(), env);
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

Statistic summarize(std::span<const double> values) {
  Statistic s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();

  std::optional<DatasetEnv> base_dataset;
  if (const auto* spec = std::get_if<DatasetSpec>(&config.environment))
    base_dataset.emplace(dataset_load(spec->path, spec->options, 0));

  auto run_one = [&](std::uint64_t seed) -> SeedResult {
    if (base_dataset) {
      DatasetEnv env(base_dataset->rows(), base_dataset->num_actions(), base_dataset->label_names(), seed);
      return run_seed(config, env, seed);
    }
    const SyntheticEnv env = synth_generate(std::get<SyntheticParams>(config.environment), seed);
    return run_seed(config, env, seed);
  };

  ExperimentResult result;
  result.algorithm = config.algorithm;
  result.horizon = config.horizon;
  result.runs.resize(config.seeds.size());
  const std::size_t workers = std::max(1u, config.threads);
  for (std::size_t begin = 0; begin < config.seeds.size(); begin += workers) {
    const std::size_t end = std::min(config.seeds.size(), begin + workers);
    if (workers == 1) {
      result.runs[begin] = run_one(config.seeds[begin]);
      continue;
    }
    std::vector<std::future<SeedResult>> futures;
    for (std::size_t i = begin; i < end; ++i)
      futures.push_back(std::async(std::launch::async, run_one, config.seeds[i]));
    for (std::size_t i = begin; i < end; ++i) result.runs[i] = futures[i - begin].get();
  }

  std::vector<double> pv;
  std::vector<double> regret;
  std::optional<std::string> first_error;
  for (const SeedResult& run : result.runs) {
    if (run.error) {
      if (!first_error) first_error = "seed " + std::to_string(run.seed) + ": " + *run.error;
      continue;
    }
    pv.push_back(run.final_pv_loss);
    if (run.final_pseudo_regret) regret.push_back(*run.final_pseudo_regret);
  }
  result.pv_loss = summarize(pv);
  if (!regret.empty()) result.pseudo_regret = summarize(regret);
  if (first_error)
    throw ExperimentError(*first_error, std::make_shared<const ExperimentResult>(std::move(result)));
  return result;
}

std::filesystem::path summary_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out += ".summary.json";
  return out;
}

std::string summary_json(const ExperimentResult& result) {
  json j;
  j["algorithm"] = std::string(to_string(result.algorithm));
  j["horizon"] = result.horizon;
  j["final_pv_loss"] = {{"mean", result.pv_loss.mean}, {"std", result.pv_loss.std}};
  j["final_pseudo_regret"] = result.pseudo_regret
                                 ? json{{"mean", result.pseudo_regret->mean}, {"std", result.pseudo_regret->std}}
                                 : json(nullptr);
  json seeds = json::array();
  for (const SeedResult& run : result.runs) {
    json s;
    s["seed"] = run.seed;
    s["rounds"] = run.rounds;
    s["final_pv_loss"] = run.final_pv_loss;
    s["final_pseudo_regret"] = optional_json(run.final_pseudo_regret);
    s["oracle_squared_error"] = optional_json(run.oracle_squared_error);
    s["error"] = run.error ? json(*run.error) : json(nullptr);
    seeds.push_back(std::move(s));
  }
  j["seeds"] = std::move(seeds);
  return j.dump(2) + "\n";
}

void emit(const ExperimentResult& result, OutputFormat format, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  if (format == OutputFormat::kCsv) {
    out << "run_seed,round,action,loss,pv_loss,pseudo_regret,bonus_mean,bonus_max,entropy\n";
    for (const SeedResult& run : result.runs)
      for (const RoundLog& r : run.logs)
        out << r.run_seed << ',' << r.round << ',' << r.action << ',' << format_double(r.loss) << ','
            << format_double(r.pv_loss) << ',' << optional_field(r.pseudo_regret) << ','
            << optional_field(r.bonus_mean) << ',' << optional_field(r.bonus_max) << ','
            << format_double(r.entropy) << '\n';
  } else {
    for (const SeedResult& run : result.runs)
      for (const RoundLog& r : run.logs) {
        json row = json::object();
        row["run_seed"] = r.run_seed;
        row["round"] = r.round;
        row["action"] = r.action;
        row["loss"] = r.loss;
        row["pv_loss"] = r.pv_loss;
        row["pseudo_regret"] = optional_json(r.pseudo_regret);
        row["bonus_mean"] = optional_json(r.bonus_mean);
        row["bonus_max"] = optional_json(r.bonus_max);
        row["entropy"] = r.entropy;
        out << row.dump() << '\n';
      }
  }
  close_output(out, path);

  const auto summary = summary_path(path);
  std::ofstream sout = open_output(summary);
  sout << summary_json(result);
  close_output(sout, summary);
}

void write_trace(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (const SeedResult& run : result.runs)
    for (const RecordedRound& r : run.trace) {
      json row = json::object();
      row["run_seed"] = r.run_seed;
      row["round"] = r.round;
      row["policy"] = vector_json(r.policy);
      row["loss_estimate"] = vector_json(r.loss_estimate);
      row["expected_loss"] = vector_json(r.expected_loss);
      out << row.dump() << '\n';
    }
  close_output(out, path);
}

std::vector<RecordedRound> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace '" + path.string() + "'");
  std::vector<RecordedRound> rounds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json row = json::parse(line);
      RecordedRound r;
      r.run_seed = row.at("run_seed").get<std::uint64_t>();
      r.round = row.at("round").get<std::size_t>();
      r.policy = vector_from_json(row.at("policy"));
      r.loss_estimate = vector_from_json(row.at("loss_estimate"));
      r.expected_loss = vector_from_json(row.at("expected_loss"));
      rounds.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw std::invalid_argument("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("error reading trace '" + path.string() + "'");
  return rounds;
}

}  // namespace opocmab
