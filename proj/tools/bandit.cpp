// bandit: run contextual-bandit experiments and decompose recorded runs.
//
//   bandit run --algo opo --env synthetic --d 5 --arms 4 --horizon 2000 --seeds 1-10 --out runs/opo.csv
//   bandit run --algo igw --env dataset --data tests/fixtures/blobs4.csv --has-header --seeds 1-10 --out igw.csv
//   bandit decompose --in runs/opo.trace.jsonl --out runs/opo.decomposition.json
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error.

#include "opocmab/bench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>

namespace {

using namespace opocmab;
using json = nlohmann::json;

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("invalid seed '" + std::string(text) + "'");
  return value;
}

/// "3", "1,2,7" or ranges "1-10".
std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = text.substr(start, comma - start);
    if (const auto dash = item.find('-'); dash != std::string_view::npos) {
      const auto lo = parse_u64(item.substr(0, dash));
      const auto hi = parse_u64(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("empty seed range '" + std::string(item) + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_u64(item));
    }
    start = comma + 1;
  }
  return seeds;
}

/// Turns a JSON or TOML document into "--key value" tokens.
std::vector<std::string> config_tokens(const std::string& path) {
  std::vector<std::string> tokens;
  auto add = [&](const std::string& key, const std::vector<std::string>& values, bool is_flag) {
    if (is_flag) {
      if (values.empty() || values.front() == "true" || values.front() == "1") tokens.push_back("--" + key);
      return;
    }
    std::string joined;
    for (const auto& v : values) joined += (joined.empty() ? "" : ",") + v;
    tokens.push_back("--" + key);
    tokens.push_back(joined);
  };

  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (value.is_boolean()) {
        add(key, {value.get<bool>() ? "true" : "false"}, true);
      } else if (value.is_array()) {
        std::vector<std::string> items;
        for (const auto& v : value) items.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        add(key, items, false);
      } else {
        add(key, {value.is_string() ? value.get<std::string>() : value.dump()}, false);
      }
    }
    return tokens;
  }
  try {
    for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_config(in)) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      const bool is_flag = item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false");
      add(item.fullname(), item.inputs, is_flag);
    }
  } catch (const CLI::Error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return tokens;
}

struct RunOptions {
  std::string algo = "opo";
  std::string env = "synthetic";
  std::string data;
  int label_col = -1;
  bool has_header = false;
  bool no_bias = false;
  Index d = 5;
  Index arms = 4;
  std::string noise = "bernoulli";
  double sigma = 0.1;
  std::string contexts = "sphere";
  std::uint64_t instance_seed = 1;
  std::size_t horizon = 1000;
  std::string seeds = "1";
  std::optional<double> eta, beta, gamma;
  double epsilon = 0.05, gamma0 = 100.0, rho = 0.5;
  std::string oracle = "ridge";
  double lambda = 1e-6, lr = 0.1, lr_decay = 0.5;
  std::size_t log_every = 1;
  std::string format;
  std::string out;
  std::string record;
  unsigned threads = 1;
  std::string config;
};

RunConfig to_run_config(const RunOptions& o) {
  RunConfig config;
  config.algorithm = parse_algorithm(o.algo);
  if (o.env == "synthetic") {
    SyntheticParams p;
    p.dim = o.d;
    p.actions = o.arms;
    p.noise = o.noise == "tgauss" ? NoiseKind::kTruncatedGaussian : NoiseKind::kBernoulli;
    p.sigma = o.sigma;
    p.contexts = o.contexts == "ball" ? ContextDist::kBall : ContextDist::kSphere;
    p.instance_seed = o.instance_seed;
    config.environment = p;
  } else {
    if (o.data.empty()) throw ConfigError("--env dataset requires --data <path>");
    DatasetSpec spec;
    spec.path = o.data;
    spec.options.label_column = o.label_col;
    spec.options.has_header = o.has_header;
    spec.options.add_bias = !o.no_bias;
    config.environment = spec;
  }
  config.horizon = o.horizon;
  config.seeds = parse_seeds(o.seeds);
  config.eta = o.eta;
  config.beta = o.beta;
  config.gamma = o.gamma;
  config.baseline.epsilon = o.epsilon;
  config.baseline.gamma0 = o.gamma0;
  config.baseline.rho = o.rho;
  config.baseline.bonus = resolve_bonus(config);
  config.oracle.kind = o.oracle == "sgd-sq"    ? OracleKind::kSgdSquared
                       : o.oracle == "sgd-log" ? OracleKind::kSgdLogistic
                                               : OracleKind::kRidge;
  config.oracle.lambda = o.lambda;
  config.oracle.learning_rate = o.lr;
  config.oracle.lr_decay = o.lr_decay;
  config.log_every = o.log_every;
  config.record = !o.record.empty();
  config.threads = o.threads;
  config.validate();
  return config;
}

OutputFormat output_format(const RunOptions& o) {
  if (o.format == "jsonl") return OutputFormat::kJsonl;
  if (o.format == "csv") return OutputFormat::kCsv;
  const bool jsonl = o.out.size() >= 6 && o.out.substr(o.out.size() - 6) == ".jsonl";
  return jsonl ? OutputFormat::kJsonl : OutputFormat::kCsv;
}

int command_run(const RunOptions& o) {
  const RunConfig config = to_run_config(o);
  const OutputFormat format = output_format(o);
  try {
    const ExperimentResult result = run_experiment(config);
    emit(result, format, o.out);
    if (!o.record.empty()) write_trace(result, o.record);
    std::cout << "algorithm " << to_string(result.algorithm) << ", " << result.runs.size()
              << " seed(s): final PV loss " << format_double(result.pv_loss.mean) << " +/- "
              << format_double(result.pv_loss.std);
    if (result.pseudo_regret)
      std::cout << ", pseudo-regret " << format_double(result.pseudo_regret->mean) << " +/- "
                << format_double(result.pseudo_regret->std);
    std::cout << '\n';
  } catch (const ExperimentError& e) {
    emit(e.partial(), format, o.out);
    throw;
  }
  return 0;
}

int command_decompose(const std::string& in, const std::string& out) {
  const std::vector<RecordedRound> rounds = read_trace(in);
  std::map<std::uint64_t, std::vector<RecordedRound>> by_seed;
  for (const RecordedRound& r : rounds) by_seed[r.run_seed].push_back(r);

  json seeds = json::array();
  for (const auto& [seed, seed_rounds] : by_seed) {
    const DecompositionReport report = decompose(seed_rounds);
    seeds.push_back({{"run_seed", seed},
                     {"rounds", report.rounds},
                     {"term_i", report.term_i},
                     {"term_ii", report.term_ii},
                     {"term_iii", report.term_iii},
                     {"total", report.total()},
                     {"pseudo_regret", report.pseudo_regret},
                     {"residual", report.total() - report.pseudo_regret}});
  }
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + out + "' for writing");
  file << json{{"seeds", seeds}}.dump(2) << '\n';
  if (!file) throw IoError("error writing '" + out + "'");
  return 0;
}

std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty() || args.empty()) return args;
  // File values go right after the subcommand name so explicit flags win.
  std::vector<std::string> tokens = config_tokens(config_path);
  args.insert(args.begin() + 1, tokens.begin(), tokens.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual bandit experiments"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunOptions o;
  auto* run = app.add_subcommand("run", "Run an algorithm over one or more seeds");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  run->add_option("--algo", o.algo, "opo|greedy|epsilon-greedy|igw|optimistic|supervised|uniform")
      ->check(CLI::IsMember({"opo", "greedy", "epsilon-greedy", "igw", "optimistic", "supervised", "uniform"}));
  run->add_option("--env", o.env)->check(CLI::IsMember({"synthetic", "dataset"}));
  run->add_option("--data", o.data, "CSV file (dataset env)");
  run->add_option("--label-col", o.label_col, "label column index, negative counts from the end");
  run->add_flag("--has-header", o.has_header);
  run->add_flag("--no-bias", o.no_bias, "do not append a constant feature to dataset rows");
  run->add_option("--d", o.d, "context dimension (synthetic)")->check(CLI::PositiveNumber);
  run->add_option("--arms", o.arms, "number of arms (synthetic)")->check(CLI::PositiveNumber);
  run->add_option("--noise", o.noise)->check(CLI::IsMember({"bernoulli", "tgauss"}));
  run->add_option("--sigma", o.sigma, "tgauss standard deviation");
  run->add_option("--contexts", o.contexts)->check(CLI::IsMember({"sphere", "ball"}));
  run->add_option("--instance-seed", o.instance_seed, "seed of the synthetic ground truth");
  run->add_option("--horizon", o.horizon)->check(CLI::PositiveNumber);
  run->add_option("--seeds", o.seeds, "e.g. 1,2,3 or 1-10");
  run->add_option("--eta", o.eta);
  run->add_option("--beta", o.beta, "static bonus scale");
  run->add_option("--gamma", o.gamma, "adaptive bonus scale");
  run->add_option("--epsilon", o.epsilon);
  run->add_option("--gamma0", o.gamma0);
  run->add_option("--rho", o.rho);
  run->add_option("--oracle", o.oracle)->check(CLI::IsMember({"ridge", "sgd-sq", "sgd-log"}));
  run->add_option("--lambda", o.lambda);
  run->add_option("--lr", o.lr, "sgd learning rate");
  run->add_option("--lr-decay", o.lr_decay, "sgd step decay exponent");
  run->add_option("--log-every", o.log_every)->check(CLI::PositiveNumber);
  run->add_option("--format", o.format)->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_option("--out", o.out)->required();
  run->add_option("--record", o.record, "write a per-round trace for `bandit decompose`");
  run->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
  run->add_option("--config", o.config, "JSON (.json) or TOML file of flag values");

  std::string in_path, out_path;
  auto* dec = app.add_subcommand("decompose", "Split a recorded opo run's pseudo-regret into three terms");
  dec->add_option("--in", in_path)->required();
  dec->add_option("--out", out_path)->required();

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*run) return command_run(o);
    return command_decompose(in_path, out_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
