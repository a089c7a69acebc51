#include "opocmab/env.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace opocmab {

namespace {

// Stream ids for Rng derivation.
constexpr std::uint64_t kContextStream = 1;
constexpr std::uint64_t kLossStream = 2;
constexpr std::uint64_t kInstanceStream = 3;
constexpr std::uint64_t kPermutationStream = 4;

Vector unit_direction(Rng& rng, Index n) {
  Vector u(n);
  double norm = 0.0;
  do {
    for (Index i = 0; i < n; ++i) u[i] = rng.normal();
    norm = u.norm();
  } while (norm == 0.0);
  return u / norm;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void SyntheticParams::validate() const {
  if (dim < 1) throw ConfigError("synthetic dimension must be >= 1");
  if (actions < 1) throw ConfigError("synthetic arm count must be >= 1");
  if (noise == NoiseKind::kTruncatedGaussian && !(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
}

SyntheticEnv::SyntheticEnv(SyntheticParams params, Vector wstar, std::uint64_t seed)
    : params_(params), wstar_(std::move(wstar)), seed_(seed) {
  params_.validate();
  if (wstar_.size() != params_.dim * params_.actions)
    throw std::invalid_argument("ground-truth weight dimension mismatch");
}

ContextVector SyntheticEnv::context(std::size_t round) const {
  Rng rng(seed_, kContextStream, round);
  Vector c(params_.dim);
  c[0] = 1.0;
  const Index free_dims = params_.dim - 1;
  if (free_dims > 0) {
    Vector u = unit_direction(rng, free_dims);
    if (params_.contexts == ContextDist::kBall)
      u *= std::pow(rng.uniform(), 1.0 / static_cast<double>(free_dims));
    c.tail(free_dims) = u;
  }
  return ContextVector(std::move(c), round);
}

double SyntheticEnv::expected_loss(const ContextVector& context, Index action) const {
  if (context.dim() != params_.dim) throw std::invalid_argument("context dimension mismatch");
  if (action < 0 || action >= params_.actions) throw std::out_of_range("action index out of range");
  const double z = wstar_.segment(action * params_.dim, params_.dim).dot(context.features());
  return link_value(Link::kIdentity, z);
}

double SyntheticEnv::loss(std::size_t round, const ContextVector& context, Index action) const {
  const double mean = expected_loss(context, action);
  // Keyed by (round, action) so the draw does not depend on the action
  // sampling stream.
  Rng rng(seed_, kLossStream, (static_cast<std::uint64_t>(round) << 16) ^ static_cast<std::uint64_t>(action));
  if (params_.noise == NoiseKind::kBernoulli) return rng.uniform() < mean ? 1.0 : 0.0;
  return std::clamp(mean + params_.sigma * rng.normal(), 0.0, 1.0);
}

SyntheticEnv synth_generate(const SyntheticParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(params.instance_seed, kInstanceStream, 0);
  Vector wstar(params.dim * params.actions);
  for (Index a = 0; a < params.actions; ++a) {
    auto block = wstar.segment(a * params.dim, params.dim);
    const double intercept = 0.1 + 0.8 * rng.uniform();
    block[0] = intercept;
    if (params.dim > 1) {
      // |<v, u>| <= |v| for |u| <= 1, so f* = intercept + <v, u> stays in [0,1].
      const double radius = std::min(intercept, 1.0 - intercept) * (0.5 + 0.5 * rng.uniform());
      block.tail(params.dim - 1) = radius * unit_direction(rng, params.dim - 1);
    }
  }
  return SyntheticEnv(params, std::move(wstar), seed);
}

double fstar_query(const Environment& env, const ContextVector& context, Index action) {
  if (!env.has_ground_truth()) throw std::invalid_argument("ground truth is only available for synthetic environments");
  return env.expected_loss(context, action);
}

DatasetEnv::DatasetEnv(std::vector<DatasetRow> rows, Index label_count, std::vector<std::string> label_names,
                       std::uint64_t permutation_seed)
    : rows_(std::move(rows)), label_count_(label_count), label_names_(std::move(label_names)) {
  if (rows_.empty()) throw std::invalid_argument("dataset has no rows");
  ActionSet{label_count_};
  dim_ = rows_.front().features.size();
  for (const DatasetRow& row : rows_) {
    if (row.features.size() != dim_) throw std::invalid_argument("dataset rows differ in width");
    if (!row.features.allFinite()) throw std::invalid_argument("dataset features must be finite");
    if (row.label < 0 || row.label >= label_count_) throw std::invalid_argument("dataset label out of range");
  }
  permutation_.resize(rows_.size());
  std::iota(permutation_.begin(), permutation_.end(), std::size_t{0});
  if (permutation_seed != 0) {
    Rng rng(permutation_seed, kPermutationStream, 0);
    // Fisher-Yates with our own uniform draws (std::shuffle is not portable).
    for (std::size_t i = permutation_.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.next() % i);
      std::swap(permutation_[i - 1], permutation_[j]);
    }
  }
}

std::size_t DatasetEnv::row_at(std::size_t round) const {
  if (round < 1 || round > rows_.size()) throw std::out_of_range("dataset exhausted");
  return permutation_[round - 1];
}

ContextVector DatasetEnv::context(std::size_t round) const {
  return ContextVector(rows_[row_at(round)].features, row_at(round));
}

double DatasetEnv::loss(std::size_t round, const ContextVector&, Index action) const {
  return bandit_feedback(*this, row_at(round), action);
}

double DatasetEnv::expected_loss(const ContextVector&, Index) const {
  throw std::invalid_argument("ground truth is only available for synthetic environments");
}

std::optional<Index> DatasetEnv::label(std::size_t round) const { return rows_[row_at(round)].label; }

double bandit_feedback(const DatasetEnv& env, std::size_t row_index, Index action) {
  if (row_index >= env.rows().size()) throw std::out_of_range("row index out of range");
  if (action < 0 || action >= env.num_actions()) throw std::out_of_range("action index out of range");
  return env.rows()[row_index].label == action ? 0.0 : 1.0;
}

DatasetEnv dataset_load(const std::filesystem::path& path, const DatasetOptions& options,
                        std::uint64_t permutation_seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");

  std::vector<std::vector<double>> features;
  std::vector<std::string> raw_labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::size_t label_col = 0;
  bool header_pending = options.has_header;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split(line);
    if (width == 0) {
      width = fields.size();
      if (width < 2) throw std::invalid_argument("line " + std::to_string(line_no) + ": need a label and at least one feature");
      const long idx = options.label_column < 0 ? static_cast<long>(width) + options.label_column
                                                : options.label_column;
      if (idx < 0 || idx >= static_cast<long>(width))
        throw ConfigError("label column " + std::to_string(options.label_column) + " out of range");
      label_col = static_cast<std::size_t>(idx);
    }
    if (fields.size() != width)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                  " fields, found " + std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t j = 0; j < width; ++j) {
      const std::string_view field = trim(fields[j]);
      if (j == label_col) {
        if (field.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty label");
        raw_labels.emplace_back(field);
        continue;
      }
      double value = 0.0;
      const char* first = field.data();
      const char* last = field.data() + field.size();
      if (!field.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
        throw std::invalid_argument("line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) +
                                    "' as a number");
      row.push_back(value);
    }
    features.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("error reading dataset '" + path.string() + "'");
  if (features.empty()) throw std::invalid_argument("dataset '" + path.string() + "' has no data rows");

  std::unordered_map<std::string, Index> label_ids;
  std::vector<std::string> names;
  std::vector<DatasetRow> rows;
  rows.reserve(features.size());
  const Index extra = options.add_bias ? 1 : 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto [it, inserted] = label_ids.emplace(raw_labels[i], static_cast<Index>(names.size()));
    if (inserted) names.push_back(raw_labels[i]);
    Vector x(static_cast<Index>(features[i].size()) + extra);
    for (std::size_t j = 0; j < features[i].size(); ++j) x[static_cast<Index>(j)] = features[i][j];
    if (options.add_bias) x[x.size() - 1] = 1.0;
    rows.push_back({std::move(x), it->second});
  }
  const auto label_count = static_cast<Index>(names.size());
  return DatasetEnv(std::move(rows), label_count, std::move(names), permutation_seed);
}

}  // namespace opocmab
