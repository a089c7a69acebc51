#include "opocmab/core.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace opocmab {

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::array<std::uint32_t, 6> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double Rng::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // Box-Muller; one normal per call keeps the stream position simple.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ContextVector::ContextVector(Vector features, std::optional<std::size_t> id)
    : features_(std::move(features)), id_(id) {
  if (!features_.allFinite()) throw std::invalid_argument("context features must be finite");
}

ActionSet::ActionSet(Index n) : count(n) {
  if (n < 1) throw std::invalid_argument("action set must contain at least one arm");
}

ActionDistribution ActionDistribution::from_probabilities(Vector probs) {
  if (probs.size() == 0) throw std::invalid_argument("empty action distribution");
  if (!probs.allFinite() || (probs.array() < 0.0).any() || (probs.array() > 1.0).any())
    throw std::invalid_argument("action probabilities must lie in [0,1]");
  if (std::abs(probs.sum() - 1.0) > kProbabilityTolerance)
    throw std::invalid_argument("action probabilities must sum to 1");
  return ActionDistribution(std::move(probs));
}

FeatureMap::FeatureMap(Index dim, Index actions) : dim_(dim), actions_(actions) {
  if (dim < 1) throw std::invalid_argument("feature dimension must be positive");
  ActionSet{actions};
}

Vector FeatureMap::operator()(const ContextVector& context, Index action) const {
  if (context.dim() != dim_) throw std::invalid_argument("context dimension mismatch");
  if (action < 0 || action >= actions_) throw std::out_of_range("action index out of range");
  Vector phi = Vector::Zero(output_dim());
  phi.segment(action * dim_, dim_) = context.features();
  return phi;
}

LossSample::LossSample(ContextVector ctx, Index a, double l)
    : context(std::move(ctx)), action(a), loss(l) {
  if (!(loss >= 0.0 && loss <= 1.0)) throw std::invalid_argument("loss must lie in [0,1]");
  if (action < 0) throw std::out_of_range("action index out of range");
}

ActionDistribution normalize(const Vector& raw) {
  if (raw.size() == 0 || !raw.allFinite() || (raw.array() < 0.0).any())
    throw std::invalid_argument("degenerate weight vector");
  const double total = raw.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw std::invalid_argument("degenerate weight vector");
  Vector probs = raw / total;
  // Clamp rounding overshoot so every entry stays in [0,1].
  probs = probs.cwiseMin(1.0);
  return ActionDistribution(std::move(probs));
}

Index sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double cdf = 0.0;
  Index last_positive = 0;
  for (Index a = 0; a < dist.size(); ++a) {
    if (dist[a] <= 0.0) continue;
    cdf += dist[a];
    last_positive = a;
    if (u < cdf) return a;
  }
  // u landed in the rounding gap above the accumulated sum.
  return last_positive;
}

ActionDistribution uniform_policy(ActionSet actions) {
  return normalize(Vector::Ones(actions.count));
}

double entropy(const ActionDistribution& dist) {
  double h = 0.0;
  for (Index a = 0; a < dist.size(); ++a)
    if (dist[a] > 0.0) h -= dist[a] * std::log(dist[a]);
  return h;
}

Vector expected_losses(const Environment& env, const ContextVector& context) {
  Vector out(env.num_actions());
  for (Index a = 0; a < out.size(); ++a) out[a] = env.expected_loss(context, a);
  return out;
}

}  // namespace opocmab
