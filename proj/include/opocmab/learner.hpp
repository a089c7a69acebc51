#pragma once

#include "opocmab/core.hpp"

#include <optional>
#include <string_view>

namespace opocmab {

/// What a learner plays at one round, plus optional diagnostics.
struct Decision {
  ActionDistribution policy;
  /// Exploration bonus per arm at this round (bonus-based learners).
  std::optional<Vector> bonuses;
  /// Optimistic loss estimate per arm that pairs with `policy` (opo only).
  std::optional<Vector> loss_estimates;
};

class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string_view name() const = 0;

  /// Policy for `context` at 1-based `round`. Rounds are visited in order.
  virtual Decision decide(const ContextVector& context, std::size_t round) = 0;

  /// Feedback for the action played at the round last passed to decide().
  /// `label` is the true class when the environment is a labelled dataset.
  virtual void learn(const ContextVector& context, Index action, double loss,
                     std::optional<Index> label) = 0;
};

}  // namespace opocmab
