#include "opocmab/baselines.hpp"
#include "support/reference.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace opocmab;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

bool same(const ActionDistribution& d, const Vector& expected, double tol = 1e-12) {
  return (d.probs() - expected).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

TEST_CASE("greedy") {
  CHECK(same(greedy_policy(vec({0.2, 0.8})), vec({1, 0})));
  CHECK(same(greedy_policy(vec({0.5, 0.5})), vec({1, 0})));
  CHECK(same(greedy_policy(vec({0.9, 0.1, 0.4})), vec({0, 1, 0})));
  CHECK(argmin_lowest(vec({0.3, 0.1, 0.1})) == 1);
}

TEST_CASE("inverse gap weighting") {
  CHECK(same(igw_policy(vec({0.4, 0.4, 0.4}), 7.0), Vector::Constant(3, 1.0 / 3.0)));
  CHECK(same(igw_policy(vec({0.0, 1.0}), 2.0), vec({0.75, 0.25})));

  const ActionDistribution limit = igw_policy(vec({0.3, 0.5, 0.9}), 1e6);
  CHECK(limit[0] >= 1.0 - 2.0 / (1e6 * 0.2));
  CHECK(limit[1] <= 1.0 / (1e6 * 0.2));
  CHECK(limit[2] <= 1.0 / (1e6 * 0.6));

  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next() % 6);
    Vector preds(n);
    for (Index a = 0; a < n; ++a) preds[a] = rng.uniform();
    const double gamma = std::pow(10.0, 4.0 * rng.uniform() - 1.0);
    const ActionDistribution p = igw_policy(preds, gamma);
    const Index best = argmin_lowest(preds);
    CHECK(p.probs().sum() == doctest::Approx(1.0));
    CHECK(p[best] == doctest::Approx(p.probs().maxCoeff()));
    for (Index a = 0; a < n; ++a)
      if (a != best) CHECK(p[a] == doctest::Approx(1.0 / (double(n) + gamma * (preds[a] - preds[best]))));
    // shifting every prediction by the same amount changes nothing
    const Vector shifted = (preds.array() + 0.37).matrix();
    CHECK(same(igw_policy(shifted, gamma), p.probs(), 1e-12));
  }
}

TEST_CASE("optimistic policy") {
  const Vector preds = vec({0.6, 0.2, 0.4});
  CHECK(same(optimistic_policy(preds, Vector::Zero(3)), greedy_policy(preds).probs()));
  CHECK(same(optimistic_policy(vec({0.5, 0.5}), vec({0.4, 0.1})), vec({1, 0})));
  CHECK(same(optimistic_policy(preds, Vector::Constant(3, 0.9)), vec({1, 0, 0})));
}

TEST_CASE("epsilon greedy") {
  const Vector preds = vec({0.4, 0.2, 0.7});
  CHECK(same(epsilon_greedy_policy(preds, 0.0), greedy_policy(preds).probs()));
  CHECK(same(epsilon_greedy_policy(preds, 1.0), Vector::Constant(3, 1.0 / 3.0)));
  CHECK(same(epsilon_greedy_policy(vec({0.1, 0.9}), 0.2), vec({0.9, 0.1})));
  CHECK_THROWS(epsilon_greedy_policy(preds, 1.5));
}

TEST_CASE("baseline config validation") {
  BaselineConfig config;
  config.kind = BaselineKind::kEpsilonGreedy;
  config.epsilon = -0.1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.epsilon = 0.1;
  CHECK_NOTHROW(config.validate());
  config.kind = BaselineKind::kIgw;
  config.gamma0 = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.gamma0 = 4.0;
  config.rho = 0.5;
  CHECK(config.igw_gamma(9) == doctest::Approx(12.0));
}

TEST_CASE("prediction learners start from the lowest index") {
  for (BaselineKind kind : {BaselineKind::kGreedy, BaselineKind::kEpsilonGreedy, BaselineKind::kIgw}) {
    BaselineConfig config;
    config.kind = kind;
    PredictionLearner learner(2, 3, config);
    const Decision d = learner.decide(ContextVector(vec({1.0, 0.5})), 1);
    CHECK(d.policy[0] == doctest::Approx(d.policy.probs().maxCoeff()));
    learner.learn(ContextVector(vec({1.0, 0.5})), 0, 1.0, std::nullopt);
    CHECK(learner.regressor().fitted_count() == 1);
  }
}

TEST_CASE("optimistic learner explores untried arms") {
  BonusSchedule schedule{BonusMode::kStatic, 1.0};
  OptimisticLearner learner(1, 3, schedule);
  const ContextVector c(vec({1.0}));
  std::vector<Index> played;
  // every arm costs 0.9: once an arm has been pulled its optimistic value
  // rises above the untried ones, so the first three pulls cover all arms
  for (std::size_t t = 1; t <= 3; ++t) {
    const Decision d = learner.decide(c, t);
    const Index a = argmin_lowest(-d.policy.probs());
    CHECK(d.policy[a] == 1.0);
    played.push_back(a);
    learner.learn(c, a, 0.9, std::nullopt);
  }
  std::sort(played.begin(), played.end());
  CHECK(played == std::vector<Index>{0, 1, 2});
}

TEST_CASE("supervised learner") {
  const ContextVector first(vec({1.0, 0.0}));
  const ContextVector second(vec({0.0, 1.0}));

  SUBCASE("round 1 plays action 0") {
    SupervisedLearner learner(2, 2);
    CHECK(learner.decide(first, 1).policy[0] == 1.0);
  }
  SUBCASE("separable contexts are classified after one pass") {
    SupervisedLearner learner(2, 2);
    learner.learn(first, 0, 0.0, Index{0});
    learner.learn(second, 0, 1.0, Index{1});
    CHECK(learner.decide(first, 3).policy[0] == 1.0);
    CHECK(learner.decide(second, 4).policy[1] == 1.0);
    // repeated contexts now cost nothing
    for (int i = 0; i < 5; ++i) {
      learner.learn(first, 0, 0.0, Index{0});
      CHECK(learner.decide(first, 5).policy[0] == 1.0);
    }
  }
  SUBCASE("labels are required") {
    SupervisedLearner learner(2, 2);
    CHECK_THROWS(learner.learn(first, 0, 0.0, std::nullopt));
  }
}

TEST_CASE("uniform learner") {
  UniformLearner learner(4);
  CHECK(same(learner.decide(ContextVector(vec({1.0})), 1).policy, Vector::Constant(4, 0.25)));
}
