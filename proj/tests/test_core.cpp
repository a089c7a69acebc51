#include "opocmab/core.hpp"

#include <doctest.h>

#include <cmath>

using namespace opocmab;

TEST_CASE("normalize") {
  CHECK(normalize(Vector::Ones(4)).probs().isApprox(Vector::Constant(4, 0.25)));

  const auto point = normalize((Vector(2) << 2.0, 0.0).finished());
  CHECK(point[0] == 1.0);
  CHECK(point[1] == 0.0);

  const auto skew = normalize((Vector(2) << 1.0, 3.0).finished());
  CHECK(skew[0] == doctest::Approx(0.25));
  CHECK(skew[1] == doctest::Approx(0.75));
}

TEST_CASE("normalize rejects degenerate input") {
  CHECK_THROWS_WITH(normalize(Vector::Zero(3)), "degenerate weight vector");
  CHECK_THROWS_WITH(normalize((Vector(2) << 1.0, NAN).finished()), "degenerate weight vector");
  CHECK_THROWS_WITH(normalize((Vector(2) << 1.0, INFINITY).finished()), "degenerate weight vector");
  CHECK_THROWS_WITH(normalize((Vector(2) << 1.0, -0.5).finished()), "degenerate weight vector");
}

TEST_CASE("ActionDistribution validates") {
  CHECK_NOTHROW(ActionDistribution::from_probabilities((Vector(2) << 0.3, 0.7).finished()));
  CHECK_THROWS(ActionDistribution::from_probabilities((Vector(2) << 0.3, 0.6).finished()));
  CHECK_THROWS(ActionDistribution::from_probabilities((Vector(2) << -0.1, 1.1).finished()));
}

TEST_CASE("sample_action") {
  Rng rng(7);
  const auto first = ActionDistribution::from_probabilities((Vector(3) << 1, 0, 0).finished());
  const auto last = ActionDistribution::from_probabilities((Vector(3) << 0, 0, 1).finished());
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_action(first, rng) == 0);
    CHECK(sample_action(last, rng) == 2);
  }

  SUBCASE("fair coin") {
    Rng coin(42);
    const auto half = ActionDistribution::from_probabilities((Vector(2) << 0.5, 0.5).finished());
    int zeros = 0;
    for (int i = 0; i < 10000; ++i) zeros += sample_action(half, coin) == 0;
    CHECK(std::abs(zeros / 10000.0 - 0.5) <= 0.02);
  }

  SUBCASE("bit-reproducible for a fixed seed") {
    const auto dist = ActionDistribution::from_probabilities((Vector(4) << 0.1, 0.2, 0.3, 0.4).finished());
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) CHECK(sample_action(dist, a) == sample_action(dist, b));
  }
}

TEST_CASE("uniform_policy") {
  CHECK(uniform_policy(ActionSet{2}).probs().isApprox(Vector::Constant(2, 0.5)));
  CHECK(uniform_policy(ActionSet{4}).probs().isApprox(Vector::Constant(4, 0.25)));
  CHECK(uniform_policy(ActionSet{1})[0] == 1.0);
  CHECK_THROWS(ActionSet{0});
}

TEST_CASE("block-one-hot feature map") {
  const FeatureMap phi(3, 4);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Vector c(3);
    for (Index i = 0; i < 3; ++i) c[i] = rng.normal();
    const ContextVector ctx(c);
    for (Index a = 0; a < 4; ++a) {
      const Vector fa = phi(ctx, a);
      CHECK(fa.size() == 12);
      CHECK(fa.norm() == doctest::Approx(c.norm()));
      CHECK(fa.segment(3 * a, 3) == c);
      for (Index b = 0; b < 4; ++b)
        if (b != a) CHECK(fa.dot(phi(ctx, b)) == 0.0);
    }
  }
  CHECK_THROWS(phi(ContextVector(Vector::Ones(2)), 0));
}

TEST_CASE("context and loss sample invariants") {
  CHECK_THROWS(ContextVector((Vector(2) << 1.0, NAN).finished()));
  CHECK_THROWS(LossSample(ContextVector(Vector::Ones(1)), 0, 1.5));
  CHECK_THROWS(LossSample(ContextVector(Vector::Ones(1)), 0, -0.1));
  CHECK_NOTHROW(LossSample(ContextVector(Vector::Ones(1)), 0, 1.0));
}

TEST_CASE("entropy") {
  CHECK(entropy(uniform_policy(ActionSet{4})) == doctest::Approx(std::log(4.0)));
  CHECK(entropy(ActionDistribution::from_probabilities((Vector(2) << 1, 0).finished())) == 0.0);
}
