#include <doctest.h>

#include <cmath>

#include "snnforge/rng.hpp"
#include "snnforge/snn_model.hpp"
#include "test_support.hpp"

using namespace snnforge;
using test_support::naive_feedforward;
using test_support::random_model;

TEST_CASE("sigmoid basics") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid(500.0) > 1.0 - 1e-6);
  CHECK(std::isfinite(sigmoid(500.0)));
  CHECK(std::isfinite(sigmoid(-750.0)));
  CHECK(sigmoid(-750.0) >= 0.0);

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double z = rng.uniform(-40.0, 40.0);
    CHECK(sigmoid(z) + sigmoid(-z) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int i = 0; i < 200; ++i) {
    // strict monotonicity, checked away from the saturated tails
    const double z = rng.uniform(-20.0, 20.0);
    CHECK(sigmoid(z + 1e-3) > sigmoid(z));
  }
}

TEST_CASE("dimension_count") {
  CHECK(dimension_count(8, 4) == 41);
  CHECK(dimension_count(1, 1) == 4);
  CHECK(dimension_count(9, 4) == 45);
  CHECK_THROWS_AS(dimension_count(0, 3), ConfigError);
  CHECK_THROWS_AS(dimension_count(3, 0), ConfigError);
}

TEST_CASE("dimension_count equals scalar field count for all small n,m") {
  for (std::size_t n = 1; n <= 64; ++n) {
    for (std::size_t m = 1; m <= 64; ++m) {
      const SnnModel model = SnnModel::zeros(n, m);
      const std::size_t scalars = model.hidden_weights.size() +
                                  model.hidden_biases.size() +
                                  model.output_weights.size() + 1;
      CHECK(scalars == dimension_count(n, m));
    }
  }
}

TEST_CASE("encode/decode") {
  SUBCASE("zero model gives zero vector") {
    const ParticleVector v = encode_particle(SnnModel::zeros(1, 1));
    REQUIRE(v.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(v[i] == 0.0);
  }
  SUBCASE("n=8 m=4 encodes to 41 values") {
    CHECK(encode_particle(SnnModel::zeros(8, 4)).size() == 41);
  }
  SUBCASE("round trip is exact for random models") {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
      const std::size_t n = 1 + rng.below(9);
      const std::size_t m = 1 + rng.below(7);
      const SnnModel model = random_model(n, m, rng, 3.0);
      const SnnModel back = decode_particle(encode_particle(model), n, m);
      CHECK(back.hidden_weights == model.hidden_weights);
      CHECK(back.hidden_biases == model.hidden_biases);
      CHECK(back.output_weights == model.output_weights);
      CHECK(back.output_bias == model.output_bias);
    }
  }
  SUBCASE("layout order is row-major with trailing output block") {
    SnnModel model = SnnModel::zeros(2, 2);
    model.hidden_weights = {1, 2, 4, 5};
    model.hidden_biases = {3, 6};
    model.output_weights = {7, 8};
    model.output_bias = 9;
    const ParticleVector v = encode_particle(model);
    CHECK(v.values == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  }
  SUBCASE("length mismatch is rejected") {
    ParticleVector v(std::vector<double>(10, 0.0));
    CHECK_THROWS_AS(decode_particle(v, 8, 4), ConfigError);
  }
}

TEST_CASE("feedforward") {
  SUBCASE("all-zero weights give 0.5 for any input") {
    const SnnModel model = SnnModel::zeros(3, 2);
    CHECK(feedforward(model, {0.3, -1.0, 2.0}) == doctest::Approx(0.5));
  }
  SUBCASE("large output bias dominates") {
    SnnModel model = SnnModel::zeros(3, 2);
    model.output_bias = 10.0;
    CHECK(feedforward(model, {0.9, 0.1, 0.5}) > 0.999);
  }
  SUBCASE("matches the naive two-loop oracle") {
    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
      const std::size_t n = 1 + rng.below(8);
      const std::size_t m = 1 + rng.below(6);
      const SnnModel model = random_model(n, m, rng, 2.0);
      std::vector<double> x(n);
      for (auto& v : x) v = rng.uniform(-2.0, 2.0);
      const double got = feedforward(model, x);
      CHECK(got == doctest::Approx(naive_feedforward(model, x)).epsilon(1e-12));
      CHECK(got > 0.0);
      CHECK(got < 1.0);
    }
  }
  SUBCASE("length mismatch is rejected") {
    const SnnModel model = SnnModel::zeros(3, 2);
    CHECK_THROWS_AS(feedforward(model, {1.0, 2.0}), ConfigError);
  }
}

TEST_CASE("model JSON round trip") {
  Rng rng(31);
  const SnnModel model = random_model(5, 3, rng, 1.5);
  const SnnModel back = model_from_json(model_to_json(model));
  REQUIRE(back.n == model.n);
  REQUIRE(back.m == model.m);
  const auto a = encode_particle(model).values;
  const auto b = encode_particle(back).values;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::fabs(a[i] - b[i]) < 1e-12);
  }
}
