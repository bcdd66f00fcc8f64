#include <doctest.h>

#include <cmath>
#include <set>

#include "percospec/rng.hpp"

using namespace percospec;

TEST_CASE("counter_uniform is a pure function of its key") {
  CHECK(counter_uniform(7, 3, 11) == counter_uniform(7, 3, 11));
  CHECK(counter_uniform(7, 3, 11) != counter_uniform(7, 3, 12));
  CHECK(counter_uniform(7, 3, 11) != counter_uniform(7, 4, 11));
  CHECK(counter_uniform(7, 3, 11) != counter_uniform(8, 3, 11));
}

TEST_CASE("CounterRng replays the counter stream") {
  CounterRng rng(42, 5);
  for (std::uint64_t j = 0; j < 100; ++j) CHECK(rng.uniform() == counter_uniform(42, 5, j));
  CHECK(rng.counter() == 100);
}

TEST_CASE("uniforms lie in [0, 1) with the right first two moments") {
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = counter_uniform(1, 0, static_cast<std::uint64_t>(i));
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("mix64 has no collisions on a small range") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(mix64(i));
  CHECK(seen.size() == 10000);
  static_assert(mix64(0) != mix64(1));
}
