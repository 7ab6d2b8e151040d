#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "predstab/rng.hpp"

using namespace predstab;

TEST_CASE("streams with the same seed are identical", "[rng]") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("derived seeds differ across tags and nest", "[rng]") {
  REQUIRE(derive_seed(1, 0) != derive_seed(1, 1));
  REQUIRE(derive_seed(1, 2) != derive_seed(2, 2));
  REQUIRE(derive_seed(1, 2, 3) == derive_seed(derive_seed(1, 2), 3));
  // a few thousand derived seeds should not collide
  std::vector<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 4096; ++t) seen.push_back(derive_seed(7, t));
  std::sort(seen.begin(), seen.end());
  REQUIRE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("uniform01 stays inside the open interval", "[rng]") {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("below(n) is in range and roughly uniform", "[rng]") {
  Rng rng(11);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) {
    const auto v = rng.below(10);
    REQUIRE(v < 10);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (const int c : counts) {
    REQUIRE(c > 9000);
    REQUIRE(c < 11000);
  }
}

TEST_CASE("inverse normal CDF hits known quantiles", "[rng]") {
  REQUIRE(inverse_normal_cdf(0.5) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(inverse_normal_cdf(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-12));
  REQUIRE(inverse_normal_cdf(0.025) == Catch::Approx(-1.959963984540054).epsilon(1e-12));
  REQUIRE(inverse_normal_cdf(0.9) == Catch::Approx(1.2815515655446004).epsilon(1e-12));
  REQUIRE(inverse_normal_cdf(0.0013498980316300945) ==
          Catch::Approx(-3.0).epsilon(1e-10));
}

TEST_CASE("inverse normal CDF round-trips through erfc", "[rng]") {
  // forward CDF as the independent check
  const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  for (int k = 1; k < 1000; ++k) {
    const double p = k / 1000.0;
    REQUIRE(cdf(inverse_normal_cdf(p)) == Catch::Approx(p).margin(1e-12));
  }
  // the tails too
  for (const double p : {1e-6, 1e-9, 1.0 - 1e-6}) {
    REQUIRE(cdf(inverse_normal_cdf(p)) == Catch::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("normal variates have the right moments", "[rng]") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE(mean == Catch::Approx(0.0).margin(0.01));
  REQUIRE(var == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("shuffle is a permutation and seed-stable", "[rng]") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  Rng a(5);
  auto v1 = v;
  a.shuffle(v1);
  Rng b(5);
  auto v2 = v;
  b.shuffle(v2);
  REQUIRE(v1 == v2);
  std::sort(v1.begin(), v1.end());
  REQUIRE(v1 == v);
}
