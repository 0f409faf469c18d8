#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "geocat/rng.hpp"
#include "oracles.hpp"

using geocat::Rng;

TEST_CASE("streams are deterministic") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != c();
  }
  CHECK(differs);
}

TEST_CASE("replica streams are distinct and reproducible") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 1000; ++i) firsts.insert(Rng::for_replica(7, i)());
  CHECK(firsts.size() == 1000);
  CHECK(Rng::for_replica(7, 3)() == Rng::for_replica(7, 3)());
  CHECK(Rng::for_replica(7, 3)() != Rng::for_replica(8, 3)());
}

TEST_CASE("uniform ranges") {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double v = rng.uniform_pos();
    CHECK((v > 0.0 && v <= 1.0));
  }
}

TEST_CASE("below is uniform on its range") {
  Rng rng(2024);
  const int n = 7;
  std::vector<double> counts(n, 0.0);
  for (int i = 0; i < 700000; ++i) {
    const auto k = rng.below(n);
    REQUIRE(k < static_cast<std::uint64_t>(n));
    counts[k] += 1.0;
  }
  CHECK(oracles::chi_square_pvalue(counts, std::vector<double>(n, 1.0 / n)) > 0.001);
  CHECK(rng.below(1) == 0);
}

TEST_CASE("exponential mean and bernoulli frequency") {
  Rng rng(99);
  const int n = 1'000'000;
  double sum = 0.0;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    sum += rng.exponential(2.0);
    hits += rng.bernoulli(0.3);
  }
  // exp(2): mean 0.5, sd 0.5
  CHECK(std::abs(sum / n - 0.5) < 4.0 * 0.5 / std::sqrt(n));
  CHECK(std::abs(static_cast<double>(hits) / n - 0.3) < 4.0 * std::sqrt(0.21 / n));
}
