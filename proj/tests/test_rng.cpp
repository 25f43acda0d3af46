#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "latreg/rng.hpp"

using namespace latreg;

TEST_CASE("derived seeds differ across tags and match across calls") {
  const std::uint64_t a = derive_seed(42, 1, 2, 100, 7, Stream::noise);
  const std::uint64_t b = derive_seed(42, 1, 2, 100, 7, Stream::noise);
  CHECK(a == b);
  CHECK(a != derive_seed(42, 1, 2, 100, 8, Stream::noise));
  CHECK(a != derive_seed(42, 1, 2, 100, 7, Stream::psi));
  CHECK(a != derive_seed(43, 1, 2, 100, 7, Stream::noise));
}

TEST_CASE("uniform01 stays in [0,1) and is seed-deterministic") {
  Rng r1(123), r2(123);
  for (int i = 0; i < 1000; ++i) {
    const double u = r1.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == r2.uniform01());
  }
}

TEST_CASE("normal draws have roughly standard moments") {
  Rng r(7);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("sample_without_replacement returns distinct sorted indices") {
  Rng r(99);
  auto idx = r.sample_without_replacement(10, 4);
  REQUIRE(idx.size() == 4);
  std::set<std::size_t> seen(idx.begin(), idx.end());
  CHECK(seen.size() == 4);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  for (auto i : idx) CHECK(i < 10);

  auto all = Rng(5).sample_without_replacement(6, 6);
  CHECK(all == std::vector<std::size_t>({0, 1, 2, 3, 4, 5}));
  CHECK_THROWS(Rng(1).sample_without_replacement(3, 4));
}

TEST_CASE("shuffle is a permutation") {
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  Rng r(3);
  r.shuffle(v);
  std::set<int> seen(v.begin(), v.end());
  CHECK(seen.size() == 8);
}
