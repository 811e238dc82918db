#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>
#include <set>

#include "scalefit/rng.hpp"

using namespace scalefit;

TEST_CASE("same seed reproduces the stream") {
  Rng a(42), b(42);
  for (int k = 0; k < 1000; ++k) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams derived from one seed differ") {
  Rng a = Rng::stream(7, 0);
  Rng b = Rng::stream(7, 1);
  int same = 0;
  for (int k = 0; k < 64; ++k) same += a.next_u64() == b.next_u64();
  CHECK(same == 0);
}

TEST_CASE("next_below stays under the bound and covers it") {
  Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int k = 0; k < 2000; ++k) {
    const auto v = rng.next_below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK(rng.next_below(1) == 0);
}

TEST_CASE("next_double lands in [0,1)") {
  Rng rng(2);
  for (int k = 0; k < 1000; ++k) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal samples have roughly standard moments") {
  Rng rng(3);
  const int n = 40000;
  double sum = 0, sum_sq = 0;
  for (int k = 0; k < n; ++k) {
    const double z = rng.next_normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.03);
}

TEST_CASE("shuffle permutes and is seed-deterministic") {
  std::vector<int> v(100), w(100);
  std::iota(v.begin(), v.end(), 0);
  std::iota(w.begin(), w.end(), 0);
  Rng a(9), b(9);
  a.shuffle(v);
  b.shuffle(w);
  CHECK(v == w);
  std::set<int> elems(v.begin(), v.end());
  CHECK(elems.size() == 100);
  CHECK(v != std::vector<int>(w.size()) /* not all zero */);
}
