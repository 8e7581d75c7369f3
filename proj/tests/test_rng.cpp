#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "srr/rng.hpp"

using namespace srr;

TEST_CASE("same seed replays the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("derived seeds separate streams and counters") {
  std::set<std::uint64_t> seen;
  for (auto s : {SeedStream::init, SeedStream::shuffle, SeedStream::power_iteration,
                 SeedStream::shift, SeedStream::augment, SeedStream::epoch_eval,
                 SeedStream::synth})
    for (std::uint64_t c = 0; c < 4; ++c) seen.insert(derive_seed(7, s, c));
  REQUIRE(seen.size() == 7 * 4);
  REQUIRE(derive_seed(7, SeedStream::shift, 1) != derive_seed(8, SeedStream::shift, 1));
}

TEST_CASE("uniform stays inside its interval") {
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = r.uniform(-2.0, 3.0);
    REQUIRE(v >= -2.0);
    REQUIRE(v < 3.0);
  }
}

TEST_CASE("gaussian moments are roughly standard") {
  Rng r(99);
  const int n = 200000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double g = r.gaussian();
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE(std::fabs(mean) < 0.01);
  REQUIRE(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("bounded draws cover the range without bias spikes") {
  Rng r(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const std::uint64_t k = r.bounded(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) REQUIRE(std::fabs(c - 10000.0) < 500.0);
}

TEST_CASE("shuffle permutes and is seed-stable") {
  std::vector<int> v(20);
  for (int i = 0; i < 20; ++i) v[i] = i;
  std::vector<int> w = v;
  Rng a(3), b(3);
  a.shuffle(v);
  b.shuffle(w);
  REQUIRE(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 20; ++i) REQUIRE(sorted[i] == i);
  Rng c(4);
  std::vector<int> u(20);
  for (int i = 0; i < 20; ++i) u[i] = i;
  c.shuffle(u);
  REQUIRE(u != v);
}
