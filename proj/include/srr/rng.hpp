#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace srr {

/// Named sub-streams carved out of one master seed. Every stochastic
/// consumer derives its own engine from (master, stream, counter) so that
/// adding draws to one consumer never perturbs another.
enum class SeedStream : std::uint64_t {
  init = 1,
  shuffle = 2,
  power_iteration = 3,
  shift = 4,
  augment = 5,
  epoch_eval = 6,
  synth = 7,
};

/// splitmix64 finalizer; decorrelates nearby inputs.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                 std::uint64_t counter = 0) {
  std::uint64_t h = mix64(master ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ counter);
  return h;
}

/// Deterministic RNG wrapper. std::shuffle and the std distributions are
/// implementation-defined, so uniforms, gaussians (Box-Muller), bounded
/// ints (rejection) and the Fisher-Yates shuffle are spelled out here to
/// make identical seeds give identical draws on any conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the spare is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::uint64_t bounded(std::uint64_t n) {
    if (n < 2) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      const std::size_t j = bounded(i + 1);
      std::swap(items[i], items[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace srr
