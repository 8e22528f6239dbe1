#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gfab {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed of stream `index` under `global_seed`.
constexpr std::uint64_t stream_seed(std::uint64_t global_seed, std::uint64_t index) {
  return mix64(mix64(global_seed) ^ mix64(index + 0x632BE59BD9B4E019ull));
}

/// Seeded generator with platform-independent variate transforms.
///
/// The standard distributions are implementation defined, so uniforms are
/// built from the top 53 bits of mt19937_64 and everything else goes
/// through an inverse CDF.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1]. Never returns 0, so log() is always finite.
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Standard normal via Box-Muller (one draw per call, the sine branch is discarded).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gfab
