#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace mslab {

// Sub-stream identifiers. Every consumer of randomness in a run draws from
// its own stream, derived from the run's root seed, so adding or removing a
// learner never shifts the environment's draws.
namespace stream {
inline constexpr std::uint64_t environment = 1;
inline constexpr std::uint64_t environment_setup = 2;  // pre-sampled optimal arms etc.
inline constexpr std::uint64_t corral = 3;
inline constexpr std::uint64_t agent = 4;
inline constexpr std::uint64_t base = 100;  // base m uses base + m
}  // namespace stream

std::uint64_t splitmix64(std::uint64_t& state);

// Seed of sub-stream `id` under `root`. Also used to derive per-cell seeds
// from the harness root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t id, std::uint64_t index = 0);

class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t root, std::uint64_t stream_id, std::uint64_t index = 0)
      : engine_(derive_seed(root, stream_id, index)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t bits() { return engine_(); }
  // Uniform on {0, ..., n-1}; n >= 1.
  std::size_t uniform_index(std::size_t n);
  // Inverse-cdf draw from a probability vector (sum ~ 1). Never returns an
  // index with zero mass.
  std::size_t categorical(std::span<const double> probs);

  // UniformRandomBitGenerator, for <random> distributions.
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mslab
