#pragma once

#include <cstdint>
#include <random>

namespace satad {

// Seeded RNG used everywhere stochastic behaviour is required. Wrapping
// mt19937_64 in one place keeps every module on the same engine and makes
// "--seed fully determines all outputs" auditable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

  // Derive an independent stream, e.g. one per window when scoring in a
  // worker pool; results must not depend on scheduling order.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 on the combined value
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace satad
