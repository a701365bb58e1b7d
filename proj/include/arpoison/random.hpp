#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace arpoison {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from a parent seed and an ordered list of indices
/// (sample index, channel, trial, ...). Order matters; distinct paths give
/// statistically independent streams.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept;

/// Standard normal stream. Box-Muller over mt19937_64 so that draws are
/// identical across standard library implementations.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double operator()();

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform integer in [0, bound), bound > 0. Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace arpoison
