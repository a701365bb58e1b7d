#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "arpoison/ar_core.hpp"
#include "arpoison/process_set.hpp"

namespace arpoison {

struct SearchConfig {
  int num_classes = 10;
  int channels = 3;
  int window_side = kDefaultWindowSide;
  double threshold = 10.0;
  std::uint64_t master_seed = 0;
  int stability_trials = 3;
  double stability_norm_bound = 1e4;
  Eigen::Index probe_height = 36;
  Eigen::Index probe_width = 36;
  std::uint64_t max_attempts = 1'000'000;
  /// Workers for candidate evaluation; acceptance stays sequential.
  unsigned threads = 1;

  void validate() const;
};

struct SearchProgress {
  std::uint64_t attempts = 0;
  std::uint64_t stable = 0;
  std::size_t accepted = 0;
  std::size_t target = 0;
};

/// Generates `trials` probe planes (trial t seeded by derive_seed(seed, {t}))
/// and returns the first one iff every plane has a finite l2 norm <= bound.
std::optional<Plane<double>> stable_probe(const ARCoefficients<double>& coeffs, int trials,
                                          double bound, std::uint64_t seed,
                                          Eigen::Index height = 36, Eigen::Index width = 36);

bool is_stable(const ARCoefficients<double>& coeffs, int trials, double bound, std::uint64_t seed,
               Eigen::Index height = 36, Eigen::Index width = 36);

/// Coefficients and probe seed drawn for a given search attempt.
struct Candidate {
  std::optional<ARCoefficients<double>> coeffs;  // empty if the draw summed to zero
  std::uint64_t probe_seed = 0;
};

Candidate draw_candidate(const SearchConfig& config, std::uint64_t attempt);

/// Random search for K*C mutually diverse stable processes. One flat search
/// fills K*C entries that are then split row-major into classes. Throws
/// SearchExhausted when max_attempts runs out.
ARProcessSet find_coefficients(const SearchConfig& config,
                               const std::function<void(const SearchProgress&)>& progress = {});

/// Responses of entry i's replayed probe against entry j's filter for j < i
/// (strict lower triangle; other cells are NaN). Requires a certificate.
Eigen::MatrixXd certificate_responses(const ARProcessSet& set);

}  // namespace arpoison
