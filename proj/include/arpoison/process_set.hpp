#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arpoison/ar_core.hpp"

namespace arpoison {

/// Replay record for one accepted search entry.
struct CertificateEntry {
  std::uint64_t attempt = 0;
  std::uint64_t probe_seed = 0;
  /// Minimum response of this entry's probe against every earlier entry's
  /// filter; +inf for the first entry.
  double min_response = std::numeric_limits<double>::infinity();
};

struct ProcessSetMetadata {
  std::string origin = "unspecified";
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  Eigen::Index probe_height = 36;
  Eigen::Index probe_width = 36;
  int stability_trials = 3;
  double stability_norm_bound = 1e4;
  std::uint64_t attempts = 0;
  std::vector<CertificateEntry> certificate;
};

/// K classes x C channels of AR processes, stored row-major (class-major).
class ARProcessSet {
 public:
  ARProcessSet(int classes, int channels, std::vector<ARCoefficients<double>> processes,
               ProcessSetMetadata metadata = {});

  int classes() const noexcept { return classes_; }
  int channels() const noexcept { return channels_; }
  int window_side() const noexcept { return processes_.front().window_side(); }
  std::size_t size() const noexcept { return processes_.size(); }

  const ARCoefficients<double>& process(int cls, int channel) const;
  std::span<const ARCoefficients<double>> class_processes(int cls) const;
  const std::vector<ARCoefficients<double>>& flat() const noexcept { return processes_; }
  const ProcessSetMetadata& metadata() const noexcept { return metadata_; }

 private:
  int classes_;
  int channels_;
  std::vector<ARCoefficients<double>> processes_;
  ProcessSetMetadata metadata_;
};

/// The ten 3-channel AR(8) processes released with the original AR poisons,
/// read from the published listing in filter layout.
const ARProcessSet& published_process_set();

/// The published listing as printed: 10 x 3 x 3 x 3 values, final cell 0.
std::span<const double> published_listing();

}  // namespace arpoison
