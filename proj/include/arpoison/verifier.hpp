#pragma once

// Hand-specified three-layer CNN that classifies AR noise without training:
// AR-filter convolution (no bias) + ReLU, global max-pool, linear layer with
// W = -I and b = 1.

#include <Eigen/Core>

#include <vector>

#include "arpoison/filters.hpp"
#include "arpoison/process_set.hpp"

namespace arpoison {

struct ManualCNN {
  std::vector<ARFilter<double>> conv_filters;
  Eigen::MatrixXd linear_weights;
  Eigen::VectorXd linear_bias;

  int classes() const { return static_cast<int>(conv_filters.size()); }
};

ManualCNN build_manual_cnn(const ARProcessSet& set, int channel);

struct Classification {
  Eigen::VectorXd logits;
  int label = 0;
};

Classification forward(const ManualCNN& cnn, const Eigen::Ref<const Plane<double>>& delta);

struct SeparabilityReport {
  int channel = 0;
  int per_class = 0;
  Eigen::Index height = 0;
  Eigen::Index width = 0;
  double accuracy = 0.0;
  /// confusion(true, predicted)
  Eigen::MatrixXi confusion;
  /// Matching logit minus the best competing logit, per class.
  Eigen::VectorXd min_gap;
  Eigen::VectorXd mean_gap;
  /// Largest deviation of a matching logit from 1.
  double max_matching_logit_error = 0.0;
};

struct SeparabilityOptions {
  int per_class = 1000;
  Eigen::Index height = 32;
  Eigen::Index width = 32;
  int channel = 0;
  std::uint64_t seed = 0;
  int extra_crop = kDefaultExtraCrop;
  unsigned threads = 1;
};

/// Sample s of class k uses init seed derive_seed(seed, {channel, k, s}).
SeparabilityReport verify_separability(const ARProcessSet& set, const SeparabilityOptions& options);

}  // namespace arpoison
