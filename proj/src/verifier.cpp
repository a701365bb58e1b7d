#include "arpoison/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arpoison/parallel.hpp"

namespace arpoison {

ManualCNN build_manual_cnn(const ARProcessSet& set, int channel) {
  require(channel >= 0 && channel < set.channels(), ErrorKind::ChannelOutOfRange,
          "channel " + std::to_string(channel) + " out of range [0, " +
              std::to_string(set.channels()) + ")");
  ManualCNN cnn;
  for (int k = 0; k < set.classes(); ++k) {
    cnn.conv_filters.push_back(ar_filter(set.process(k, channel), std::size_t(k)));
  }
  cnn.linear_weights = -Eigen::MatrixXd::Identity(set.classes(), set.classes());
  cnn.linear_bias = Eigen::VectorXd::Ones(set.classes());
  return cnn;
}

Classification forward(const ManualCNN& cnn, const Eigen::Ref<const Plane<double>>& delta) {
  const int k = cnn.classes();
  Eigen::VectorXd pooled(k);
  for (int i = 0; i < k; ++i) {
    const Plane<double> response = cross_correlate_valid(delta, cnn.conv_filters[i]);
    pooled(i) = response.cwiseMax(0.0).maxCoeff();
  }
  Classification out;
  out.logits = cnn.linear_weights * pooled + cnn.linear_bias;
  // maxCoeff returns the first maximal index, i.e. the lowest-index tie-break.
  Eigen::Index best = 0;
  out.logits.maxCoeff(&best);
  out.label = static_cast<int>(best);
  return out;
}

SeparabilityReport verify_separability(const ARProcessSet& set, const SeparabilityOptions& options) {
  require(options.per_class >= 1, ErrorKind::InvalidArgument, "per-class count must be >= 1");
  const ManualCNN cnn = build_manual_cnn(set, options.channel);
  const int k = set.classes();
  const std::size_t total = std::size_t(k) * std::size_t(options.per_class);

  std::vector<Classification> results(total);
  parallel_for(0, total, options.threads, [&](std::size_t idx) {
    const int cls = static_cast<int>(idx / options.per_class);
    const std::uint64_t s = idx % options.per_class;
    const auto& process = set.process(cls, options.channel);
    const Eigen::Index cut = process.window_side() - 1 + options.extra_crop;
    const auto plane =
        ar_generate(process, options.height + cut, options.width + cut,
                    derive_seed(options.seed, {std::uint64_t(options.channel), std::uint64_t(cls), s}));
    results[idx] = forward(cnn, crop_init_band(plane, options.extra_crop).values);
  });

  SeparabilityReport report;
  report.channel = options.channel;
  report.per_class = options.per_class;
  report.height = options.height;
  report.width = options.width;
  report.confusion = Eigen::MatrixXi::Zero(k, k);
  report.min_gap = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  report.mean_gap = Eigen::VectorXd::Zero(k);
  std::size_t correct = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const int cls = static_cast<int>(idx / options.per_class);
    const auto& r = results[idx];
    report.confusion(cls, r.label) += 1;
    if (r.label == cls) ++correct;
    double competitor = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      if (j != cls) competitor = std::max(competitor, r.logits(j));
    }
    // With a single class there is no competitor; report the logit itself.
    const double gap = k > 1 ? r.logits(cls) - competitor : r.logits(cls);
    report.min_gap(cls) = std::min(report.min_gap(cls), gap);
    report.mean_gap(cls) += gap / options.per_class;
    report.max_matching_logit_error =
        std::max(report.max_matching_logit_error, std::abs(r.logits(cls) - 1.0));
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return report;
}

}  // namespace arpoison
