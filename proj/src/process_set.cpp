#include "arpoison/process_set.hpp"

#include <array>

namespace arpoison {

ARProcessSet::ARProcessSet(int classes, int channels, std::vector<ARCoefficients<double>> processes,
                           ProcessSetMetadata metadata)
    : classes_(classes), channels_(channels), processes_(std::move(processes)),
      metadata_(std::move(metadata)) {
  require(classes_ >= 1 && channels_ >= 1, ErrorKind::InvalidArgument,
          "a process set needs at least one class and one channel");
  require(processes_.size() == std::size_t(classes_) * std::size_t(channels_),
          ErrorKind::InvalidArgument, "process count does not match classes x channels");
  for (const auto& p : processes_) {
    require(p.window_side() == processes_.front().window_side(), ErrorKind::InvalidCoefficients,
            "all processes in a set must share one window side");
  }
}

const ARCoefficients<double>& ARProcessSet::process(int cls, int channel) const {
  require(cls >= 0 && cls < classes_, ErrorKind::ClassOutOfRange,
          "class " + std::to_string(cls) + " out of range [0, " + std::to_string(classes_) + ")");
  require(channel >= 0 && channel < channels_, ErrorKind::ChannelOutOfRange,
          "channel " + std::to_string(channel) + " out of range [0, " + std::to_string(channels_) + ")");
  return processes_[std::size_t(cls) * channels_ + channel];
}

std::span<const ARCoefficients<double>> ARProcessSet::class_processes(int cls) const {
  require(cls >= 0 && cls < classes_, ErrorKind::ClassOutOfRange,
          "class " + std::to_string(cls) + " out of range [0, " + std::to_string(classes_) + ")");
  return std::span(processes_).subspan(std::size_t(cls) * channels_, channels_);
}

namespace {

// Published 10 x 3 x (3 x 3) listing, row-major blocks, final cell zero.
constexpr std::array<double, 270> kPublishedListing = {
    // class 0
     0.1561, -0.0710,  0.3743, -0.1896,  0.0461,  0.6075,  0.0539,  0.0226,     0.0,
    -0.1016,  0.2193,  0.0472,  0.1401,  0.1561,  0.1171,  0.1742,  0.2476,     0.0,
    -0.1100,  0.2703, -0.0026,  0.2662, -0.1185,  0.0846,  0.1812,  0.4287,     0.0,
    // class 1
     0.2346,  0.2056, -0.0480,  0.4110,  0.7504,  0.1326, -0.1044, -0.5817,     0.0,
    -0.0308, -0.1085,  0.3997,  0.2187,  0.1830,  0.3389, -0.1017,  0.1008,     0.0,
     0.1246,  0.1667, -0.1518,  0.2985,  0.1346,  0.3185,  0.3805, -0.2716,     0.0,
    // class 2
     0.0951,  0.5501,  0.0344, -0.3431,  0.0767,  0.2239,  0.4602, -0.0972,     0.0,
     0.1714,  0.1121,  0.1129,  0.3032,  0.2959,  0.0861,  0.2207, -0.3021,     0.0,
     0.2720, -0.3417,  0.2115,  0.2499,  0.3690,  0.3833, -0.0282, -0.1158,     0.0,
    // class 3
    -0.4241, -0.2694,  0.4091,  0.3998,  0.1572,  0.2683,  0.2700,  0.1892,     0.0,
     0.1246,  0.3024,  0.2110,  0.0538,  0.1997,  0.3283,  0.0372, -0.2570,     0.0,
     0.2038,  0.3972, -0.1963,  0.3460, -0.6439,  0.7153, -0.2826,  0.4605,     0.0,
    // class 4
     0.7873, -0.1756, -0.3509,  0.0763,  0.2261, -0.2704,  0.2491,  0.4581,     0.0,
     0.1287, -0.1655,  0.2488,  0.3811, -0.2307,  0.3019, -0.0076,  0.3433,     0.0,
     0.4227,  0.0690,  0.2492,  0.0896,  0.0653, -0.1653, -0.2349,  0.5043,     0.0,
    // class 5
     0.1585,  0.2663,  0.1764,  0.0031, -0.0237,  0.3464,  0.0140,  0.0590,     0.0,
     0.1632,  0.5094,  0.0321,  0.3935, -0.1807,  0.2110, -0.3620,  0.2334,     0.0,
    -0.2474,  0.1092,  0.3928,  0.2808,  0.3912,  0.1211, -0.0635,  0.0159,     0.0,
    // class 6
     0.8886, -0.2459, -0.4169, -0.4120, -0.1282,  0.6105,  0.2495,  0.4546,     0.0,
     0.0679, -0.2982,  0.1039,  0.1430,  0.1596,  0.6743, -0.2002,  0.3496,     0.0,
    -0.2195,  0.2183, -0.2665,  0.3373,  0.1907,  0.5847,  0.1977, -0.0427,     0.0,
    // class 7
    -0.3829,  0.0158,  0.4019, -0.0688,  0.1206,  0.2481,  0.1416,  0.5238,     0.0,
    -0.2271,  0.1683,  0.3593,  0.2671, -0.1225,  0.0217,  0.0266,  0.5066,     0.0,
     0.8539,  0.3682,  0.2899,  0.6635,  0.0130, -0.7025, -0.1377, -0.3483,     0.0,
    // class 8
     0.4482,  0.2220,  0.0598,  0.3965, -0.1148,  0.1683, -0.3444,  0.1644,     0.0,
    -0.1463,  0.6120,  0.2203,  0.4039, -0.2832, -0.1290,  0.3369, -0.0146,     0.0,
     0.3759,  0.2814,  0.1494,  0.1925,  0.0552,  0.1091, -0.0962, -0.0673,     0.0,
    // class 9
     0.3556,  0.3477, -0.6625,  0.1812,  0.2997, -0.2139,  0.5538,  0.1385,     0.0,
    -0.0297,  0.0780,  0.2486,  0.2246,  0.1931,  0.1349,  0.0079,  0.1426,     0.0,
     0.2461,  0.1217,  0.1879, -0.0165,  0.1160,  0.1356,  0.1772,  0.0321,     0.0,
};

ARProcessSet build_published() {
  std::vector<ARCoefficients<double>> processes;
  for (std::size_t b = 0; b < 30; ++b) {
    Eigen::Map<const Plane<double>> block(kPublishedListing.data() + 9 * b, 3, 3);
    processes.push_back(ARCoefficients<double>::from_kernel_layout(block));
  }
  ProcessSetMetadata meta;
  meta.origin = "published";
  return ARProcessSet(10, 3, std::move(processes), std::move(meta));
}

}  // namespace

std::span<const double> published_listing() { return kPublishedListing; }

const ARProcessSet& published_process_set() {
  static const ARProcessSet set = build_published();
  return set;
}

}  // namespace arpoison
