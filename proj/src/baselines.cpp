#include <cmath>

#include "arpoison/poisoner.hpp"

namespace arpoison {

Tensor<double> regions_noise(int p, Eigen::Index side, int channels, std::uint64_t seed) {
  require(p >= 1, ErrorKind::NonSquareP, "p must be a positive perfect square");
  const auto cells = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
  require(cells * cells == p, ErrorKind::NonSquareP, std::to_string(p) + " is not a perfect square");
  require(side > 0 && side % cells == 0, ErrorKind::IndivisibleGrid,
          "side " + std::to_string(side) + " is not divisible by sqrt(p) = " + std::to_string(cells));
  require(channels >= 1, ErrorKind::InvalidArgument, "channels must be >= 1");
  const Eigen::Index cell = side / cells;

  GaussianStream rng(seed);
  Tensor<double> out(channels, Plane<double>(side, side));
  for (int r = 0; r < cells; ++r) {
    for (int c = 0; c < cells; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        out[ch].block(r * cell, c * cell, cell, cell).setConstant(rng());
      }
    }
  }
  return out;
}

std::vector<Tensor<double>> random_noise_classwise(int classes, Eigen::Index height, Eigen::Index width,
                                                   int channels, std::uint64_t seed) {
  require(classes >= 1 && height >= 1 && width >= 1 && channels >= 1, ErrorKind::InvalidArgument,
          "classes, height, width and channels must be positive");
  std::vector<Tensor<double>> out;
  for (int k = 0; k < classes; ++k) {
    GaussianStream rng(derive_seed(seed, {std::uint64_t(k)}));
    Tensor<double> t;
    for (int ch = 0; ch < channels; ++ch) {
      Plane<double> plane(height, width);
      for (auto& v : plane.reshaped<Eigen::RowMajor>()) v = rng();
      t.push_back(std::move(plane));
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Tensor<double>> regions_noise_classwise(int classes, int p, Eigen::Index side, int channels,
                                                    std::uint64_t seed) {
  require(classes >= 1, ErrorKind::InvalidArgument, "classes must be >= 1");
  std::vector<Tensor<double>> out;
  for (int k = 0; k < classes; ++k) {
    out.push_back(regions_noise(p, side, channels, derive_seed(seed, {std::uint64_t(k)})));
  }
  return out;
}

}  // namespace arpoison
