#pragma once

// Autoregressive perturbation core: coefficient vectors, the 2D sliding-window
// recurrence, init-band cropping and norm projection. Everything here is
// templated on the scalar type; the library instantiates double.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arpoison/error.hpp"
#include "arpoison/random.hpp"

namespace arpoison {

template <typename Scalar>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Channel-planar H x W x C tensor.
template <typename Scalar>
using Tensor = std::vector<Plane<Scalar>>;

enum class NormKind { L2, LInf };

std::string to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& text);

inline constexpr int kDefaultWindowSide = 3;
inline constexpr int kDefaultExtraCrop = 2;
inline constexpr double kZeroSumTolerance = 1e-12;
inline constexpr double kZeroNormTolerance = 1e-30;

/// Coefficients beta_1..beta_p of one AR(p) process over a V x V window,
/// p = V*V - 1. beta_1 weights the raster-order immediate predecessor (the
/// left neighbour), beta_p the top-left corner of the window.
template <typename Scalar>
class ARCoefficients {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ARCoefficients(Vector beta, int window_side = kDefaultWindowSide)
      : beta_(std::move(beta)), window_side_(window_side) {
    require(window_side_ >= 2, ErrorKind::InvalidCoefficients, "window side must be at least 2");
    require(beta_.size() == Eigen::Index(window_side_) * window_side_ - 1,
            ErrorKind::InvalidCoefficients,
            "expected " + std::to_string(window_side_ * window_side_ - 1) +
                " coefficients, got " + std::to_string(beta_.size()));
    require(beta_.allFinite(), ErrorKind::InvalidCoefficients, "coefficients must be finite");
  }

  const Vector& beta() const noexcept { return beta_; }
  int window_side() const noexcept { return window_side_; }
  int order() const noexcept { return static_cast<int>(beta_.size()); }
  Scalar sum() const { return beta_.sum(); }

  /// V x V block in filter layout: raster order [beta_p, ..., beta_1, last].
  Plane<Scalar> kernel_layout(Scalar last) const {
    const int p = order();
    Plane<Scalar> block(window_side_, window_side_);
    for (int r = 0; r < p; ++r) block(r / window_side_, r % window_side_) = beta_(p - 1 - r);
    block(window_side_ - 1, window_side_ - 1) = last;
    return block;
  }

  /// Inverse of kernel_layout; the final cell is ignored.
  template <typename Derived>
  static ARCoefficients from_kernel_layout(const Eigen::MatrixBase<Derived>& block) {
    require(block.rows() == block.cols(), ErrorKind::InvalidCoefficients,
            "coefficient block must be square");
    const int side = static_cast<int>(block.rows());
    const int p = side * side - 1;
    Vector beta(p);
    for (int r = 0; r < p; ++r) beta(p - 1 - r) = block(r / side, r % side);
    return ARCoefficients(std::move(beta), side);
  }

  bool operator==(const ARCoefficients& other) const {
    return window_side_ == other.window_side_ && beta_ == other.beta_;
  }

 private:
  Vector beta_;
  int window_side_;
};

/// raw / sum(raw). Throws ZeroSumCoefficients when |sum| <= 1e-12.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> unit_sum(const Eigen::MatrixBase<Derived>& raw) {
  require(raw.size() > 0, ErrorKind::InvalidCoefficients, "empty coefficient vector");
  require(raw.allFinite(), ErrorKind::InvalidCoefficients, "coefficients must be finite");
  const auto total = raw.sum();
  require(std::abs(static_cast<double>(total)) > kZeroSumTolerance, ErrorKind::ZeroSumCoefficients,
          "coefficients sum to zero");
  return raw.reshaped() / total;
}

/// Scales a raw draw so the coefficients sum to one.
template <typename Derived>
ARCoefficients<typename Derived::Scalar> normalize_coefficients(
    const Eigen::MatrixBase<Derived>& raw, int window_side = kDefaultWindowSide) {
  return ARCoefficients<typename Derived::Scalar>(unit_sum(raw), window_side);
}

template <typename Scalar>
struct PerturbationPlane {
  Plane<Scalar> values;
  int window_side = kDefaultWindowSide;
  std::uint64_t init_seed = 0;
  /// Offset of values(0, 0) along both axes within the uncropped grid.
  Eigen::Index offset = 0;
};

/// Applies the recurrence in place to every cell outside the init band
/// (rows and columns < V-1), left to right, top to bottom. The band itself
/// is left untouched.
template <typename Scalar>
void fill_ar_recurrence(Plane<Scalar>& plane, const ARCoefficients<Scalar>& coeffs) {
  const int side = coeffs.window_side();
  const Eigen::Index band = side - 1;
  require(plane.rows() > band && plane.cols() > band, ErrorKind::DimensionTooSmall,
          "plane must exceed the init band in both dimensions");
  const Plane<Scalar> kernel = coeffs.kernel_layout(Scalar(0));
  for (Eigen::Index i = band; i < plane.rows(); ++i) {
    for (Eigen::Index j = band; j < plane.cols(); ++j) {
      Scalar acc(0);
      for (int u = 0; u < side; ++u) {
        for (int v = 0; v < side; ++v) {
          if (u == band && v == band) continue;
          acc += kernel(u, v) * plane(i - band + u, j - band + v);
        }
      }
      plane(i, j) = acc;
    }
  }
}

/// Generates one AR plane. The L-shaped init band is filled with standard
/// normal draws in raster order, then the recurrence fills the rest with the
/// innovation term fixed to zero.
template <typename Scalar>
PerturbationPlane<Scalar> ar_generate(const ARCoefficients<Scalar>& coeffs, Eigen::Index height,
                                      Eigen::Index width, std::uint64_t init_seed) {
  const Eigen::Index band = coeffs.window_side() - 1;
  require(height > band && width > band, ErrorKind::DimensionTooSmall,
          "generation grid " + std::to_string(height) + "x" + std::to_string(width) +
              " does not exceed the init band");
  GaussianStream noise(init_seed);
  Plane<Scalar> plane = Plane<Scalar>::Zero(height, width);
  for (Eigen::Index i = 0; i < height; ++i) {
    const Eigen::Index row_end = i < band ? width : band;
    for (Eigen::Index j = 0; j < row_end; ++j) plane(i, j) = static_cast<Scalar>(noise());
  }
  fill_ar_recurrence(plane, coeffs);
  return {std::move(plane), coeffs.window_side(), init_seed, 0};
}

/// Drops the first (V-1)+extra rows and columns.
template <typename Scalar>
PerturbationPlane<Scalar> crop_init_band(const PerturbationPlane<Scalar>& plane, int extra) {
  require(extra >= 0, ErrorKind::InvalidArgument, "extra crop must be non-negative");
  const Eigen::Index cut = plane.window_side - 1 + extra;
  require(plane.values.rows() > cut && plane.values.cols() > cut, ErrorKind::DimensionTooSmall,
          "nothing remains after cropping " + std::to_string(cut) + " rows and columns");
  PerturbationPlane<Scalar> out;
  out.values = plane.values.bottomRightCorner(plane.values.rows() - cut, plane.values.cols() - cut);
  out.window_side = plane.window_side;
  out.init_seed = plane.init_seed;
  out.offset = plane.offset + cut;
  return out;
}

template <typename Scalar>
Scalar tensor_norm(std::span<const Plane<Scalar>> tensor, NormKind kind) {
  Scalar acc(0);
  for (const auto& channel : tensor) {
    if (kind == NormKind::L2) {
      acc += channel.squaredNorm();
    } else if (channel.size() > 0) {
      acc = std::max(acc, channel.cwiseAbs().maxCoeff());
    }
  }
  return kind == NormKind::L2 ? std::sqrt(acc) : acc;
}

template <typename Scalar>
Scalar tensor_norm(const Tensor<Scalar>& tensor, NormKind kind) {
  return tensor_norm(std::span<const Plane<Scalar>>(tensor), kind);
}

template <typename Scalar>
struct Perturbation {
  Tensor<Scalar> values;
  Scalar epsilon{};
  NormKind norm = NormKind::L2;

  Eigen::Index channels() const { return static_cast<Eigen::Index>(values.size()); }
};

/// Rescales the whole C-channel tensor to norm epsilon.
template <typename Scalar>
Perturbation<Scalar> project_norm(Tensor<Scalar> delta, Scalar epsilon, NormKind kind) {
  require(epsilon > Scalar(0), ErrorKind::InvalidArgument, "epsilon must be positive");
  const Scalar norm = tensor_norm(delta, kind);
  require(std::isfinite(static_cast<double>(norm)), ErrorKind::InvalidArgument,
          "perturbation norm is not finite");
  require(norm > Scalar(kZeroNormTolerance), ErrorKind::ZeroPerturbation, "perturbation is zero");
  const Scalar scale = epsilon / norm;
  for (auto& channel : delta) channel *= scale;
  return {std::move(delta), epsilon, kind};
}

/// Generates one unscaled C-channel perturbation of size height x width:
/// each channel runs its own process on a grid enlarged by the crop, seeded
/// by derive_seed(sample_seed, {channel}), then is cropped.
template <typename Scalar>
Tensor<Scalar> generate_channels(std::span<const ARCoefficients<Scalar>> processes,
                                 Eigen::Index height, Eigen::Index width, int extra_crop,
                                 std::uint64_t sample_seed) {
  Tensor<Scalar> out;
  out.reserve(processes.size());
  for (std::size_t c = 0; c < processes.size(); ++c) {
    const Eigen::Index cut = processes[c].window_side() - 1 + extra_crop;
    auto plane = ar_generate(processes[c], height + cut, width + cut, derive_seed(sample_seed, {c}));
    out.push_back(crop_init_band(plane, extra_crop).values);
  }
  return out;
}

}  // namespace arpoison
