#pragma once

// AR filters and the valid-mode cross-correlation they are applied with.

#include <Eigen/Core>

#include <cstddef>

#include "arpoison/ar_core.hpp"

namespace arpoison {

/// V x V kernel [beta_p, ..., beta_1, -1] in raster order. Cross-correlating
/// it with noise from its own process gives zero on the pure-AR region.
template <typename Scalar>
struct ARFilter {
  Plane<Scalar> kernel;
  std::size_t source = 0;

  int side() const { return static_cast<int>(kernel.rows()); }
};

template <typename Scalar>
ARFilter<Scalar> ar_filter(const ARCoefficients<Scalar>& coeffs, std::size_t source = 0) {
  return {coeffs.kernel_layout(Scalar(-1)), source};
}

/// out(i, j) = sum_{u,v} signal(i+u, j+v) * kernel(u, v); no padding, no flip.
template <typename Derived>
Plane<typename Derived::Scalar> cross_correlate_valid(const Eigen::MatrixBase<Derived>& signal,
                                                      const ARFilter<typename Derived::Scalar>& filter) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index side = filter.kernel.rows();
  require(signal.rows() >= side && signal.cols() >= side, ErrorKind::DimensionTooSmall,
          "signal smaller than the filter");
  const Eigen::Index rows = signal.rows() - side + 1;
  const Eigen::Index cols = signal.cols() - side + 1;
  Plane<Scalar> out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = signal.block(i, j, side, side).cwiseProduct(filter.kernel).sum();
    }
  }
  return out;
}

/// Sum of the ReLU of the valid cross-correlation.
template <typename Derived>
typename Derived::Scalar conv_response(const Eigen::MatrixBase<Derived>& delta,
                                       const ARFilter<typename Derived::Scalar>& filter) {
  using Scalar = typename Derived::Scalar;
  return cross_correlate_valid(delta, filter).cwiseMax(Scalar(0)).sum();
}

}  // namespace arpoison
