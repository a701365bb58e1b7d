#include <cmath>
#include <limits>

#include "arpoison/ar_core.hpp"
#include "arpoison/filters.hpp"
#include "arpoison/process_set.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace arpoison;

namespace {

ARCoefficients<double> coeffs(std::initializer_list<double> values, int side = 3) {
  Eigen::VectorXd beta(values.size());
  int i = 0;
  for (double v : values) beta(i++) = v;
  return ARCoefficients<double>(beta, side);
}

Tensor<double> random_tensor(Eigen::Index h, Eigen::Index w, int c, std::uint64_t seed) {
  GaussianStream rng(seed);
  Tensor<double> t;
  for (int k = 0; k < c; ++k) {
    Plane<double> p(h, w);
    for (auto& v : p.reshaped<Eigen::RowMajor>()) v = rng();
    t.push_back(p);
  }
  return t;
}

// Random sum-to-one coefficient vector.
ARCoefficients<double> random_coeffs(std::uint64_t seed, int side = 3) {
  GaussianStream rng(seed);
  Eigen::VectorXd raw(side * side - 1);
  for (auto& x : raw) x = rng();
  return normalize_coefficients(raw, side);
}

}  // namespace

TEST_CASE("unit_sum and normalize_coefficients") {
  Eigen::VectorXd two(2);
  two << 2.0, 2.0;
  const Eigen::VectorXd halves = unit_sum(two);
  CHECK(halves(0) == 0.5);
  CHECK(halves(1) == 0.5);

  const auto eighths = normalize_coefficients(Eigen::VectorXd::Constant(8, 2.0));
  CHECK(eighths.beta().isApprox(Eigen::VectorXd::Constant(8, 0.125)));

  SUBCASE("first published process sums to one within listing rounding") {
    const auto listing = published_listing();
    double sum = 0.0;
    for (int r = 0; r < 8; ++r) sum += listing[r];
    CHECK(sum == doctest::Approx(0.9999).epsilon(1e-12));
    CHECK(std::abs(sum - 1.0) <= 5e-3);
  }

  SUBCASE("any Gaussian draw normalizes to sum one") {
    for (std::uint64_t s = 0; s < 1000; ++s) {
      GaussianStream rng(s);
      Eigen::VectorXd raw(8);
      for (auto& x : raw) x = rng();
      if (std::abs(raw.sum()) <= 1e-12) continue;
      const auto c = normalize_coefficients(raw);
      REQUIRE(std::abs(c.sum() - 1.0) <= 1e-9);
      // Direction preserved.
      CHECK((c.beta() * raw.sum()).isApprox(raw, 1e-12));
    }
  }

  SUBCASE("degenerate draws") {
    Eigen::VectorXd zero(8);
    zero << 1, -1, 2, -2, 3, -3, 0.5, -0.5;
    try {
      (void)normalize_coefficients(zero);
      FAIL("expected ZeroSumCoefficients");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ZeroSumCoefficients);
    }
    Eigen::VectorXd nan = Eigen::VectorXd::Ones(8);
    nan(3) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)normalize_coefficients(nan), Error);
    CHECK_THROWS_AS((void)unit_sum(Eigen::VectorXd(0)), Error);
  }

  SUBCASE("length must be V*V - 1") {
    CHECK_THROWS_AS(coeffs({0.5, 0.5}), Error);
    CHECK_NOTHROW(coeffs({0.2, 0.2, 0.6}, 2));
  }
}

TEST_CASE("kernel layout round trip") {
  const auto c = random_coeffs(11);
  const Plane<double> block = c.kernel_layout(0.0);
  CHECK(block(2, 1) == c.beta()(0));  // beta_1 sits left of the target
  CHECK(block(0, 0) == c.beta()(7));  // beta_8 is the top-left corner
  CHECK(block(2, 2) == 0.0);
  CHECK(ARCoefficients<double>::from_kernel_layout(block) == c);
}

TEST_CASE("ar_generate") {
  SUBCASE("copy-left process repeats the init column along each row") {
    const auto c = coeffs({1, 0, 0, 0, 0, 0, 0, 0});
    const auto plane = ar_generate(c, 8, 10, 5).values;
    for (Eigen::Index i = 2; i < 8; ++i) {
      for (Eigen::Index j = 2; j < 10; ++j) CHECK(plane(i, j) == plane(i, 1));
    }
  }

  SUBCASE("mean process matches the brute-force recurrence") {
    const auto c = coeffs({0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125});
    const auto plane = ar_generate(c, 6, 6, 42).values;
    const auto ref = oracle::generate(std::vector<double>(8, 0.125), 3, 6, 6, 42);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) CHECK(plane(i, j) == doctest::Approx(ref.at(i, j)).epsilon(1e-12));
    }
  }

  SUBCASE("random processes match the brute-force recurrence for several window sides") {
    for (int side : {2, 3, 4}) {
      for (std::uint64_t s = 0; s < 5; ++s) {
        const auto c = random_coeffs(100 + s, side);
        const auto plane = ar_generate(c, 9, 7, s).values;
        const std::vector<double> beta(c.beta().data(), c.beta().data() + c.order());
        const auto ref = oracle::generate(beta, side, 9, 7, s);
        for (int i = 0; i < 9; ++i) {
          for (int j = 0; j < 7; ++j) {
            CHECK(std::abs(plane(i, j) - ref.at(i, j)) <= 1e-9 * (1.0 + std::abs(ref.at(i, j))));
          }
        }
      }
    }
  }

  SUBCASE("init band holds the raw Gaussian draws in raster order") {
    const auto c = random_coeffs(3);
    const auto plane = ar_generate(c, 5, 6, 77).values;
    GaussianStream rng(77);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 6; ++j) {
        if (i < 2 || j < 2) CHECK(plane(i, j) == rng());
      }
    }
  }

  SUBCASE("published process 1 gives zero response to its own filter") {
    const auto& c = published_process_set().process(0, 0);
    const auto plane = ar_generate(c, 36, 36, 9).values;
    const auto response = cross_correlate_valid(plane, ar_filter(c));
    CHECK(response.cwiseAbs().maxCoeff() <= 1e-7 * (1.0 + plane.cwiseAbs().maxCoeff()));
  }

  SUBCASE("recurrence exactness on every interior cell") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto c = random_coeffs(500 + s);
      const auto plane = ar_generate(c, 12, 12, s).values;
      if (!plane.allFinite()) continue;
      const Plane<double> kernel = c.kernel_layout(0.0);
      for (Eigen::Index i = 2; i < 12; ++i) {
        for (Eigen::Index j = 2; j < 12; ++j) {
          const auto window = plane.block(i - 2, j - 2, 3, 3);
          const double predicted = window.cwiseProduct(kernel).sum();
          CHECK(std::abs(plane(i, j) - predicted) <= 1e-9 * (1.0 + window.cwiseAbs().maxCoeff()));
        }
      }
    }
  }

  SUBCASE("determinism") {
    const auto c = random_coeffs(8);
    CHECK(ar_generate(c, 20, 20, 1).values == ar_generate(c, 20, 20, 1).values);
    CHECK(ar_generate(c, 20, 20, 1).values != ar_generate(c, 20, 20, 2).values);
  }

  SUBCASE("too small") {
    const auto c = random_coeffs(1);
    try {
      (void)ar_generate(c, 2, 10, 0);
      FAIL("expected DimensionTooSmall");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionTooSmall);
    }
    CHECK_THROWS_AS((void)ar_generate(c, 10, 1, 0), Error);
    CHECK_NOTHROW((void)ar_generate(c, 3, 3, 0));
  }
}

TEST_CASE("crop_init_band") {
  const auto c = random_coeffs(21);
  SUBCASE("36 -> 32 and 100 -> 96 with the default extra crop") {
    CHECK(crop_init_band(ar_generate(c, 36, 36, 0), 2).values.rows() == 32);
    CHECK(crop_init_band(ar_generate(c, 36, 36, 0), 2).values.cols() == 32);
    CHECK(crop_init_band(ar_generate(c, 100, 100, 0), 2).values.rows() == 96);
  }

  SUBCASE("crop keeps the matching sub-region and the recurrence") {
    const auto full = ar_generate(c, 34, 34, 4);
    const auto cropped = crop_init_band(full, 0);
    REQUIRE(cropped.values.rows() == 32);
    CHECK(cropped.values == full.values.bottomRightCorner(32, 32));
    CHECK(cropped.offset == 2);
    const Plane<double> kernel = c.kernel_layout(-1.0);
    // Every window fully inside the cropped region still satisfies the recurrence.
    for (Eigen::Index i = 0; i + 3 <= 32; ++i) {
      for (Eigen::Index j = 0; j + 3 <= 32; ++j) {
        const auto w = cropped.values.block(i, j, 3, 3);
        CHECK(std::abs(w.cwiseProduct(kernel).sum()) <= 1e-9 * (1.0 + w.cwiseAbs().maxCoeff()));
      }
    }
    CHECK(crop_init_band(full, 3).values == full.values.bottomRightCorner(29, 29));
  }

  SUBCASE("errors") {
    const auto small = ar_generate(c, 4, 4, 0);
    CHECK_THROWS_AS((void)crop_init_band(small, 2), Error);
    CHECK_THROWS_AS((void)crop_init_band(small, -1), Error);
    CHECK(crop_init_band(small, 1).values.rows() == 1);
  }
}

TEST_CASE("project_norm") {
  SUBCASE("halves a tensor of l2 norm 2") {
    Tensor<double> t{Plane<double>::Constant(2, 2, 1.0)};  // norm 2
    const auto p = project_norm(t, 1.0, NormKind::L2);
    CHECK(p.values[0].isApprox(Plane<double>::Constant(2, 2, 0.5)));
    CHECK(tensor_norm(p.values, NormKind::L2) == doctest::Approx(1.0));
  }

  SUBCASE("CIFAR-shaped l2 and linf") {
    const auto t = random_tensor(32, 32, 3, 5);
    const auto l2 = project_norm(t, 1.0, NormKind::L2);
    CHECK(std::abs(tensor_norm(l2.values, NormKind::L2) - 1.0) <= 1e-6);
    const double eps = 8.0 / 255.0;
    const auto linf = project_norm(t, eps, NormKind::LInf);
    CHECK(std::abs(tensor_norm(linf.values, NormKind::LInf) - eps) <= 1e-9);
    // Direction preserved.
    const double scale = linf.values[1](3, 4) / t[1](3, 4);
    CHECK(linf.values[2].isApprox(t[2] * scale, 1e-12));
  }

  SUBCASE("norm is taken over all channels together") {
    Tensor<double> t{Plane<double>::Constant(1, 1, 3.0), Plane<double>::Constant(1, 1, 4.0)};
    const auto p = project_norm(t, 1.0, NormKind::L2);
    CHECK(p.values[0](0, 0) == doctest::Approx(0.6));
    CHECK(p.values[1](0, 0) == doctest::Approx(0.8));
  }

  SUBCASE("positive rescaling of the input does not change the output") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto t = random_tensor(6, 5, 2, s);
      GaussianStream rng(1000 + s);
      const double c = std::exp(4.0 * rng());
      Tensor<double> scaled = t;
      for (auto& p : scaled) p *= c;
      for (NormKind kind : {NormKind::L2, NormKind::LInf}) {
        const auto a = project_norm(t, 0.5, kind);
        const auto b = project_norm(scaled, 0.5, kind);
        for (std::size_t k = 0; k < t.size(); ++k) CHECK(a.values[k].isApprox(b.values[k], 1e-12));
      }
    }
  }

  SUBCASE("zero perturbation") {
    Tensor<double> zero{Plane<double>::Zero(3, 3)};
    try {
      (void)project_norm(zero, 1.0, NormKind::L2);
      FAIL("expected ZeroPerturbation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ZeroPerturbation);
    }
    CHECK_THROWS_AS((void)project_norm(random_tensor(2, 2, 1, 0), 0.0, NormKind::L2), Error);
  }
}

TEST_CASE("generate_channels uses one process and seed per channel") {
  const auto& set = published_process_set();
  const auto t = generate_channels(set.class_processes(4), 32, 32, 2, 99);
  REQUIRE(t.size() == 3);
  for (int c = 0; c < 3; ++c) {
    const auto expect = crop_init_band(ar_generate(set.process(4, c), 36, 36, derive_seed(99, {std::uint64_t(c)})), 2);
    CHECK(t[c] == expect.values);
  }
}
