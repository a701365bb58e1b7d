#include <cmath>

#include "arpoison/coefficient_file.hpp"
#include "arpoison/search.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace arpoison;

namespace {

ARCoefficients<double> beta8(std::initializer_list<double> values) {
  Eigen::VectorXd b(8);
  int i = 0;
  for (double v : values) b(i++) = v;
  return ARCoefficients<double>(b);
}

std::vector<double> as_vector(const ARCoefficients<double>& c) {
  return {c.beta().data(), c.beta().data() + c.order()};
}

}  // namespace

TEST_CASE("stability check") {
  SUBCASE("copy-left process is stable") {
    const auto c = beta8({1, 0, 0, 0, 0, 0, 0, 0});
    CHECK(is_stable(c, 3, 1e4, 7));
    const auto probe = stable_probe(c, 3, 1e4, 7);
    REQUIRE(probe);
    CHECK(*probe == ar_generate(c, 36, 36, derive_seed(7, {0})).values);
  }

  SUBCASE("a sum-one process with a root at 2 diverges") {
    const auto c = beta8({3, -2, 0, 0, 0, 0, 0, 0});
    CHECK_FALSE(is_stable(c, 3, 1e4, 7));
    const auto g = oracle::generate(as_vector(c), 3, 36, 36, derive_seed(7, {0}));
    double sq = 0.0;
    for (double x : g.v) sq += x * x;
    CHECK((!std::isfinite(sq) || std::sqrt(sq) > 1e4));
  }

  SUBCASE("unnormalized doubling diverges") {
    CHECK_FALSE(is_stable(beta8({2, 0, 0, 0, 0, 0, 0, 0}), 3, 1e4, 0));
  }

  SUBCASE("bound and trial count are honoured") {
    const auto c = beta8({1, 0, 0, 0, 0, 0, 0, 0});
    const double n0 = ar_generate(c, 36, 36, derive_seed(3, {0})).values.norm();
    CHECK_FALSE(is_stable(c, 1, n0 * 0.999, 3));
    CHECK(is_stable(c, 1, n0 * 1.001, 3));
    CHECK_THROWS_AS((void)is_stable(c, 0, 1e4, 3), Error);
  }

  SUBCASE("every published process is stable") {
    for (const auto& c : published_process_set().flat()) CHECK(is_stable(c, 3, 1e4, 123));
  }
}

TEST_CASE("draw_candidate") {
  SearchConfig config;
  config.master_seed = 5;
  for (std::uint64_t a = 0; a < 200; ++a) {
    const auto cand = draw_candidate(config, a);
    REQUIRE(cand.coeffs);
    CHECK(std::abs(cand.coeffs->sum() - 1.0) <= 1e-9);
    CHECK(cand.probe_seed == derive_seed(5, {a, 1}));
    // Independent replay of the draw.
    GaussianStream g(derive_seed(5, {a, 0}));
    Eigen::VectorXd raw(8);
    for (auto& x : raw) x = g();
    CHECK(cand.coeffs->beta().isApprox(raw / raw.sum(), 1e-12));
  }
}

TEST_CASE("find_coefficients") {
  SUBCASE("threshold zero accepts the first stable candidate") {
    SearchConfig config;
    config.num_classes = 1;
    config.channels = 1;
    config.threshold = 0.0;
    config.master_seed = 17;
    const auto set = find_coefficients(config);
    REQUIRE(set.size() == 1);
    std::uint64_t first = 0;
    while (true) {
      const auto cand = draw_candidate(config, first);
      if (cand.coeffs && is_stable(*cand.coeffs, 3, 1e4, cand.probe_seed)) break;
      ++first;
    }
    CHECK(set.metadata().certificate.at(0).attempt == first);
    CHECK(set.metadata().attempts == first + 1);
    CHECK(set.flat()[0] == *draw_candidate(config, first).coeffs);
    CHECK(std::isinf(set.metadata().certificate[0].min_response));
  }

  SUBCASE("deterministic and independent of thread count") {
    SearchConfig config;
    config.num_classes = 4;
    config.channels = 3;
    config.threshold = 3.0;
    config.master_seed = 2024;
    const auto a = find_coefficients(config);
    const auto b = find_coefficients(config);
    config.threads = 3;
    const auto c = find_coefficients(config);
    CHECK(serialize_process_set(a) == serialize_process_set(b));
    CHECK(serialize_process_set(a) == serialize_process_set(c));
    config.master_seed = 2025;
    CHECK(serialize_process_set(a) != serialize_process_set(find_coefficients(config)));
  }

  SUBCASE("accepted set satisfies stability, sum and the certificate") {
    SearchConfig config;
    config.num_classes = 10;
    config.channels = 3;
    config.threshold = 10.0;
    config.master_seed = 1;
    std::size_t reports = 0;
    const auto set = find_coefficients(config, [&](const SearchProgress&) { ++reports; });
    CHECK(reports >= 1);
    REQUIRE(set.size() == 30);
    CHECK(set.classes() == 10);
    CHECK(set.process(2, 1) == set.flat()[7]);
    const auto& meta = set.metadata();
    REQUIRE(meta.certificate.size() == 30);
    CHECK(meta.origin == "search");
    CHECK(*meta.threshold == 10.0);

    const auto responses = certificate_responses(set);
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto& c = set.flat()[i];
      CHECK(std::abs(c.sum() - 1.0) <= 1e-9);
      CHECK(is_stable(c, 3, 1e4, meta.certificate[i].probe_seed));
      if (i > 0) CHECK(meta.certificate[i].attempt > meta.certificate[i - 1].attempt);

      // Oracle replay of probe i against every earlier filter.
      const auto probe = oracle::generate(as_vector(c), 3, 36, 36, derive_seed(meta.certificate[i].probe_seed, {0}));
      double min_r = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < i; ++j) {
        const double r = oracle::response(probe, as_vector(set.flat()[j]), 3);
        CHECK(r >= 10.0);
        CHECK(responses(i, j) == doctest::Approx(r).epsilon(1e-9));
        min_r = std::min(min_r, r);
      }
      if (i > 0) CHECK(meta.certificate[i].min_response == doctest::Approx(min_r).epsilon(1e-9));
    }
  }

  SUBCASE("exhaustion") {
    SearchConfig config;
    config.num_classes = 1;
    config.channels = 2;
    config.threshold = 1e12;
    config.max_attempts = 50;
    try {
      (void)find_coefficients(config);
      FAIL("expected SearchExhausted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SearchExhausted);
    }
  }

  SUBCASE("invalid configuration") {
    SearchConfig config;
    config.num_classes = 0;
    CHECK_THROWS_AS((void)find_coefficients(config), Error);
    config = {};
    config.threshold = -1.0;
    CHECK_THROWS_AS((void)find_coefficients(config), Error);
    config = {};
    config.probe_height = 2;
    CHECK_THROWS_AS((void)find_coefficients(config), Error);
  }

  SUBCASE("other window sides") {
    SearchConfig config;
    config.num_classes = 2;
    config.channels = 1;
    config.window_side = 2;
    config.threshold = 1.0;
    const auto set = find_coefficients(config);
    CHECK(set.window_side() == 2);
    CHECK(set.flat()[0].order() == 3);
  }
}
