#include <cmath>
#include <set>

#include "arpoison/poisoner.hpp"
#include "doctest.h"
#include "toy_dataset.hpp"

using namespace arpoison;

namespace {

std::vector<DatasetSample> collect(const DatasetSource& source, const ARProcessSet& set,
                                   const PoisonOptions& options, PoisonManifest* manifest = nullptr) {
  std::vector<DatasetSample> out;
  auto m = poison_dataset(source, set, options, [&](const DatasetSample& s) { out.push_back(s); });
  if (manifest) *manifest = std::move(m);
  return out;
}

Tensor<double> difference(const Tensor<double>& a, const Tensor<double>& b) {
  Tensor<double> d;
  for (std::size_t c = 0; c < a.size(); ++c) d.push_back(a[c] - b[c]);
  return d;
}

}  // namespace

TEST_CASE("poison_sample") {
  const auto& set = published_process_set();
  const auto data = toy::make(4, {32, 32, 3}, 10, 1);

  SUBCASE("CIFAR-sized L2 budget") {
    const auto clean = data.sample(2);
    const auto p = poison_sample(clean, set, 1.0, NormKind::L2, 77);
    CHECK(p.sample.label == clean.label);
    CHECK(p.stats.clamped == 0);
    CHECK(std::abs(p.stats.pre_clamp_norm - 1.0) <= 1e-6);
    CHECK(std::abs(tensor_norm(difference(p.sample.image, clean.image), NormKind::L2) - 1.0) <= 1e-6);
    // The perturbation is the scaled AR noise of the sample's class.
    const auto noise = ar_sample_noise(set, clean.label, 32, 32, 77, 2);
    const double scale = 1.0 / tensor_norm(noise, NormKind::L2);
    for (int c = 0; c < 3; ++c) CHECK((p.sample.image[c] - clean.image[c]).isApprox(noise[c] * scale, 1e-12));
  }

  SUBCASE("Linf budget") {
    const double eps = 8.0 / 255.0;
    const auto p = poison_sample(data.sample(0), set, eps, NormKind::LInf, 3);
    CHECK(std::abs(tensor_norm(difference(p.sample.image, data.sample(0).image), NormKind::LInf) - eps) <= 1e-9);
  }

  SUBCASE("vanishing budget leaves the image nearly unchanged") {
    const auto clean = data.sample(1);
    for (double eps : {1e-3, 1e-6, 1e-9}) {
      const auto p = poison_sample(clean, set, eps, NormKind::L2, 5);
      CHECK(tensor_norm(difference(p.sample.image, clean.image), NormKind::L2) <= eps * (1 + 1e-6));
    }
  }

  SUBCASE("96 x 96 images") {
    const auto stl = toy::make(2, {96, 96, 3}, 10, 2);
    const auto p = poison_sample(stl.sample(1), set, 3.0, NormKind::L2, 11);
    CHECK(p.sample.image[0].rows() == 96);
    CHECK(std::abs(p.stats.pre_clamp_norm - 3.0) <= 1e-6);
    CHECK(p.stats.post_clamp_norm <= 3.0 + 1e-9);
  }

  SUBCASE("clamping shrinks the applied perturbation and is counted") {
    DatasetSample white;
    white.label = 4;
    for (int c = 0; c < 3; ++c) white.image.push_back(Plane<double>::Ones(32, 32));
    const auto p = poison_sample(white, set, 4.0, NormKind::L2, 8);
    CHECK(p.stats.clamped > 0);
    CHECK(p.stats.post_clamp_norm < p.stats.pre_clamp_norm);
    for (const auto& plane : p.sample.image) CHECK(plane.maxCoeff() <= 1.0);
    CHECK(p.sample.label == 4);
  }

  SUBCASE("errors") {
    auto bad = data.sample(0);
    bad.label = 10;
    try {
      (void)poison_sample(bad, set, 1.0, NormKind::L2, 0);
      FAIL("expected ClassOutOfRange");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ClassOutOfRange);
    }
    auto gray = data.sample(0);
    gray.image.resize(1);
    try {
      (void)poison_sample(gray, set, 1.0, NormKind::L2, 0);
      FAIL("expected ChannelMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ChannelMismatch);
    }
    CHECK_THROWS_AS((void)poison_sample(data.sample(0), set, 0.0, NormKind::L2, 0), Error);
  }
}

TEST_CASE("select_poison_subset") {
  const auto none = select_poison_subset(100, 0.0, 1);
  CHECK(std::count(none.begin(), none.end(), true) == 0);
  const auto all = select_poison_subset(100, 1.0, 1);
  CHECK(std::count(all.begin(), all.end(), true) == 100);
  const auto most = select_poison_subset(50000, 0.95, 9);
  CHECK(std::count(most.begin(), most.end(), true) == 47500);
  CHECK(select_poison_subset(50000, 0.95, 9) == most);
  CHECK(select_poison_subset(50000, 0.95, 10) != most);
  CHECK_THROWS_AS((void)select_poison_subset(10, 1.5, 0), Error);
}

TEST_CASE("poison_dataset") {
  const auto& set = published_process_set();
  const auto data = toy::make(40, {32, 32, 3}, 10, 3);

  SUBCASE("fraction zero is the identity") {
    PoisonOptions opts;
    opts.fraction = 0.0;
    PoisonManifest m;
    const auto out = collect(data, set, opts, &m);
    REQUIRE(out.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
      for (int c = 0; c < 3; ++c) CHECK(out[i].image[c] == data.sample(i).image[c]);
      CHECK(!m.records[i].poisoned);
      CHECK(m.records[i].post_clamp_norm == 0.0);
    }
    CHECK(m.poisoned_count == 0);
  }

  SUBCASE("every poisoned image sits at the budget and keeps its label") {
    PoisonOptions opts;
    opts.master_seed = 12;
    opts.fraction = 0.5;
    PoisonManifest m;
    const auto out = collect(data, set, opts, &m);
    CHECK(m.poisoned_count == 20);
    CHECK(m.mode == "ar");
    for (std::size_t i = 0; i < 40; ++i) {
      const auto clean = data.sample(i);
      CHECK(out[i].label == clean.label);
      CHECK(out[i].index == i);
      const double n = tensor_norm(difference(out[i].image, clean.image), NormKind::L2);
      if (m.records[i].poisoned) {
        CHECK(std::abs(n - 1.0) <= 1e-6);
        CHECK(m.records[i].seed == sample_seed(12, i));
        const auto direct = poison_sample(clean, set, 1.0, NormKind::L2, sample_seed(12, i));
        for (int c = 0; c < 3; ++c) CHECK(direct.sample.image[c] == out[i].image[c]);
      } else {
        CHECK(n == 0.0);
      }
      CHECK(m.records[i].post_clamp_norm <= 1.0 + 1e-9);
    }
  }

  SUBCASE("output does not depend on the thread count") {
    PoisonOptions opts;
    opts.master_seed = 4;
    const auto a = collect(data, set, opts);
    opts.threads = 3;
    const auto b = collect(data, set, opts);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int c = 0; c < 3; ++c) CHECK(a[i].image[c] == b[i].image[c]);
    }
  }

  SUBCASE("channel mismatch is rejected up front") {
    const auto gray = toy::make(3, {32, 32, 1}, 10);
    CHECK_THROWS_AS((void)collect(gray, set, PoisonOptions{}), Error);
  }
}

TEST_CASE("regions_noise") {
  SUBCASE("p = 16 at side 32 is constant on 8 x 8 cells") {
    const auto t = regions_noise(16, 32, 3, 5);
    std::set<double> colours;
    for (const auto& plane : t) {
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          const auto cell = plane.block(8 * r, 8 * c, 8, 8);
          CHECK((cell.array() == cell(0, 0)).all());
          colours.insert(cell(0, 0));
        }
      }
    }
    CHECK(colours.size() == 48);
  }

  SUBCASE("p = 4 and p = 1") {
    const auto four = regions_noise(4, 32, 1, 1);
    CHECK(four[0](0, 0) != four[0](0, 16));
    CHECK(four[0](15, 15) == four[0](0, 0));
    const auto one = regions_noise(1, 32, 3, 1);
    for (const auto& plane : one) CHECK((plane.array() == plane(0, 0)).all());
  }

  SUBCASE("cell colours are raster-order draws") {
    const auto t = regions_noise(4, 8, 2, 9);
    GaussianStream rng(9);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        for (int ch = 0; ch < 2; ++ch) CHECK(t[ch](4 * r, 4 * c) == rng());
      }
    }
  }

  SUBCASE("errors") {
    try {
      (void)regions_noise(15, 32, 3, 0);
      FAIL("expected NonSquareP");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonSquareP);
    }
    try {
      (void)regions_noise(9, 32, 3, 0);
      FAIL("expected IndivisibleGrid");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IndivisibleGrid);
    }
  }
}

TEST_CASE("class-wise baselines") {
  const auto data = toy::make(30, {32, 32, 3}, 10, 6);

  SUBCASE("random noise: one perturbation per class") {
    const auto raw = random_noise_classwise(10, 32, 32, 3, 21);
    std::vector<Tensor<double>> deltas;
    for (const auto& t : raw) deltas.push_back(project_norm(t, 0.5, NormKind::L2).values);
    std::vector<DatasetSample> out;
    const auto m = poison_dataset_classwise(data, deltas, NormKind::L2, 1,
                                            [&](const DatasetSample& s) { out.push_back(s); });
    CHECK(m.poisoned_count == 30);
    for (std::size_t i = 0; i < 30; ++i) {
      const auto d = difference(out[i].image, data.sample(i).image);
      CHECK(std::abs(tensor_norm(d, NormKind::L2) - 0.5) <= 1e-9);
      CHECK(out[i].label == data.sample(i).label);
      // Same class as sample i % 10, different from sample i + 1.
      if (i >= 10) {
        const auto same = difference(out[i - 10].image, data.sample(i - 10).image);
        for (int c = 0; c < 3; ++c) CHECK(d[c].isApprox(same[c], 1e-12));
      }
      if (i + 1 < 30) {
        const auto other = difference(out[i + 1].image, data.sample(i + 1).image);
        CHECK(!d[0].isApprox(other[0], 1e-3));
      }
    }
  }

  SUBCASE("regions class-wise seeds") {
    const auto t = regions_noise_classwise(3, 16, 32, 3, 2);
    CHECK(t[1][0] == regions_noise(16, 32, 3, derive_seed(2, {1}))[0]);
    CHECK(t[0][0] != t[1][0]);
  }

  SUBCASE("labels beyond the class count are rejected") {
    const auto raw = random_noise_classwise(5, 32, 32, 3, 1);
    CHECK_THROWS_AS((void)poison_dataset_classwise(data, raw, NormKind::L2, 1, [](const DatasetSample&) {}),
                    Error);
  }
}
