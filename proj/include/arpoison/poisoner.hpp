#pragma once

// Sample-wise AR poisoning and the class-wise baselines (Regions-p and
// Gaussian random noise). Every poisoned image is x' = clamp(x + delta, 0, 1)
// with the label left untouched.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "arpoison/dataset.hpp"
#include "arpoison/manifest.hpp"
#include "arpoison/process_set.hpp"

namespace arpoison {

struct PoisonStats {
  double pre_clamp_norm = 0.0;
  double post_clamp_norm = 0.0;
  std::size_t clamped = 0;
};

struct PoisonedSample {
  DatasetSample sample;
  PoisonStats stats;
};

/// Adds delta, clamps to [0, 1] and measures both norms under `norm`.
PoisonedSample apply_perturbation(const DatasetSample& sample, const Tensor<double>& delta, NormKind norm);

/// Unscaled AR noise for one sample: channel c of class `label` runs with
/// init seed derive_seed(seed, {c}).
Tensor<double> ar_sample_noise(const ARProcessSet& set, int label, Eigen::Index height,
                               Eigen::Index width, std::uint64_t seed, int extra_crop);

PoisonedSample poison_sample(const DatasetSample& sample, const ARProcessSet& set, double epsilon,
                             NormKind norm, std::uint64_t seed, int extra_crop = kDefaultExtraCrop);

/// Seed of sample `index` under `master_seed`.
std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t index);

/// Seeded uniform subset of round(fraction * n) indices, as a mask.
std::vector<bool> select_poison_subset(std::size_t n, double fraction, std::uint64_t master_seed);

using SampleSink = std::function<void(const DatasetSample&)>;

struct PoisonOptions {
  double epsilon = 1.0;
  NormKind norm = NormKind::L2;
  std::uint64_t master_seed = 0;
  double fraction = 1.0;
  int extra_crop = kDefaultExtraCrop;
  unsigned threads = 1;
};

/// Poisons a seeded subset of `source` sample-wise. Samples reach `sink` in
/// index order whatever the thread count. The returned manifest has every
/// field set except the coefficient file path and hash.
PoisonManifest poison_dataset(const DatasetSource& source, const ARProcessSet& set,
                              const PoisonOptions& options, const SampleSink& sink);

// ------------------------------------------------------------ baselines

/// sqrt(p) x sqrt(p) grid of uniform cells of side L / sqrt(p); cell colours
/// are i.i.d. standard normal C-vectors drawn in raster cell order.
Tensor<double> regions_noise(int p, Eigen::Index side, int channels, std::uint64_t seed);

/// One i.i.d. standard normal H x W x C tensor per class; class k is seeded
/// by derive_seed(seed, {k}).
std::vector<Tensor<double>> random_noise_classwise(int classes, Eigen::Index height,
                                                   Eigen::Index width, int channels,
                                                   std::uint64_t seed);

/// Regions-p noise per class, class k seeded by derive_seed(seed, {k}).
std::vector<Tensor<double>> regions_noise_classwise(int classes, int p, Eigen::Index side,
                                                    int channels, std::uint64_t seed);

/// Adds the (already projected) perturbation of each sample's class to every
/// sample of that class.
PoisonManifest poison_dataset_classwise(const DatasetSource& source,
                                        std::span<const Tensor<double>> class_perturbations,
                                        NormKind norm, unsigned threads, const SampleSink& sink);

}  // namespace arpoison
