#include "arpoison/poisoner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arpoison/parallel.hpp"

namespace arpoison {
namespace {

constexpr std::size_t kChunk = 512;

void check_source(const DatasetSource& source) {
  const auto shape = source.shape();
  require(shape.height > 0 && shape.width > 0 && shape.channels > 0, ErrorKind::Format,
          "dataset has an empty shape");
}

PoisonManifest base_manifest(const DatasetSource& source) {
  PoisonManifest m;
  m.tool_version = tool_version();
  m.source_kind = source.kind();
  m.source_path = source.path();
  m.source_hash = source.content_hash();
  m.shape = source.shape();
  m.count = source.size();
  m.records.reserve(source.size());
  return m;
}

/// Computes results chunk by chunk in parallel and hands them to `emit` in
/// index order.
template <typename Compute, typename Emit>
void chunked(std::size_t n, unsigned threads, Compute&& compute, Emit&& emit) {
  std::vector<PoisonedSample> results;
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t end = std::min(n, begin + kChunk);
    results.assign(end - begin, PoisonedSample{});
    parallel_for(begin, end, threads, [&](std::size_t i) {
      try {
        results[i - begin] = compute(i);
      } catch (const Error& e) {
        throw Error(e.kind(), "sample " + std::to_string(i) + ": " + e.what());
      }
    });
    for (std::size_t i = begin; i < end; ++i) emit(i, results[i - begin]);
  }
}

}  // namespace

PoisonedSample apply_perturbation(const DatasetSample& sample, const Tensor<double>& delta, NormKind norm) {
  require(delta.size() == sample.image.size(), ErrorKind::ChannelMismatch,
          "perturbation has " + std::to_string(delta.size()) + " channels, image has " +
              std::to_string(sample.image.size()));
  PoisonedSample out;
  out.sample.label = sample.label;
  out.sample.index = sample.index;
  Tensor<double> applied;
  for (std::size_t c = 0; c < delta.size(); ++c) {
    const auto& x = sample.image[c];
    require(delta[c].rows() == x.rows() && delta[c].cols() == x.cols(), ErrorKind::InvalidArgument,
            "perturbation and image sizes differ");
    Plane<double> shifted = x + delta[c];
    out.stats.clamped += static_cast<std::size_t>(((shifted.array() < 0.0) || (shifted.array() > 1.0)).count());
    Plane<double> clamped = shifted.cwiseMax(0.0).cwiseMin(1.0);
    applied.push_back(clamped - x);
    out.sample.image.push_back(std::move(clamped));
  }
  out.stats.pre_clamp_norm = tensor_norm(delta, norm);
  out.stats.post_clamp_norm = tensor_norm(applied, norm);
  return out;
}

Tensor<double> ar_sample_noise(const ARProcessSet& set, int label, Eigen::Index height,
                               Eigen::Index width, std::uint64_t seed, int extra_crop) {
  return generate_channels(set.class_processes(label), height, width, extra_crop, seed);
}

PoisonedSample poison_sample(const DatasetSample& sample, const ARProcessSet& set, double epsilon,
                             NormKind norm, std::uint64_t seed, int extra_crop) {
  require(sample.label >= 0 && sample.label < set.classes(), ErrorKind::ClassOutOfRange,
          "label " + std::to_string(sample.label) + " has no AR processes (set has " +
              std::to_string(set.classes()) + " classes)");
  require(sample.image.size() == std::size_t(set.channels()), ErrorKind::ChannelMismatch,
          "image has " + std::to_string(sample.image.size()) + " channels, process set has " +
              std::to_string(set.channels()));
  require(!sample.image.empty(), ErrorKind::ChannelMismatch, "image has no channels");
  auto noise = ar_sample_noise(set, sample.label, sample.image[0].rows(), sample.image[0].cols(),
                               seed, extra_crop);
  const auto delta = project_norm(std::move(noise), epsilon, norm);
  return apply_perturbation(sample, delta.values, norm);
}

std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, {std::uint64_t(index)});
}

std::vector<bool> select_poison_subset(std::size_t n, double fraction, std::uint64_t master_seed) {
  require(fraction >= 0.0 && fraction <= 1.0, ErrorKind::InvalidArgument,
          "poison fraction must lie in [0, 1]");
  const auto chosen = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<bool> mask(n, false);
  if (chosen == n) {
    mask.assign(n, true);
    return mask;
  }
  // Partial Fisher-Yates on a dedicated stream.
  GaussianStream rng(derive_seed(master_seed, {~std::uint64_t(0), 0}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t(0));
  for (std::size_t i = 0; i < chosen; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
    mask[order[i]] = true;
  }
  return mask;
}

PoisonManifest poison_dataset(const DatasetSource& source, const ARProcessSet& set,
                              const PoisonOptions& options, const SampleSink& sink) {
  check_source(source);
  require(options.epsilon > 0.0 && std::isfinite(options.epsilon), ErrorKind::InvalidArgument,
          "epsilon must be positive");
  require(options.extra_crop >= 0, ErrorKind::InvalidArgument, "extra crop must be >= 0");
  require(source.shape().channels == set.channels(), ErrorKind::ChannelMismatch,
          "dataset has " + std::to_string(source.shape().channels) + " channels, process set has " +
              std::to_string(set.channels()));

  PoisonManifest m = base_manifest(source);
  m.mode = "ar";
  m.epsilon = options.epsilon;
  m.norm = options.norm;
  m.master_seed = options.master_seed;
  m.extra_crop = options.extra_crop;
  m.poison_fraction = options.fraction;

  const std::vector<bool> mask = select_poison_subset(source.size(), options.fraction, options.master_seed);
  chunked(
      source.size(), options.threads,
      [&](std::size_t i) {
        DatasetSample clean = source.sample(i);
        if (!mask[i]) return PoisonedSample{std::move(clean), {}};
        return poison_sample(clean, set, options.epsilon, options.norm,
                             sample_seed(options.master_seed, i), options.extra_crop);
      },
      [&](std::size_t i, const PoisonedSample& r) {
        m.records.push_back({i, r.sample.label, bool(mask[i]), mask[i] ? sample_seed(options.master_seed, i) : 0,
                             r.stats.pre_clamp_norm, r.stats.post_clamp_norm, r.stats.clamped});
        if (mask[i]) ++m.poisoned_count;
        sink(r.sample);
      });
  return m;
}

PoisonManifest poison_dataset_classwise(const DatasetSource& source,
                                        std::span<const Tensor<double>> class_perturbations,
                                        NormKind norm, unsigned threads, const SampleSink& sink) {
  check_source(source);
  PoisonManifest m = base_manifest(source);
  m.norm = norm;
  m.classes = static_cast<int>(class_perturbations.size());
  chunked(
      source.size(), threads,
      [&](std::size_t i) {
        const DatasetSample clean = source.sample(i);
        require(clean.label >= 0 && std::size_t(clean.label) < class_perturbations.size(),
                ErrorKind::ClassOutOfRange,
                "label " + std::to_string(clean.label) + " has no class-wise perturbation");
        return apply_perturbation(clean, class_perturbations[clean.label], norm);
      },
      [&](std::size_t i, const PoisonedSample& r) {
        m.records.push_back({i, r.sample.label, true, 0, r.stats.pre_clamp_norm,
                             r.stats.post_clamp_norm, r.stats.clamped});
        ++m.poisoned_count;
        sink(r.sample);
      });
  return m;
}

}  // namespace arpoison
