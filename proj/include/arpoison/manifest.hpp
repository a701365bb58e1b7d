#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "arpoison/ar_core.hpp"
#include "arpoison/dataset.hpp"

namespace arpoison {

std::string tool_version();

struct SampleRecord {
  std::size_t index = 0;
  int label = 0;
  bool poisoned = false;
  std::uint64_t seed = 0;
  double pre_clamp_norm = 0.0;
  double post_clamp_norm = 0.0;
  std::size_t clamped = 0;
};

/// Provenance for a poisoned container: everything needed to regenerate it.
struct PoisonManifest {
  std::string tool_version;
  /// "ar" (sample-wise AR), "regions", "random" or "generate".
  std::string mode = "ar";

  std::string source_kind;
  std::string source_path;
  std::string source_hash;
  DatasetShape shape;
  std::size_t count = 0;

  std::string coefficients_path;
  std::string coefficients_hash;

  double epsilon = 1.0;
  NormKind norm = NormKind::L2;
  std::uint64_t master_seed = 0;
  int extra_crop = kDefaultExtraCrop;
  double poison_fraction = 1.0;
  /// Regions baseline patch count.
  std::optional<int> regions_p;
  /// Class count used by class-wise baselines and generate.
  std::optional<int> classes;
  /// generate: the class whose processes were used.
  std::optional<int> generated_class;

  std::size_t poisoned_count = 0;
  std::vector<SampleRecord> records;
};

std::string serialize_manifest(const PoisonManifest& manifest);
PoisonManifest parse_manifest(const std::string& text);

void save_manifest(const PoisonManifest& manifest, const std::filesystem::path& path);
PoisonManifest load_manifest(const std::filesystem::path& path);

/// Writes text to a file, replacing it.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace arpoison
