#pragma once

// Dataset containers: CIFAR-10 binary batches, class-per-subdirectory PNG
// folders, and the float32 poison container written by this library.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "arpoison/ar_core.hpp"
#include "arpoison/image_io.hpp"

namespace arpoison {

struct DatasetSample {
  Tensor<double> image;  // channel-planar, values in [0, 1]
  int label = 0;
  std::size_t index = 0;
};

struct DatasetShape {
  Eigen::Index height = 0;
  Eigen::Index width = 0;
  int channels = 0;

  std::size_t values() const { return std::size_t(height) * std::size_t(width) * channels; }
  bool operator==(const DatasetShape&) const = default;
};

/// Random-access, thread-safe view of a labelled image dataset.
class DatasetSource {
 public:
  virtual ~DatasetSource() = default;

  virtual std::size_t size() const = 0;
  virtual DatasetShape shape() const = 0;
  virtual int label(std::size_t index) const = 0;
  virtual DatasetSample sample(std::size_t index) const = 0;

  virtual std::string kind() const = 0;
  virtual std::string path() const = 0;
  virtual std::string content_hash() const = 0;
  /// Relative path (without extension) an 8-bit export of sample i goes to.
  virtual std::string export_stem(std::size_t index) const = 0;
  /// Number of label values, i.e. max label + 1.
  int label_count() const;
};

inline constexpr std::size_t kCifarRecordBytes = 3073;

/// CIFAR-10 binary batches: records of 1 label byte then 3072 channel-planar
/// R, G, B bytes. `path` may be one file or a directory whose *.bin files are
/// read in lexicographic order.
class Cifar10BinarySource final : public DatasetSource {
 public:
  explicit Cifar10BinarySource(std::filesystem::path path);

  std::size_t size() const override { return count_; }
  DatasetShape shape() const override { return {32, 32, 3}; }
  int label(std::size_t index) const override;
  DatasetSample sample(std::size_t index) const override;
  std::string kind() const override { return "cifar10"; }
  std::string path() const override { return path_.string(); }
  std::string content_hash() const override { return hash_; }
  std::string export_stem(std::size_t index) const override;

 private:
  std::filesystem::path path_;
  std::vector<std::uint8_t> bytes_;
  std::size_t count_ = 0;
  std::string hash_;
};

/// root/<class>/<image>.png; classes are the sorted subdirectory names.
class ImageDirectorySource final : public DatasetSource {
 public:
  explicit ImageDirectorySource(std::filesystem::path root);

  std::size_t size() const override { return files_.size(); }
  DatasetShape shape() const override { return shape_; }
  int label(std::size_t index) const override { return labels_.at(index); }
  DatasetSample sample(std::size_t index) const override;
  std::string kind() const override { return "imagedir"; }
  std::string path() const override { return root_.string(); }
  std::string content_hash() const override { return hash_; }
  std::string export_stem(std::size_t index) const override;

  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> class_names_;
  std::vector<std::filesystem::path> files_;  // relative to root
  std::vector<int> labels_;
  DatasetShape shape_;
  std::string hash_;
};

struct ContainerHeader {
  std::uint64_t count = 0;
  DatasetShape shape;
};

/// Poison container directory: tensor.bin (magic "ARPT", version, n, H, W, C,
/// then n little-endian float32 samples in H x W x C order), labels.bin
/// (magic "ARPL", version, n, int32 labels) and usually manifest.json.
class ContainerSource final : public DatasetSource {
 public:
  explicit ContainerSource(std::filesystem::path directory);

  std::size_t size() const override { return header_.count; }
  DatasetShape shape() const override { return header_.shape; }
  int label(std::size_t index) const override { return labels_.at(index); }
  DatasetSample sample(std::size_t index) const override;
  std::string kind() const override { return "container"; }
  std::string path() const override { return directory_.string(); }
  std::string content_hash() const override { return hash_; }
  std::string export_stem(std::size_t index) const override;

 private:
  std::filesystem::path directory_;
  ContainerHeader header_;
  std::vector<int> labels_;
  mutable std::ifstream tensor_;
  mutable std::mutex tensor_guard_;
  std::string hash_;
};

inline constexpr const char* kTensorFile = "tensor.bin";
inline constexpr const char* kLabelsFile = "labels.bin";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr std::uint32_t kContainerVersion = 1;

/// Streams samples into a container directory in index order.
class ContainerWriter {
 public:
  ContainerWriter(const std::filesystem::path& directory, ContainerHeader header);
  ~ContainerWriter();
  ContainerWriter(const ContainerWriter&) = delete;
  ContainerWriter& operator=(const ContainerWriter&) = delete;

  void write(const DatasetSample& sample);
  /// Flushes both files and writes the label sidecar. Called by the
  /// destructor if not called explicitly, but errors are only reported here.
  void finish();

 private:
  std::filesystem::path directory_;
  ContainerHeader header_;
  std::ofstream tensor_;
  std::vector<std::int32_t> labels_;
  bool finished_ = false;
};

/// "cifar10", "imagedir" or "container".
std::unique_ptr<DatasetSource> open_dataset(const std::string& kind, const std::filesystem::path& path);

/// Encodes one sample as a CIFAR-10 record (rounded, clamped bytes).
std::array<std::uint8_t, kCifarRecordBytes> encode_cifar10(const DatasetSample& sample);

/// Rounds [0, 1] values to 8-bit RGB (lossy). Single-channel images are
/// replicated to gray RGB.
RgbImage to_rgb8(const Tensor<double>& image);

}  // namespace arpoison
