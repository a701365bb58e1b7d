#include "arpoison/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iterator>

#include "arpoison/hashing.hpp"

namespace fs = std::filesystem;

namespace arpoison {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

constexpr char kTensorMagic[4] = {'A', 'R', 'P', 'T'};
constexpr char kLabelMagic[4] = {'A', 'R', 'P', 'L'};
constexpr std::size_t kTensorHeaderBytes = 4 + 4 + 8 + 4 + 4 + 4;
constexpr std::size_t kLabelHeaderBytes = 4 + 4 + 8;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const fs::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  require(bool(in), ErrorKind::Format, "truncated header in " + path.string());
  return value;
}

std::vector<std::uint8_t> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double byte_to_unit(std::uint8_t b) { return static_cast<double>(b) / 255.0; }

std::uint8_t unit_to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string zero_padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

int DatasetSource::label_count() const {
  int top = -1;
  for (std::size_t i = 0; i < size(); ++i) top = std::max(top, label(i));
  return top + 1;
}

// ---------------------------------------------------------------- CIFAR-10

Cifar10BinarySource::Cifar10BinarySource(fs::path path) : path_(std::move(path)) {
  std::vector<fs::path> files;
  if (fs::is_directory(path_)) {
    for (const auto& entry : fs::directory_iterator(path_)) {
      if (entry.is_regular_file() && entry.path().extension() == ".bin") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    require(!files.empty(), ErrorKind::Io, "no .bin batches in " + path_.string());
  } else {
    require(fs::exists(path_), ErrorKind::Io, "no such file " + path_.string());
    files.push_back(path_);
  }
  Sha256 hash;
  for (const auto& f : files) {
    auto chunk = read_all(f);
    require(chunk.size() % kCifarRecordBytes == 0, ErrorKind::Format,
            f.string() + " is not a whole number of 3073-byte CIFAR-10 records");
    hash.update(chunk);
    bytes_.insert(bytes_.end(), chunk.begin(), chunk.end());
  }
  count_ = bytes_.size() / kCifarRecordBytes;
  hash_ = hash.hex_digest();
}

int Cifar10BinarySource::label(std::size_t index) const {
  require(index < count_, ErrorKind::InvalidArgument, "sample index out of range");
  return bytes_[index * kCifarRecordBytes];
}

DatasetSample Cifar10BinarySource::sample(std::size_t index) const {
  require(index < count_, ErrorKind::InvalidArgument, "sample index out of range");
  const std::uint8_t* record = bytes_.data() + index * kCifarRecordBytes;
  DatasetSample out;
  out.label = record[0];
  out.index = index;
  for (int c = 0; c < 3; ++c) {
    Plane<double> plane(32, 32);
    for (Eigen::Index i = 0; i < 32 * 32; ++i) plane.data()[i] = byte_to_unit(record[1 + c * 1024 + i]);
    out.image.push_back(std::move(plane));
  }
  return out;
}

std::string Cifar10BinarySource::export_stem(std::size_t index) const {
  return std::to_string(label(index)) + "/" + zero_padded(index, 6);
}

std::array<std::uint8_t, kCifarRecordBytes> encode_cifar10(const DatasetSample& sample) {
  require(sample.image.size() == 3 && sample.image[0].rows() == 32 && sample.image[0].cols() == 32,
          ErrorKind::InvalidArgument, "CIFAR-10 records hold 32x32x3 images");
  require(sample.label >= 0 && sample.label < 256, ErrorKind::InvalidArgument,
          "CIFAR-10 labels must fit in one byte");
  std::array<std::uint8_t, kCifarRecordBytes> record{};
  record[0] = static_cast<std::uint8_t>(sample.label);
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index i = 0; i < 1024; ++i) record[1 + c * 1024 + i] = unit_to_byte(sample.image[c].data()[i]);
  }
  return record;
}

// ---------------------------------------------------------- image folders

ImageDirectorySource::ImageDirectorySource(fs::path root) : root_(std::move(root)) {
  require(fs::is_directory(root_), ErrorKind::Io, root_.string() + " is not a directory");
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory()) class_names_.push_back(entry.path().filename().string());
  }
  std::sort(class_names_.begin(), class_names_.end());
  require(!class_names_.empty(), ErrorKind::Format, "no class subdirectories in " + root_.string());

  for (std::size_t k = 0; k < class_names_.size(); ++k) {
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(root_ / class_names_[k])) {
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (entry.is_regular_file() && ext == ".png") images.push_back(fs::path(class_names_[k]) / entry.path().filename());
    }
    std::sort(images.begin(), images.end());
    for (auto& img : images) {
      files_.push_back(std::move(img));
      labels_.push_back(static_cast<int>(k));
    }
  }
  require(!files_.empty(), ErrorKind::Format, "no PNG images under " + root_.string());

  Sha256 hash;
  for (std::size_t i = 0; i < files_.size(); ++i) {
    const auto bytes = read_all(root_ / files_[i]);
    const std::string rel = files_[i].generic_string();
    hash.update(rel).update(std::string_view("\0", 1)).update(bytes);
    if (i == 0) {
      const RgbImage first = read_png(root_ / files_[i]);
      shape_ = {first.height, first.width, 3};
    }
  }
  hash_ = hash.hex_digest();
}

DatasetSample ImageDirectorySource::sample(std::size_t index) const {
  require(index < files_.size(), ErrorKind::InvalidArgument, "sample index out of range");
  const RgbImage img = read_png(root_ / files_[index]);
  require(img.height == shape_.height && img.width == shape_.width, ErrorKind::Format,
          (root_ / files_[index]).string() + " differs in size from the first image");
  DatasetSample out;
  out.label = labels_[index];
  out.index = index;
  for (int c = 0; c < 3; ++c) {
    Plane<double> plane(img.height, img.width);
    for (Eigen::Index i = 0; i < plane.size(); ++i) plane.data()[i] = byte_to_unit(img.pixels[3 * i + c]);
    out.image.push_back(std::move(plane));
  }
  return out;
}

std::string ImageDirectorySource::export_stem(std::size_t index) const {
  fs::path p = files_.at(index);
  return p.replace_extension().generic_string();
}

// --------------------------------------------------------------- container

ContainerSource::ContainerSource(fs::path directory) : directory_(std::move(directory)) {
  const fs::path tensor_path = directory_ / kTensorFile;
  const fs::path label_path = directory_ / kLabelsFile;
  tensor_.open(tensor_path, std::ios::binary);
  require(bool(tensor_), ErrorKind::Io, "cannot open " + tensor_path.string());
  char magic[4];
  tensor_.read(magic, 4);
  require(bool(tensor_) && std::memcmp(magic, kTensorMagic, 4) == 0, ErrorKind::Format,
          tensor_path.string() + " is not an AR poison tensor file");
  require(get<std::uint32_t>(tensor_, tensor_path) == kContainerVersion, ErrorKind::Format,
          "unsupported tensor file version");
  header_.count = get<std::uint64_t>(tensor_, tensor_path);
  header_.shape.height = get<std::uint32_t>(tensor_, tensor_path);
  header_.shape.width = get<std::uint32_t>(tensor_, tensor_path);
  header_.shape.channels = static_cast<int>(get<std::uint32_t>(tensor_, tensor_path));
  const auto expected = kTensorHeaderBytes + header_.count * header_.shape.values() * sizeof(float);
  require(fs::file_size(tensor_path) == expected, ErrorKind::Format,
          tensor_path.string() + " size does not match its header");

  std::ifstream labels(label_path, std::ios::binary);
  require(bool(labels), ErrorKind::Io, "cannot open " + label_path.string());
  labels.read(magic, 4);
  require(bool(labels) && std::memcmp(magic, kLabelMagic, 4) == 0, ErrorKind::Format,
          label_path.string() + " is not an AR poison label file");
  require(get<std::uint32_t>(labels, label_path) == kContainerVersion, ErrorKind::Format,
          "unsupported label file version");
  require(get<std::uint64_t>(labels, label_path) == header_.count, ErrorKind::Format,
          "label count does not match tensor count");
  labels_.resize(header_.count);
  for (auto& l : labels_) l = get<std::int32_t>(labels, label_path);

  hash_ = Sha256().update(sha256_file(tensor_path)).update(sha256_file(label_path)).hex_digest();
}

DatasetSample ContainerSource::sample(std::size_t index) const {
  require(index < header_.count, ErrorKind::InvalidArgument, "sample index out of range");
  const auto& s = header_.shape;
  std::vector<float> buffer(s.values());
  {
    std::lock_guard lock(tensor_guard_);
    tensor_.seekg(static_cast<std::streamoff>(kTensorHeaderBytes + index * s.values() * sizeof(float)));
    tensor_.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    require(bool(tensor_), ErrorKind::Io, "short read from " + directory_.string());
  }
  DatasetSample out;
  out.label = labels_[index];
  out.index = index;
  for (int c = 0; c < s.channels; ++c) {
    Plane<double> plane(s.height, s.width);
    for (Eigen::Index i = 0; i < plane.size(); ++i) plane.data()[i] = buffer[i * s.channels + c];
    out.image.push_back(std::move(plane));
  }
  return out;
}

std::string ContainerSource::export_stem(std::size_t index) const {
  return std::to_string(label(index)) + "/" + zero_padded(index, 6);
}

ContainerWriter::ContainerWriter(const fs::path& directory, ContainerHeader header)
    : directory_(directory), header_(header) {
  fs::create_directories(directory_);
  tensor_.open(directory_ / kTensorFile, std::ios::binary | std::ios::trunc);
  require(bool(tensor_), ErrorKind::Io, "cannot create " + (directory_ / kTensorFile).string());
  tensor_.write(kTensorMagic, 4);
  put<std::uint32_t>(tensor_, kContainerVersion);
  put<std::uint64_t>(tensor_, header_.count);
  put<std::uint32_t>(tensor_, static_cast<std::uint32_t>(header_.shape.height));
  put<std::uint32_t>(tensor_, static_cast<std::uint32_t>(header_.shape.width));
  put<std::uint32_t>(tensor_, static_cast<std::uint32_t>(header_.shape.channels));
  labels_.reserve(header_.count);
}

ContainerWriter::~ContainerWriter() {
  try {
    if (!finished_) finish();
  } catch (...) {
  }
}

void ContainerWriter::write(const DatasetSample& sample) {
  const auto& s = header_.shape;
  require(labels_.size() < header_.count, ErrorKind::InvalidArgument, "container is already full");
  require(sample.index == labels_.size(), ErrorKind::InvalidArgument,
          "samples must be written in index order");
  require(sample.image.size() == std::size_t(s.channels), ErrorKind::ChannelMismatch,
          "sample channel count does not match the container");
  std::vector<float> buffer(s.values());
  for (int c = 0; c < s.channels; ++c) {
    const auto& plane = sample.image[c];
    require(plane.rows() == s.height && plane.cols() == s.width, ErrorKind::InvalidArgument,
            "sample size does not match the container");
    for (Eigen::Index i = 0; i < plane.size(); ++i) buffer[i * s.channels + c] = static_cast<float>(plane.data()[i]);
  }
  tensor_.write(reinterpret_cast<const char*>(buffer.data()),
                static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  labels_.push_back(sample.label);
}

void ContainerWriter::finish() {
  if (finished_) return;
  finished_ = true;
  require(labels_.size() == header_.count, ErrorKind::InvalidArgument,
          "container closed after " + std::to_string(labels_.size()) + " of " +
              std::to_string(header_.count) + " samples");
  tensor_.close();
  require(!tensor_.fail(), ErrorKind::Io, "failed writing " + (directory_ / kTensorFile).string());
  std::ofstream labels(directory_ / kLabelsFile, std::ios::binary | std::ios::trunc);
  labels.write(kLabelMagic, 4);
  put<std::uint32_t>(labels, kContainerVersion);
  put<std::uint64_t>(labels, header_.count);
  for (auto l : labels_) put<std::int32_t>(labels, l);
  labels.close();
  require(!labels.fail(), ErrorKind::Io, "failed writing " + (directory_ / kLabelsFile).string());
}

std::unique_ptr<DatasetSource> open_dataset(const std::string& kind, const fs::path& path) {
  if (kind == "cifar10") return std::make_unique<Cifar10BinarySource>(path);
  if (kind == "imagedir") return std::make_unique<ImageDirectorySource>(path);
  if (kind == "container") return std::make_unique<ContainerSource>(path);
  throw Error(ErrorKind::InvalidArgument,
              "unknown dataset kind '" + kind + "' (expected cifar10, imagedir or container)");
}

RgbImage to_rgb8(const Tensor<double>& image) {
  require(image.size() == 1 || image.size() == 3, ErrorKind::ChannelMismatch,
          "8-bit export needs 1 or 3 channels");
  RgbImage out;
  out.height = static_cast<int>(image[0].rows());
  out.width = static_cast<int>(image[0].cols());
  out.pixels.resize(std::size_t(out.height) * out.width * 3);
  for (Eigen::Index i = 0; i < image[0].size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const auto& plane = image[image.size() == 1 ? 0 : c];
      out.pixels[3 * i + c] = unit_to_byte(plane.data()[i]);
    }
  }
  return out;
}

}  // namespace arpoison
