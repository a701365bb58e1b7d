#include "arpoison/coefficient_file.hpp"

#include <cmath>

#include "arpoison/hashing.hpp"
#include "arpoison/manifest.hpp"
#include "json.hpp"

using nlohmann::json;

namespace arpoison {

std::string serialize_process_set(const ARProcessSet& set) {
  const int side = set.window_side();
  json classes = json::array();
  for (int k = 0; k < set.classes(); ++k) {
    json channels = json::array();
    for (int c = 0; c < set.channels(); ++c) {
      const Plane<double> block = set.process(k, c).kernel_layout(0.0);
      json rows = json::array();
      for (int r = 0; r < side; ++r) {
        json row = json::array();
        for (int col = 0; col < side; ++col) row.push_back(block(r, col));
        rows.push_back(std::move(row));
      }
      channels.push_back(std::move(rows));
    }
    classes.push_back(std::move(channels));
  }

  const auto& meta = set.metadata();
  json certificate = json::array();
  for (const auto& e : meta.certificate) {
    certificate.push_back({{"attempt", e.attempt},
                           {"probe_seed", e.probe_seed},
                           {"min_response", std::isinf(e.min_response) ? json(nullptr) : json(e.min_response)}});
  }
  json j;
  j["format"] = "arpoison-coefficients";
  j["version"] = 1;
  j["window_side"] = side;
  j["classes"] = set.classes();
  j["channels"] = set.channels();
  j["layout"] = "filter";
  j["metadata"] = {{"origin", meta.origin},
                   {"seed", meta.seed ? json(*meta.seed) : json(nullptr)},
                   {"threshold", meta.threshold ? json(*meta.threshold) : json(nullptr)},
                   {"probe_height", meta.probe_height},
                   {"probe_width", meta.probe_width},
                   {"stability_trials", meta.stability_trials},
                   {"stability_norm_bound", meta.stability_norm_bound},
                   {"attempts", meta.attempts},
                   {"certificate", std::move(certificate)}};
  j["coefficients"] = std::move(classes);
  return j.dump(1) + "\n";
}

ARProcessSet parse_process_set(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("coefficient file is not valid JSON: ") + e.what());
  }
  try {
    // A bare nested array (the published listing as printed) is accepted too.
    const json& blocks = j.is_array() ? j : j.at("coefficients");
    ProcessSetMetadata meta;
    meta.origin = "file";
    if (j.is_object() && j.contains("metadata")) {
      const auto& m = j.at("metadata");
      meta.origin = m.value("origin", std::string("file"));
      if (m.contains("seed") && !m.at("seed").is_null()) meta.seed = m.at("seed").get<std::uint64_t>();
      if (m.contains("threshold") && !m.at("threshold").is_null()) meta.threshold = m.at("threshold").get<double>();
      meta.probe_height = m.value("probe_height", Eigen::Index(36));
      meta.probe_width = m.value("probe_width", Eigen::Index(36));
      meta.stability_trials = m.value("stability_trials", 3);
      meta.stability_norm_bound = m.value("stability_norm_bound", 1e4);
      meta.attempts = m.value("attempts", std::uint64_t(0));
      for (const auto& e : m.value("certificate", json::array())) {
        CertificateEntry entry;
        entry.attempt = e.at("attempt").get<std::uint64_t>();
        entry.probe_seed = e.at("probe_seed").get<std::uint64_t>();
        if (!e.at("min_response").is_null()) entry.min_response = e.at("min_response").get<double>();
        meta.certificate.push_back(entry);
      }
    }
    if (j.is_object()) {
      require(j.value("layout", std::string("filter")) == "filter", ErrorKind::Format,
              "unsupported coefficient layout");
    }

    require(blocks.is_array() && !blocks.empty(), ErrorKind::Format, "no coefficient blocks");
    const int classes = static_cast<int>(blocks.size());
    const int channels = static_cast<int>(blocks.at(0).size());
    const double tolerance = meta.origin == "search" ? kSearchSumTolerance : kFixtureSumTolerance;
    std::vector<ARCoefficients<double>> processes;
    for (int k = 0; k < classes; ++k) {
      require(int(blocks.at(k).size()) == channels, ErrorKind::Format,
              "class " + std::to_string(k) + " has a different channel count");
      for (int c = 0; c < channels; ++c) {
        const auto& rows = blocks.at(k).at(c);
        const auto side = static_cast<Eigen::Index>(rows.size());
        Plane<double> block(side, side);
        for (Eigen::Index r = 0; r < side; ++r) {
          require(static_cast<Eigen::Index>(rows.at(r).size()) == side, ErrorKind::Format,
                  "coefficient block is not square");
          for (Eigen::Index col = 0; col < side; ++col) block(r, col) = rows.at(r).at(col).get<double>();
        }
        auto coeffs = ARCoefficients<double>::from_kernel_layout(block);
        require(std::abs(coeffs.sum() - 1.0) <= tolerance, ErrorKind::InvalidCoefficients,
                "block (" + std::to_string(k) + ", " + std::to_string(c) + ") sums to " +
                    std::to_string(coeffs.sum()) + ", not 1");
        processes.push_back(std::move(coeffs));
      }
    }
    if (j.is_object()) {
      require(j.value("classes", classes) == classes && j.value("channels", channels) == channels,
              ErrorKind::Format, "declared classes/channels disagree with the coefficient arrays");
      require(j.value("window_side", processes.front().window_side()) == processes.front().window_side(),
              ErrorKind::Format, "declared window side disagrees with the coefficient blocks");
    }
    require(meta.certificate.empty() || meta.certificate.size() == processes.size(), ErrorKind::Format,
            "certificate length does not match the process count");
    return ARProcessSet(classes, channels, std::move(processes), std::move(meta));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("malformed coefficient file: ") + e.what());
  }
}

void save_process_set(const ARProcessSet& set, const std::filesystem::path& path) {
  write_text_file(path, serialize_process_set(set));
}

ARProcessSet load_process_set(const std::filesystem::path& path) {
  return parse_process_set(read_text_file(path));
}

ARProcessSet resolve_process_set(const std::string& spec) {
  if (spec == "published") return published_process_set();
  return load_process_set(spec);
}

std::string process_set_hash(const ARProcessSet& set) { return sha256_hex(serialize_process_set(set)); }

}  // namespace arpoison
