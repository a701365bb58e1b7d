#include "arpoison/manifest.hpp"

#include <fstream>
#include <iterator>

#include "json.hpp"

using nlohmann::json;

namespace arpoison {

std::string tool_version() { return ARPOISON_VERSION; }

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  j[key] = value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string serialize_manifest(const PoisonManifest& m) {
  json j;
  j["format"] = "arpoison-manifest";
  j["tool_version"] = m.tool_version;
  j["mode"] = m.mode;
  j["source"] = {{"kind", m.source_kind},
                 {"path", m.source_path},
                 {"sha256", m.source_hash},
                 {"count", m.count},
                 {"height", m.shape.height},
                 {"width", m.shape.width},
                 {"channels", m.shape.channels}};
  j["coefficients"] = {{"path", m.coefficients_path}, {"sha256", m.coefficients_hash}};
  j["epsilon"] = m.epsilon;
  j["norm"] = to_string(m.norm);
  j["master_seed"] = m.master_seed;
  j["extra_crop"] = m.extra_crop;
  j["poison_fraction"] = m.poison_fraction;
  put_optional(j, "regions_p", m.regions_p);
  put_optional(j, "classes", m.classes);
  put_optional(j, "generated_class", m.generated_class);
  j["poisoned_count"] = m.poisoned_count;
  json records = json::array();
  for (const auto& r : m.records) {
    records.push_back({{"index", r.index},
                       {"label", r.label},
                       {"poisoned", r.poisoned},
                       {"seed", r.seed},
                       {"pre_clamp_norm", r.pre_clamp_norm},
                       {"post_clamp_norm", r.post_clamp_norm},
                       {"clamped", r.clamped}});
  }
  j["records"] = std::move(records);
  return j.dump(1) + "\n";
}

PoisonManifest parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    require(j.value("format", "") == "arpoison-manifest", ErrorKind::Format, "not a poison manifest");
    PoisonManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.mode = j.at("mode").get<std::string>();
    const auto& src = j.at("source");
    m.source_kind = src.at("kind").get<std::string>();
    m.source_path = src.at("path").get<std::string>();
    m.source_hash = src.at("sha256").get<std::string>();
    m.count = src.at("count").get<std::size_t>();
    m.shape = {src.at("height").get<Eigen::Index>(), src.at("width").get<Eigen::Index>(),
               src.at("channels").get<int>()};
    m.coefficients_path = j.at("coefficients").at("path").get<std::string>();
    m.coefficients_hash = j.at("coefficients").at("sha256").get<std::string>();
    m.epsilon = j.at("epsilon").get<double>();
    m.norm = parse_norm_kind(j.at("norm").get<std::string>());
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.extra_crop = j.at("extra_crop").get<int>();
    m.poison_fraction = j.at("poison_fraction").get<double>();
    m.regions_p = get_optional<int>(j, "regions_p");
    m.classes = get_optional<int>(j, "classes");
    m.generated_class = get_optional<int>(j, "generated_class");
    m.poisoned_count = j.at("poisoned_count").get<std::size_t>();
    for (const auto& r : j.at("records")) {
      m.records.push_back({r.at("index").get<std::size_t>(), r.at("label").get<int>(),
                           r.at("poisoned").get<bool>(), r.at("seed").get<std::uint64_t>(),
                           r.at("pre_clamp_norm").get<double>(), r.at("post_clamp_norm").get<double>(),
                           r.at("clamped").get<std::size_t>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("malformed manifest: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(bool(out), ErrorKind::Io, "cannot create " + path.string());
  out << text;
  out.close();
  require(!out.fail(), ErrorKind::Io, "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_manifest(const PoisonManifest& manifest, const std::filesystem::path& path) {
  write_text_file(path, serialize_manifest(manifest));
}

PoisonManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path));
}

}  // namespace arpoison
