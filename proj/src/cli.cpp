#include "arpoison/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "arpoison/coefficient_file.hpp"
#include "arpoison/hashing.hpp"
#include "arpoison/image_io.hpp"
#include "arpoison/parallel.hpp"
#include "arpoison/poisoner.hpp"
#include "arpoison/search.hpp"
#include "arpoison/verifier.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace arpoison::cli {
namespace {

unsigned default_threads() {
  if (const char* env = std::getenv("ARPOISON_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return resolve_threads(0);
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Format:
      return kIo;
    case ErrorKind::SearchExhausted:
      return kSearchExhausted;
    default:
      return kValidation;
  }
}

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch == '\n' ? ' ' : ch);
  }
  return out;
}

void report_error(std::ostream& err, std::string_view kind, int code, const std::string& message) {
  err << "arpoison: error kind=" << kind << " exit=" << code << " message=\"" << escape(message) << "\"\n";
}

struct Coefficients {
  ARProcessSet set;
  std::string path;
  std::string hash;
};

Coefficients load_coefficients(const std::string& spec) {
  ARProcessSet set = resolve_process_set(spec);
  std::string hash = process_set_hash(set);
  return {std::move(set), spec, std::move(hash)};
}

void check_hash(const std::string& what, const std::string& recorded, const std::string& actual) {
  require(recorded == actual, ErrorKind::InvalidArgument,
          what + " hash " + actual + " does not match the manifest (" + recorded + ")");
}

/// Sink writing to a container and, optionally, an 8-bit PNG mirror.
class ContainerSink {
 public:
  ContainerSink(const fs::path& out, ContainerHeader header, const DatasetSource* naming,
                const std::string& export_dir)
      : writer_(out, header), naming_(naming), export_dir_(export_dir) {}

  void operator()(const DatasetSample& s) {
    writer_.write(s);
    if (!export_dir_.empty()) {
      const fs::path target = fs::path(export_dir_) / (naming_->export_stem(s.index) + ".png");
      fs::create_directories(target.parent_path());
      write_png(target, to_rgb8(s.image));
    }
  }

  void finish() { writer_.finish(); }

 private:
  ContainerWriter writer_;
  const DatasetSource* naming_;
  std::string export_dir_;
};

// ----------------------------------------------------------------- jobs

struct ArPoisonJob {
  std::string dataset_kind;
  std::string input;
  std::string coeffs = "published";
  PoisonOptions options;
  std::string out;
  std::string export_dir;
  std::optional<std::string> expected_source_hash;
  std::optional<std::string> expected_coeff_hash;
};

PoisonManifest run_ar_poison(const ArPoisonJob& job) {
  const auto source = open_dataset(job.dataset_kind, job.input);
  if (job.expected_source_hash) check_hash("dataset", *job.expected_source_hash, source->content_hash());
  const Coefficients coeffs = load_coefficients(job.coeffs);
  if (job.expected_coeff_hash) check_hash("coefficient set", *job.expected_coeff_hash, coeffs.hash);

  ContainerSink sink(job.out, {source->size(), source->shape()}, source.get(), job.export_dir);
  PoisonManifest m = poison_dataset(*source, coeffs.set, job.options,
                                    [&](const DatasetSample& s) { sink(s); });
  sink.finish();
  m.coefficients_path = coeffs.path;
  m.coefficients_hash = coeffs.hash;
  save_manifest(m, fs::path(job.out) / kManifestFile);
  return m;
}

struct BaselineJob {
  std::string kind = "regions";
  int p = 16;
  std::string dataset_kind = "cifar10";
  std::string input;
  int classes = 0;
  DatasetShape shape{32, 32, 3};
  double epsilon = 1.0;
  NormKind norm = NormKind::L2;
  std::uint64_t seed = 0;
  std::string out;
  std::string export_dir;
  unsigned threads = 1;
  std::optional<std::string> expected_source_hash;
};

std::vector<Tensor<double>> baseline_perturbations(const BaselineJob& job, int classes, DatasetShape shape) {
  std::vector<Tensor<double>> raw;
  if (job.kind == "regions") {
    require(shape.height == shape.width, ErrorKind::InvalidArgument,
            "regions noise needs square images, got " + std::to_string(shape.height) + "x" +
                std::to_string(shape.width));
    raw = regions_noise_classwise(classes, job.p, shape.height, shape.channels, job.seed);
  } else if (job.kind == "random") {
    raw = random_noise_classwise(classes, shape.height, shape.width, shape.channels, job.seed);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown baseline kind '" + job.kind + "'");
  }
  std::vector<Tensor<double>> projected;
  for (auto& t : raw) projected.push_back(project_norm(std::move(t), job.epsilon, job.norm).values);
  return projected;
}

PoisonManifest run_baseline(const BaselineJob& job) {
  PoisonManifest m;
  if (!job.input.empty()) {
    const auto source = open_dataset(job.dataset_kind, job.input);
    if (job.expected_source_hash) check_hash("dataset", *job.expected_source_hash, source->content_hash());
    const int classes = job.classes > 0 ? job.classes : source->label_count();
    const auto deltas = baseline_perturbations(job, classes, source->shape());
    ContainerSink sink(job.out, {source->size(), source->shape()}, source.get(), job.export_dir);
    m = poison_dataset_classwise(*source, deltas, job.norm, job.threads,
                                 [&](const DatasetSample& s) { sink(s); });
    sink.finish();
  } else {
    // No dataset: emit the K class perturbations themselves, labelled by class.
    require(job.classes >= 1, ErrorKind::InvalidArgument, "--classes is required without --in");
    const auto deltas = baseline_perturbations(job, job.classes, job.shape);
    ContainerWriter writer(job.out, {std::uint64_t(job.classes), job.shape});
    m.tool_version = tool_version();
    m.source_kind = "none";
    m.shape = job.shape;
    m.count = deltas.size();
    m.classes = job.classes;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      writer.write({deltas[k], static_cast<int>(k), k});
      const double n = tensor_norm(deltas[k], job.norm);
      m.records.push_back({k, static_cast<int>(k), true, 0, n, n, 0});
    }
    m.poisoned_count = deltas.size();
    writer.finish();
  }
  m.mode = job.kind;
  m.epsilon = job.epsilon;
  m.norm = job.norm;
  m.master_seed = job.seed;
  if (job.kind == "regions") m.regions_p = job.p;
  save_manifest(m, fs::path(job.out) / kManifestFile);
  return m;
}

struct GenerateJob {
  std::string coeffs = "published";
  int cls = 0;
  std::size_t count = 1;
  Eigen::Index height = 32;
  Eigen::Index width = 32;
  double epsilon = 1.0;
  NormKind norm = NormKind::L2;
  std::uint64_t seed = 0;
  int extra_crop = kDefaultExtraCrop;
  std::string out;
  unsigned threads = 1;
  std::optional<std::string> expected_coeff_hash;
};

PoisonManifest run_generate(const GenerateJob& job) {
  const Coefficients coeffs = load_coefficients(job.coeffs);
  if (job.expected_coeff_hash) check_hash("coefficient set", *job.expected_coeff_hash, coeffs.hash);
  require(job.cls >= 0 && job.cls < coeffs.set.classes(), ErrorKind::ClassOutOfRange,
          "class " + std::to_string(job.cls) + " out of range [0, " +
              std::to_string(coeffs.set.classes()) + ")");
  require(job.count >= 1, ErrorKind::InvalidArgument, "--count must be >= 1");
  const DatasetShape shape{job.height, job.width, coeffs.set.channels()};

  std::vector<Tensor<double>> deltas(job.count);
  parallel_for(0, job.count, job.threads, [&](std::size_t i) {
    auto noise = ar_sample_noise(coeffs.set, job.cls, job.height, job.width, sample_seed(job.seed, i),
                                 job.extra_crop);
    deltas[i] = project_norm(std::move(noise), job.epsilon, job.norm).values;
  });

  PoisonManifest m;
  m.tool_version = tool_version();
  m.mode = "generate";
  m.source_kind = "none";
  m.shape = shape;
  m.count = job.count;
  m.coefficients_path = coeffs.path;
  m.coefficients_hash = coeffs.hash;
  m.epsilon = job.epsilon;
  m.norm = job.norm;
  m.master_seed = job.seed;
  m.extra_crop = job.extra_crop;
  m.classes = coeffs.set.classes();
  m.generated_class = job.cls;
  ContainerWriter writer(job.out, {job.count, shape});
  for (std::size_t i = 0; i < job.count; ++i) {
    writer.write({deltas[i], job.cls, i});
    const double n = tensor_norm(deltas[i], job.norm);
    m.records.push_back({i, job.cls, true, sample_seed(job.seed, i), n, n, 0});
  }
  writer.finish();
  m.poisoned_count = job.count;
  save_manifest(m, fs::path(job.out) / kManifestFile);
  return m;
}

// ------------------------------------------------------------- inspect

json summarize(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  double lo = values.front(), hi = values.front(), sum = 0.0;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  return {{"min", lo}, {"max", hi}, {"mean", sum / static_cast<double>(values.size())}};
}

RgbImage normalized_rgb(const Tensor<double>& delta) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : delta) {
    lo = std::min(lo, p.minCoeff());
    hi = std::max(hi, p.maxCoeff());
  }
  Tensor<double> scaled;
  for (const auto& p : delta) {
    if (hi - lo <= 0.0) {
      scaled.push_back(Plane<double>::Constant(p.rows(), p.cols(), 0.5));
    } else {
      scaled.push_back(((p.array() - lo) / (hi - lo)).matrix());
    }
  }
  return to_rgb8(scaled);
}

struct InspectJob {
  std::string container;
  std::string reference_kind = "cifar10";
  std::string reference;
  std::string dump_dir;
  std::size_t dump_count = 8;
};

json run_inspect(const InspectJob& job) {
  ContainerSource container(job.container);
  const auto shape = container.shape();
  json summary;
  summary["container"] = job.container;
  summary["count"] = container.size();
  summary["shape"] = {{"height", shape.height}, {"width", shape.width}, {"channels", shape.channels}};

  std::map<int, std::size_t> histogram;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < container.size(); ++i) {
    ++histogram[container.label(i)];
    const auto s = container.sample(i);
    for (const auto& p : s.image) {
      lo = std::min(lo, p.minCoeff());
      hi = std::max(hi, p.maxCoeff());
    }
  }
  json hist = json::object();
  for (const auto& [label, n] : histogram) hist[std::to_string(label)] = n;
  summary["label_histogram"] = hist;
  summary["value_range"] = container.size() ? json{{"min", lo}, {"max", hi}} : json(nullptr);

  const fs::path manifest_path = fs::path(job.container) / kManifestFile;
  if (fs::exists(manifest_path)) {
    const PoisonManifest m = load_manifest(manifest_path);
    std::vector<double> pre, post;
    std::size_t clamped = 0, clamped_samples = 0;
    for (const auto& r : m.records) {
      pre.push_back(r.pre_clamp_norm);
      post.push_back(r.post_clamp_norm);
      clamped += r.clamped;
      if (r.clamped > 0) ++clamped_samples;
    }
    summary["manifest"] = {{"mode", m.mode},
                           {"norm", to_string(m.norm)},
                           {"epsilon", m.epsilon},
                           {"poisoned_count", m.poisoned_count},
                           {"clamped_pixels", clamped},
                           {"clamped_samples", clamped_samples},
                           {"pre_clamp_norm", summarize(pre)},
                           {"post_clamp_norm", summarize(post)}};
  }

  std::unique_ptr<DatasetSource> reference;
  if (!job.reference.empty()) {
    reference = open_dataset(job.reference_kind, job.reference);
    require(reference->size() == container.size() && reference->shape() == shape, ErrorKind::InvalidArgument,
            "reference dataset does not match the container's count or shape");
    std::vector<double> l2, linf;
    for (std::size_t i = 0; i < container.size(); ++i) {
      const auto a = container.sample(i);
      const auto b = reference->sample(i);
      Tensor<double> delta;
      for (int c = 0; c < shape.channels; ++c) delta.push_back(a.image[c] - b.image[c]);
      l2.push_back(tensor_norm(delta, NormKind::L2));
      linf.push_back(tensor_norm(delta, NormKind::LInf));
    }
    summary["perturbation"] = {{"l2", summarize(l2)}, {"linf", summarize(linf)}};
  }

  if (!job.dump_dir.empty()) {
    fs::create_directories(job.dump_dir);
    const std::size_t n = std::min(job.dump_count, container.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = container.sample(i);
      const std::string stem = std::to_string(i);
      if (reference) {
        const auto clean = reference->sample(i);
        Tensor<double> delta;
        for (int c = 0; c < shape.channels; ++c) delta.push_back(s.image[c] - clean.image[c]);
        write_png(fs::path(job.dump_dir) / (stem + "_clean.png"), to_rgb8(clean.image));
        write_png(fs::path(job.dump_dir) / (stem + "_perturbation.png"), normalized_rgb(delta));
        write_png(fs::path(job.dump_dir) / (stem + "_poisoned.png"), to_rgb8(s.image));
      } else {
        // Without a reference the stored values are shown min-max normalized.
        write_png(fs::path(job.dump_dir) / (stem + ".png"), normalized_rgb(s.image));
      }
    }
    summary["dumped"] = n;
  }
  return summary;
}

json report_json(const SeparabilityReport& r) {
  json confusion = json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) row.push_back(r.confusion(i, j));
    confusion.push_back(std::move(row));
  }
  json per_class = json::array();
  for (Eigen::Index k = 0; k < r.confusion.rows(); ++k) {
    const double correct = r.confusion(k, k);
    per_class.push_back({{"class", k},
                         {"accuracy", correct / r.per_class},
                         {"min_gap", r.min_gap(k)},
                         {"mean_gap", r.mean_gap(k)}});
  }
  return {{"channel", r.channel},
          {"accuracy", r.accuracy},
          {"max_matching_logit_error", r.max_matching_logit_error},
          {"per_class", std::move(per_class)},
          {"confusion", std::move(confusion)}};
}

std::string format_accuracy(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", a);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"AR perturbation toolkit: search, generate, verify and apply autoregressive poisons"};
  app.name("arpoison");
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: $ARPOISON_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  // search
  SearchConfig search;
  std::string search_out;
  bool quiet = false;
  Eigen::Index probe_size = 36;
  auto* cmd_search = app.add_subcommand("search", "Random search for diverse stable AR processes");
  cmd_search->add_option("--classes", search.num_classes, "Number of classes K")->capture_default_str();
  cmd_search->add_option("--channels", search.channels, "Channels C per class")->capture_default_str();
  cmd_search->add_option("--window", search.window_side, "Sliding window side V")->capture_default_str();
  cmd_search->add_option("--threshold", search.threshold, "Minimum response threshold T")->capture_default_str();
  cmd_search->add_option("--seed", search.master_seed, "Master seed")->capture_default_str();
  cmd_search->add_option("--max-attempts", search.max_attempts, "Candidate budget")->capture_default_str();
  cmd_search->add_option("--stability-trials", search.stability_trials, "Gaussian starts per stability check")
      ->capture_default_str();
  cmd_search->add_option("--stability-bound", search.stability_norm_bound, "Largest stable probe l2 norm")
      ->capture_default_str();
  cmd_search->add_option("--probe-size", probe_size, "Side of the square probe grid")->capture_default_str();
  cmd_search->add_option("--out", search_out, "Output coefficient file")->required();
  cmd_search->add_flag("--quiet", quiet, "Suppress progress lines on stderr");

  // generate
  GenerateJob gen;
  std::string gen_norm = "l2";
  auto* cmd_generate = app.add_subcommand("generate", "Generate scaled AR perturbations for one class");
  cmd_generate->add_option("--coeffs", gen.coeffs, "Coefficient file or 'published'")->capture_default_str();
  cmd_generate->add_option("--class", gen.cls, "Class whose processes are used")->required();
  cmd_generate->add_option("--count", gen.count, "Number of perturbations")->capture_default_str();
  cmd_generate->add_option("--height", gen.height, "Output height")->capture_default_str();
  cmd_generate->add_option("--width", gen.width, "Output width")->capture_default_str();
  cmd_generate->add_option("--epsilon", gen.epsilon, "Perturbation size")->capture_default_str();
  cmd_generate->add_option("--norm", gen_norm, "l2 or linf")->capture_default_str();
  cmd_generate->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  cmd_generate->add_option("--extra-crop", gen.extra_crop, "Rows/columns cropped beyond the init band")
      ->capture_default_str();
  cmd_generate->add_option("--out", gen.out, "Output container directory")->required();

  // verify
  std::string verify_coeffs = "published";
  SeparabilityOptions verify;
  int verify_channel = -1;
  Eigen::Index verify_size = 32;
  std::string verify_report;
  auto* cmd_verify = app.add_subcommand("verify", "Classify fresh AR noise with the hand-specified CNN");
  cmd_verify->add_option("--coeffs", verify_coeffs, "Coefficient file or 'published'")->capture_default_str();
  cmd_verify->add_option("--per-class", verify.per_class, "Samples per class")->capture_default_str();
  cmd_verify->add_option("--size", verify_size, "Side of the (cropped) square samples")->capture_default_str();
  cmd_verify->add_option("--channel", verify_channel, "Channel to audit (default: every channel)");
  cmd_verify->add_option("--seed", verify.seed, "Master seed")->capture_default_str();
  cmd_verify->add_option("--extra-crop", verify.extra_crop, "Rows/columns cropped beyond the init band")
      ->capture_default_str();
  cmd_verify->add_option("--report", verify_report, "Write the JSON audit report here");

  // poison
  ArPoisonJob poison;
  std::string poison_norm = "l2";
  auto* cmd_poison = app.add_subcommand("poison", "Apply sample-wise AR poison to a dataset");
  cmd_poison->add_option("--dataset-kind", poison.dataset_kind, "cifar10, imagedir or container")->required();
  cmd_poison->add_option("--in", poison.input, "Input dataset path")->required();
  cmd_poison->add_option("--out", poison.out, "Output container directory")->required();
  cmd_poison->add_option("--coeffs", poison.coeffs, "Coefficient file or 'published'")->capture_default_str();
  cmd_poison->add_option("--epsilon", poison.options.epsilon, "Perturbation size")->capture_default_str();
  cmd_poison->add_option("--norm", poison_norm, "l2 or linf")->capture_default_str();
  cmd_poison->add_option("--fraction", poison.options.fraction, "Fraction of samples poisoned")
      ->capture_default_str();
  cmd_poison->add_option("--seed", poison.options.master_seed, "Master seed")->capture_default_str();
  cmd_poison->add_option("--extra-crop", poison.options.extra_crop, "Rows/columns cropped beyond the init band")
      ->capture_default_str();
  cmd_poison->add_option("--export-8bit", poison.export_dir, "Also write lossy 8-bit PNGs here");

  // replay
  std::string replay_manifest, replay_out, replay_in, replay_coeffs, replay_export;
  auto* cmd_replay = app.add_subcommand("replay", "Regenerate a container from its manifest");
  cmd_replay->add_option("--manifest", replay_manifest, "Manifest file")->required();
  cmd_replay->add_option("--out", replay_out, "Output directory (default: the manifest's directory)");
  cmd_replay->add_option("--in", replay_in, "Override the recorded dataset path");
  cmd_replay->add_option("--coeffs", replay_coeffs, "Override the recorded coefficient path");
  cmd_replay->add_option("--export-8bit", replay_export, "Also write lossy 8-bit PNGs here");

  // baseline
  BaselineJob base;
  std::string base_norm = "l2";
  Eigen::Index base_height = 32, base_width = 32;
  int base_channels = 3;
  auto* cmd_baseline = app.add_subcommand("baseline", "Class-wise Regions-p or Gaussian noise poison");
  cmd_baseline->add_option("--kind", base.kind, "regions or random")
      ->required()
      ->check(CLI::IsMember({"regions", "random"}));
  cmd_baseline->add_option("--p", base.p, "Number of regions (perfect square)")->capture_default_str();
  cmd_baseline->add_option("--dataset-kind", base.dataset_kind, "cifar10, imagedir or container")
      ->capture_default_str();
  cmd_baseline->add_option("--in", base.input, "Input dataset (omit to emit the class perturbations)");
  cmd_baseline->add_option("--out", base.out, "Output container directory")->required();
  cmd_baseline->add_option("--classes", base.classes, "Classes (default: from dataset labels)");
  cmd_baseline->add_option("--height", base_height, "Height without --in")->capture_default_str();
  cmd_baseline->add_option("--width", base_width, "Width without --in")->capture_default_str();
  cmd_baseline->add_option("--channels", base_channels, "Channels without --in")->capture_default_str();
  cmd_baseline->add_option("--epsilon", base.epsilon, "Perturbation size")->capture_default_str();
  cmd_baseline->add_option("--norm", base_norm, "l2 or linf")->capture_default_str();
  cmd_baseline->add_option("--seed", base.seed, "Master seed")->capture_default_str();
  cmd_baseline->add_option("--export-8bit", base.export_dir, "Also write lossy 8-bit PNGs here");

  // inspect
  InspectJob inspect;
  auto* cmd_inspect = app.add_subcommand("inspect", "Summarize a poison container");
  cmd_inspect->add_option("--container", inspect.container, "Container directory")->required();
  cmd_inspect->add_option("--reference", inspect.reference, "Clean dataset to diff against");
  cmd_inspect->add_option("--reference-kind", inspect.reference_kind, "cifar10, imagedir or container")
      ->capture_default_str();
  cmd_inspect->add_option("--dump-dir", inspect.dump_dir, "Write PNG visualizations here");
  cmd_inspect->add_option("--dump-count", inspect.dump_count, "Samples to visualize")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "Usage", kValidation, e.what());
    return kValidation;
  }

  try {
    if (cmd_search->parsed()) {
      search.probe_height = search.probe_width = probe_size;
      search.threads = threads;
      const auto started = std::chrono::steady_clock::now();
      auto progress = [&](const SearchProgress& p) {
        if (quiet) return;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        err << "search: attempts=" << p.attempts << " stable=" << p.stable << " accepted=" << p.accepted << "/"
            << p.target << " elapsed=" << secs << "s\n";
      };
      const ARProcessSet set = find_coefficients(search, progress);
      save_process_set(set, search_out);
      out << "wrote " << set.size() << " processes (" << set.classes() << " classes x " << set.channels()
          << " channels) after " << set.metadata().attempts << " attempts to " << search_out << "\n";
    } else if (cmd_generate->parsed()) {
      gen.norm = parse_norm_kind(gen_norm);
      gen.threads = threads;
      const auto m = run_generate(gen);
      out << "wrote " << m.count << " perturbations to " << gen.out << "\n";
    } else if (cmd_verify->parsed()) {
      const Coefficients coeffs = load_coefficients(verify_coeffs);
      verify.height = verify.width = verify_size;
      verify.threads = threads;
      std::vector<int> channels;
      if (verify_channel >= 0) {
        channels.push_back(verify_channel);
      } else {
        for (int c = 0; c < coeffs.set.channels(); ++c) channels.push_back(c);
      }
      json report;
      report["coefficients"] = {{"path", coeffs.path}, {"sha256", coeffs.hash}};
      report["classes"] = coeffs.set.classes();
      report["per_class"] = verify.per_class;
      report["height"] = verify.height;
      report["width"] = verify.width;
      report["seed"] = verify.seed;
      report["extra_crop"] = verify.extra_crop;
      report["channels"] = json::array();
      double worst = 1.0;
      for (int c : channels) {
        verify.channel = c;
        const auto r = verify_separability(coeffs.set, verify);
        worst = std::min(worst, r.accuracy);
        report["channels"].push_back(report_json(r));
        out << "channel " << c << ": accuracy " << format_accuracy(r.accuracy) << "\n";
      }
      report["min_accuracy"] = worst;
      if (!verify_report.empty()) write_text_file(verify_report, report.dump(1) + "\n");
    } else if (cmd_poison->parsed()) {
      poison.options.norm = parse_norm_kind(poison_norm);
      poison.options.threads = threads;
      const auto m = run_ar_poison(poison);
      out << "poisoned " << m.poisoned_count << " of " << m.count << " samples into " << poison.out << "\n";
    } else if (cmd_replay->parsed()) {
      const PoisonManifest m = load_manifest(replay_manifest);
      const std::string target =
          replay_out.empty() ? fs::path(replay_manifest).parent_path().string() : replay_out;
      if (m.mode == "ar") {
        ArPoisonJob job;
        job.dataset_kind = m.source_kind;
        job.input = replay_in.empty() ? m.source_path : replay_in;
        job.coeffs = replay_coeffs.empty() ? m.coefficients_path : replay_coeffs;
        job.options = {m.epsilon, m.norm, m.master_seed, m.poison_fraction, m.extra_crop, threads};
        job.out = target;
        job.export_dir = replay_export;
        job.expected_source_hash = m.source_hash;
        job.expected_coeff_hash = m.coefficients_hash;
        run_ar_poison(job);
      } else if (m.mode == "regions" || m.mode == "random") {
        BaselineJob job;
        job.kind = m.mode;
        job.p = m.regions_p.value_or(16);
        job.dataset_kind = m.source_kind;
        job.input = m.source_kind == "none" ? "" : (replay_in.empty() ? m.source_path : replay_in);
        job.classes = m.classes.value_or(0);
        job.shape = m.shape;
        job.epsilon = m.epsilon;
        job.norm = m.norm;
        job.seed = m.master_seed;
        job.out = target;
        job.export_dir = replay_export;
        job.threads = threads;
        if (!job.input.empty()) job.expected_source_hash = m.source_hash;
        run_baseline(job);
      } else if (m.mode == "generate") {
        GenerateJob job;
        job.coeffs = replay_coeffs.empty() ? m.coefficients_path : replay_coeffs;
        job.cls = m.generated_class.value_or(0);
        job.count = m.count;
        job.height = m.shape.height;
        job.width = m.shape.width;
        job.epsilon = m.epsilon;
        job.norm = m.norm;
        job.seed = m.master_seed;
        job.extra_crop = m.extra_crop;
        job.out = target;
        job.threads = threads;
        job.expected_coeff_hash = m.coefficients_hash;
        run_generate(job);
      } else {
        throw Error(ErrorKind::Format, "manifest has unknown mode '" + m.mode + "'");
      }
      out << "replayed " << m.mode << " manifest into " << target << "\n";
    } else if (cmd_baseline->parsed()) {
      base.norm = parse_norm_kind(base_norm);
      base.shape = {base_height, base_width, base_channels};
      base.threads = threads;
      const auto m = run_baseline(base);
      out << "wrote " << m.count << " class-wise " << base.kind << " samples to " << base.out << "\n";
    } else if (cmd_inspect->parsed()) {
      out << run_inspect(inspect).dump(1) << "\n";
    }
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    report_error(err, to_string(e.kind()), code, e.what());
    return code;
  } catch (const fs::filesystem_error& e) {
    report_error(err, "Io", kIo, e.what());
    return kIo;
  } catch (const std::exception& e) {
    report_error(err, "Internal", kInternal, e.what());
    return kInternal;
  }
  return kOk;
}

}  // namespace arpoison::cli
