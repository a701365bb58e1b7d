#include "arpoison/search.hpp"

#include <cmath>
#include <limits>

#include "arpoison/filters.hpp"
#include "arpoison/parallel.hpp"

namespace arpoison {

void SearchConfig::validate() const {
  require(num_classes >= 1, ErrorKind::InvalidArgument, "classes must be >= 1");
  require(channels >= 1, ErrorKind::InvalidArgument, "channels must be >= 1");
  require(window_side >= 2, ErrorKind::InvalidArgument, "window side must be >= 2");
  require(std::isfinite(threshold) && threshold >= 0.0, ErrorKind::InvalidArgument,
          "threshold must be finite and >= 0");
  require(stability_trials >= 1, ErrorKind::InvalidArgument, "stability trials must be >= 1");
  require(stability_norm_bound > 0.0, ErrorKind::InvalidArgument, "stability bound must be > 0");
  require(probe_height >= window_side && probe_width >= window_side, ErrorKind::DimensionTooSmall,
          "probe grid must be at least one window");
  require(max_attempts > 0, ErrorKind::InvalidArgument, "max attempts must be > 0");
}

std::optional<Plane<double>> stable_probe(const ARCoefficients<double>& coeffs, int trials,
                                          double bound, std::uint64_t seed, Eigen::Index height,
                                          Eigen::Index width) {
  require(trials >= 1, ErrorKind::InvalidArgument, "stability trials must be >= 1");
  std::optional<Plane<double>> first;
  for (int t = 0; t < trials; ++t) {
    auto plane = ar_generate(coeffs, height, width, derive_seed(seed, {std::uint64_t(t)}));
    const double norm = plane.values.norm();
    if (!std::isfinite(norm) || norm > bound) return std::nullopt;
    if (t == 0) first = std::move(plane.values);
  }
  return first;
}

bool is_stable(const ARCoefficients<double>& coeffs, int trials, double bound, std::uint64_t seed,
               Eigen::Index height, Eigen::Index width) {
  return stable_probe(coeffs, trials, bound, seed, height, width).has_value();
}

Candidate draw_candidate(const SearchConfig& config, std::uint64_t attempt) {
  Candidate out;
  out.probe_seed = derive_seed(config.master_seed, {attempt, 1});
  GaussianStream draw(derive_seed(config.master_seed, {attempt, 0}));
  Eigen::VectorXd raw(config.window_side * config.window_side - 1);
  for (auto& x : raw) x = draw();
  try {
    out.coeffs = normalize_coefficients(raw, config.window_side);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ZeroSumCoefficients) throw;
  }
  return out;
}

namespace {

struct Evaluated {
  std::optional<ARCoefficients<double>> coeffs;
  std::uint64_t probe_seed = 0;
  std::optional<Plane<double>> probe;
};

Evaluated evaluate(const SearchConfig& config, std::uint64_t attempt) {
  Candidate c = draw_candidate(config, attempt);
  Evaluated e{std::move(c.coeffs), c.probe_seed, std::nullopt};
  if (e.coeffs) {
    e.probe = stable_probe(*e.coeffs, config.stability_trials, config.stability_norm_bound,
                           e.probe_seed, config.probe_height, config.probe_width);
  }
  return e;
}

}  // namespace

ARProcessSet find_coefficients(const SearchConfig& config,
                               const std::function<void(const SearchProgress&)>& progress) {
  config.validate();
  const std::size_t target = std::size_t(config.num_classes) * std::size_t(config.channels);
  const unsigned threads = std::max(1u, config.threads);
  const std::uint64_t batch = threads == 1 ? 1 : 4 * threads;
  constexpr std::uint64_t kProgressEvery = 10'000;

  std::vector<ARCoefficients<double>> accepted;
  std::vector<ARFilter<double>> filters;
  std::vector<CertificateEntry> certificate;
  SearchProgress status;
  status.target = target;

  std::vector<Evaluated> pending;
  std::uint64_t attempt = 0;
  while (accepted.size() < target && attempt < config.max_attempts) {
    const std::uint64_t n = std::min(batch, config.max_attempts - attempt);
    pending.assign(n, Evaluated{});
    parallel_for(0, n, threads, [&](std::size_t k) { pending[k] = evaluate(config, attempt + k); });

    for (std::uint64_t k = 0; k < n && accepted.size() < target; ++k) {
      const std::uint64_t this_attempt = attempt + k;
      status.attempts = this_attempt + 1;
      if (progress && status.attempts % kProgressEvery == 0) progress(status);
      auto& cand = pending[k];
      if (!cand.probe) continue;
      ++status.stable;

      double min_response = std::numeric_limits<double>::infinity();
      for (const auto& f : filters) {
        min_response = std::min(min_response, conv_response(*cand.probe, f));
        if (min_response < config.threshold) break;
      }
      if (min_response < config.threshold) continue;

      filters.push_back(ar_filter(*cand.coeffs, accepted.size()));
      accepted.push_back(std::move(*cand.coeffs));
      certificate.push_back({this_attempt, cand.probe_seed, min_response});
      status.accepted = accepted.size();
    }
    attempt += n;
  }
  if (progress) progress(status);

  if (accepted.size() < target) {
    throw Error(ErrorKind::SearchExhausted,
                "search exhausted " + std::to_string(config.max_attempts) + " attempts with " +
                    std::to_string(accepted.size()) + "/" + std::to_string(target) +
                    " processes accepted at threshold " + std::to_string(config.threshold));
  }

  ProcessSetMetadata meta;
  meta.origin = "search";
  meta.seed = config.master_seed;
  meta.threshold = config.threshold;
  meta.probe_height = config.probe_height;
  meta.probe_width = config.probe_width;
  meta.stability_trials = config.stability_trials;
  meta.stability_norm_bound = config.stability_norm_bound;
  meta.attempts = status.attempts;
  meta.certificate = std::move(certificate);
  return ARProcessSet(config.num_classes, config.channels, std::move(accepted), std::move(meta));
}

Eigen::MatrixXd certificate_responses(const ARProcessSet& set) {
  const auto& meta = set.metadata();
  require(meta.certificate.size() == set.size(), ErrorKind::InvalidArgument,
          "process set carries no diversity certificate");
  const auto n = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 1; i < n; ++i) {
    // The probe is trial 0 of the stability check.
    const auto probe = ar_generate(set.flat()[i], meta.probe_height, meta.probe_width,
                                   derive_seed(meta.certificate[i].probe_seed, {0}));
    for (Eigen::Index j = 0; j < i; ++j) {
      out(i, j) = conv_response(probe.values, ar_filter(set.flat()[j]));
    }
  }
  return out;
}

}  // namespace arpoison
