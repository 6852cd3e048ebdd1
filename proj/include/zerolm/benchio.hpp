#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zerolm/alphaopt.hpp"
#include "zerolm/archspace.hpp"
#include "zerolm/capacity.hpp"

namespace zerolm {

/// An architecture with its measured performance metrics.
struct BenchmarkRecord {
  ArchitectureSpec arch;
  std::map<std::string, double> metrics;

  friend bool operator==(const BenchmarkRecord &, const BenchmarkRecord &) = default;
};

/// Lowercases a metric name; throws ValidationError unless the result is an
/// identifier of [a-z0-9_] starting with a letter.
std::string normalize_metric_name(std::string_view name);

/// Line-delimited benchmark file, one record per line.
/// Every architecture is validated against `space`; duplicate ids are
/// rejected. An empty file yields no records and a warning.
std::vector<BenchmarkRecord> load_benchmark(const std::filesystem::path &path, const SearchSpace &space,
                                            std::vector<std::string> *warnings = nullptr);
std::vector<BenchmarkRecord> parse_benchmark(std::string_view text, const SearchSpace &space,
                                             const std::string &source,
                                             std::vector<std::string> *warnings = nullptr);

/// Canonical text of a benchmark file.
std::string benchmark_to_text(std::string_view space_name, std::span<const BenchmarkRecord> records);
void save_benchmark(const std::filesystem::path &path, std::string_view space_name,
                    std::span<const BenchmarkRecord> records);

enum class ProxyKind { zerolm, params, log_complexity, attn_only, ffn_only };

struct ProxySpec {
  ProxyKind kind = ProxyKind::zerolm;
  double alpha = 0.5; // zerolm only

  /// "zerolm(0.3)", "params", ...
  std::string name() const;
  /// Accepts the names above; a bare "zerolm" takes `default_alpha`.
  static ProxySpec parse(std::string_view text, double default_alpha = 0.5);
};

struct ProxyOptions {
  bool include_other_params = false;
  unsigned workers = 1;
};

/// Proxy value of one architecture.
double proxy_score(const Scorer &scorer, const ArchitectureSpec &arch, const ProxySpec &proxy,
                   const ProxyOptions &options = {});

struct CorrelationReport {
  std::string proxy_name;
  std::string metric_name;
  double spr = 0.0;
  double kt = 0.0;
  std::size_t n = 0;
  double mean_score_time = 0.0; // seconds per architecture
  std::optional<double> alpha;
  std::string init_policy;
  std::string tau_variant;
};

struct ScatterPoint {
  std::string id;
  double metric = 0.0;
  double score = 0.0;
  double metric_rank = 0.0;
  double proxy_rank = 0.0;
};

struct Evaluation {
  CorrelationReport report;
  std::vector<ScatterPoint> scatter; // input record order
};

/// Metric values of `records`. Throws ValidationError naming the available
/// metrics when one is missing.
std::vector<double> metric_values(std::span<const BenchmarkRecord> records, std::string_view metric);

/// Scores every record with `proxy` and correlates with `metric`.
Evaluation evaluate_proxy(std::span<const BenchmarkRecord> records, const ProxySpec &proxy,
                          std::string_view metric, const Scorer &scorer, const ProxyOptions &options = {});

std::string report_csv_header();
std::string report_csv_row(const CorrelationReport &report);
nlohmann::json to_json(const CorrelationReport &report);

/// `n` distinct architectures with metric "synthetic" equal to the
/// standardized alpha-combination of block scores plus N(0, noise_sigma)
/// noise. Throws SetupError if the space has fewer than `n` architectures
/// reachable by sampling.
std::vector<BenchmarkRecord> synth_benchmark(const Scorer &scorer, std::size_t n, double true_alpha,
                                             double noise_sigma, std::uint64_t seed,
                                             unsigned workers = 1);

inline constexpr std::string_view kSyntheticMetric = "synthetic";

/// `k` records drawn without replacement (all records, shuffled, when k >= n).
std::vector<BenchmarkRecord> sample_records(std::span<const BenchmarkRecord> records, std::size_t k,
                                            std::uint64_t seed);

/// Grid search for alpha maximizing Kendall tau on the given records.
AlphaResult tune_alpha_sampling(std::span<const BenchmarkRecord> records, std::string_view metric,
                                const Scorer &scorer, const AlphaGrid &grid = {},
                                unsigned workers = 1);

/// Pairwise taus between attention-only scores, FFN-only scores and #params
/// of at least 10 architectures. Uses no ground truth.
HeuristicInputs heuristic_inputs(std::span<const ArchitectureSpec> archs, const Scorer &scorer,
                                 const ProxyOptions &options = {});
HeuristicInputs heuristic_inputs_from_sample(std::span<const BenchmarkRecord> records,
                                             const Scorer &scorer, const ProxyOptions &options = {});

} // namespace zerolm
