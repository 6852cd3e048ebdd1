#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zerolm/archspace.hpp"

namespace zerolm {

using Matrix = Eigen::MatrixXd;

enum class InitDistribution { gaussian_const_std, gaussian_fan_in };

std::string_view to_string(InitDistribution d);
InitDistribution init_distribution_from_string(std::string_view text);

/// How random weights are drawn for scoring. Entries are i.i.d. Gaussian with
/// a fixed standard deviation or with 1/sqrt(cols).
struct WeightInitPolicy {
  InitDistribution distribution = InitDistribution::gaussian_const_std;
  double std = 0.02;
  std::uint64_t seed = 0;

  /// Throws ValidationError unless std > 0.
  void validate() const;
  double stddev_for(const ModuleShape &shape) const;
  /// e.g. "gaussian_const_std(std=0.02,seed=0)"
  std::string describe() const;
};

/// Per-layer and total attention/FFN capacity of one architecture.
struct BlockScores {
  std::vector<double> per_layer_attn;
  std::vector<double> per_layer_ffn;
  double total_attn = 0.0;
  double total_ffn = 0.0;
};

/// Mean squared singular value, computed as ||W||_F^2 / min(rows, cols).
/// Throws ValidationError for an empty matrix.
double module_capacity(const Eigen::Ref<const Matrix> &matrix);

/// Mean of the squared singular values, computed by explicit SVD. A slow
/// cross-check for module_capacity. Throws NumericalError if the SVD fails.
double module_capacity_svd(const Eigen::Ref<const Matrix> &matrix);

/// Weights of one module. The stream is keyed by (policy.seed, module_index)
/// and filled column-major, so results do not depend on evaluation order.
Matrix generate_weight(const ModuleShape &shape, const WeightInitPolicy &policy,
                       std::uint64_t module_index);

/// module_capacity(generate_weight(...)) without materializing the matrix.
/// Draws the identical stream; only the summation order differs.
double sampled_capacity(const ModuleShape &shape, const WeightInitPolicy &policy,
                        std::uint64_t module_index);

/// Closed-form E[module_capacity] = rows * cols * std^2 / min(rows, cols).
double expected_capacity(const ModuleShape &shape, const WeightInitPolicy &policy);

/// alpha * total_attn + (1 - alpha) * total_ffn.
double combine(const BlockScores &blocks, double alpha);

/// Sum of log Frobenius norms. Throws DegenerateInputError on a zero norm.
double log_complexity(std::span<const Matrix> matrices);

enum class ScoreMode {
  sampled,  // realized random weights (default)
  expected, // analytic expectation; an extension, never the default
};

/// Key of one precomputed module score.
struct ModuleKey {
  std::uint64_t slot = 0;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  Block block = Block::attention;

  friend auto operator<=>(const ModuleKey &, const ModuleKey &) = default;
  static ModuleKey of(const ModuleShape &s) { return {s.slot, s.rows, s.cols, s.block}; }
};

/// Capacity score per distinct (slot, shape, block) a space can produce.
class LookupTable {
public:
  LookupTable(std::map<ModuleKey, double> entries, std::string policy)
      : entries_(std::move(entries)), policy_(std::move(policy)) {}

  std::optional<double> find(const ModuleShape &shape) const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<ModuleKey, double> &entries() const noexcept { return entries_; }
  const std::string &policy() const noexcept { return policy_; }

private:
  std::map<ModuleKey, double> entries_;
  std::string policy_;
};

/// Distinct scored module keys of the space, in key order. Throws
/// UnsupportedSpaceError for heterogeneous spaces or when the key count
/// exceeds `max_entries`.
std::vector<ModuleKey> plan_lookup_table(const SearchSpace &space, std::size_t max_entries = 1'000'000);

LookupTable build_lookup_table(const SearchSpace &space, const WeightInitPolicy &policy,
                               ScoreMode mode = ScoreMode::sampled, unsigned workers = 1,
                               std::size_t max_entries = 1'000'000);

/// Scores architectures of one space under one init policy. Thread-safe for
/// concurrent scoring once configured; the space must outlive the scorer.
class Scorer {
public:
  using WeightSource = std::function<Matrix(const ModuleShape &, std::uint64_t module_index)>;

  Scorer(const SearchSpace &space, WeightInitPolicy policy, ScoreMode mode = ScoreMode::sampled);
  Scorer(const Scorer &other);

  const SearchSpace &space() const noexcept { return *space_; }
  const WeightInitPolicy &policy() const noexcept { return policy_; }
  ScoreMode mode() const noexcept { return mode_; }

  /// Scoring consults the table first. The table must have been built with
  /// the same policy and mode.
  void use_lookup_table(std::shared_ptr<const LookupTable> table);
  const std::shared_ptr<const LookupTable> &lookup_table() const noexcept { return table_; }

  /// Replaces the random weights (tests use constant matrices).
  void set_weight_source(WeightSource source);

  double module_score(const ModuleShape &shape) const;
  BlockScores score_blocks(const ArchitectureSpec &arch) const;
  double log_complexity(const ArchitectureSpec &arch) const;

  /// Number of module weight draws performed so far.
  std::uint64_t weight_generations() const noexcept { return generations_.load(); }

  /// Descriptor recorded in reports: policy plus mode.
  std::string describe() const;

private:
  const SearchSpace *space_;
  WeightInitPolicy policy_;
  ScoreMode mode_;
  std::shared_ptr<const LookupTable> table_;
  WeightSource source_;
  mutable std::atomic<std::uint64_t> generations_{0};
};

/// Convenience wrappers over a default-configured Scorer.
BlockScores score_blocks(const SearchSpace &space, const ArchitectureSpec &arch,
                         const WeightInitPolicy &policy);
double log_complexity(const SearchSpace &space, const ArchitectureSpec &arch,
                      const WeightInitPolicy &policy);

} // namespace zerolm
