#include "zerolm/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "zerolm/error.hpp"
#include "zerolm/rng.hpp"

namespace zerolm {

namespace {

// Column-major Gaussian stream of one module.
class WeightStream {
public:
  WeightStream(const WeightInitPolicy &policy, const ModuleShape &shape, std::uint64_t module_index)
      : engine_(stream_seed(policy.seed, module_index)), stddev_(policy.stddev_for(shape)) {}

  double next() { return stddev_ * normal_(engine_); }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double stddev_;
};

} // namespace

std::string_view to_string(InitDistribution d) {
  return d == InitDistribution::gaussian_fan_in ? "gaussian_fan_in" : "gaussian_const_std";
}

InitDistribution init_distribution_from_string(std::string_view text) {
  if (text == "gaussian_const_std")
    return InitDistribution::gaussian_const_std;
  if (text == "gaussian_fan_in")
    return InitDistribution::gaussian_fan_in;
  throw ValidationError("init", "unknown init distribution '" + std::string(text) +
                                    "' (known: gaussian_const_std, gaussian_fan_in)");
}

void WeightInitPolicy::validate() const {
  if (!(std > 0.0) || !std::isfinite(std))
    throw ValidationError("init.std", "must be a positive finite number");
}

double WeightInitPolicy::stddev_for(const ModuleShape &shape) const {
  if (distribution == InitDistribution::gaussian_fan_in)
    return 1.0 / std::sqrt(static_cast<double>(shape.cols));
  return std;
}

std::string WeightInitPolicy::describe() const {
  std::ostringstream os;
  os << to_string(distribution);
  if (distribution == InitDistribution::gaussian_const_std)
    os << "(std=" << std << ",seed=" << seed << ")";
  else
    os << "(seed=" << seed << ")";
  return os.str();
}

double module_capacity(const Eigen::Ref<const Matrix> &matrix) {
  if (matrix.size() == 0)
    throw ValidationError("matrix", "module capacity of an empty matrix is undefined");
  return matrix.squaredNorm() / static_cast<double>(std::min(matrix.rows(), matrix.cols()));
}

double module_capacity_svd(const Eigen::Ref<const Matrix> &matrix) {
  if (matrix.size() == 0)
    throw ValidationError("matrix", "module capacity of an empty matrix is undefined");
  Eigen::BDCSVD<Matrix> svd(matrix);
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite())
    throw NumericalError("SVD did not converge for a " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + " matrix");
  const auto &sv = svd.singularValues();
  return sv.squaredNorm() / static_cast<double>(sv.size());
}

Matrix generate_weight(const ModuleShape &shape, const WeightInitPolicy &policy,
                       std::uint64_t module_index) {
  policy.validate();
  Matrix m(shape.rows, shape.cols);
  WeightStream stream(policy, shape, module_index);
  double *data = m.data();
  for (Eigen::Index k = 0; k < m.size(); ++k)
    data[k] = stream.next();
  return m;
}

double sampled_capacity(const ModuleShape &shape, const WeightInitPolicy &policy,
                        std::uint64_t module_index) {
  policy.validate();
  WeightStream stream(policy, shape, module_index);
  const std::uint64_t n = shape.size();
  constexpr std::uint64_t kChunk = 4096;
  double total = 0.0;
  for (std::uint64_t done = 0; done < n;) {
    const std::uint64_t end = std::min(n, done + kChunk);
    double partial = 0.0;
    for (; done < end; ++done) {
      const double w = stream.next();
      partial += w * w;
    }
    total += partial;
  }
  return total / static_cast<double>(std::min(shape.rows, shape.cols));
}

double expected_capacity(const ModuleShape &shape, const WeightInitPolicy &policy) {
  const double sd = policy.stddev_for(shape);
  return static_cast<double>(shape.rows) * static_cast<double>(shape.cols) * sd * sd /
         static_cast<double>(std::min(shape.rows, shape.cols));
}

double combine(const BlockScores &blocks, double alpha) {
  return alpha * blocks.total_attn + (1.0 - alpha) * blocks.total_ffn;
}

double log_complexity(std::span<const Matrix> matrices) {
  double total = 0.0;
  for (const auto &m : matrices) {
    const double sq = m.squaredNorm();
    if (!(sq > 0.0))
      throw DegenerateInputError("log complexity undefined for a zero-norm " +
                                 std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                 " matrix");
    total += 0.5 * std::log(sq);
  }
  return total;
}

// ---------------------------------------------------------------------------

std::optional<double> LookupTable::find(const ModuleShape &shape) const {
  if (auto it = entries_.find(ModuleKey::of(shape)); it != entries_.end())
    return it->second;
  return std::nullopt;
}

Scorer::Scorer(const SearchSpace &space, WeightInitPolicy policy, ScoreMode mode)
    : space_(&space), policy_(policy), mode_(mode) {
  policy_.validate();
}

Scorer::Scorer(const Scorer &other)
    : space_(other.space_), policy_(other.policy_), mode_(other.mode_), table_(other.table_),
      source_(other.source_) {}

void Scorer::use_lookup_table(std::shared_ptr<const LookupTable> table) {
  if (table && table->policy() != describe())
    throw ValidationError("lookup table", "built for '" + table->policy() + "', scorer uses '" +
                                              describe() + "'");
  table_ = std::move(table);
}

void Scorer::set_weight_source(WeightSource source) { source_ = std::move(source); }

std::string Scorer::describe() const {
  return policy_.describe() + (mode_ == ScoreMode::expected ? "+expected" : "");
}

double Scorer::module_score(const ModuleShape &shape) const {
  if (source_) {
    generations_.fetch_add(1, std::memory_order_relaxed);
    return module_capacity(source_(shape, shape.slot));
  }
  if (table_) {
    if (auto hit = table_->find(shape))
      return *hit;
  }
  if (mode_ == ScoreMode::expected)
    return expected_capacity(shape, policy_);
  generations_.fetch_add(1, std::memory_order_relaxed);
  return sampled_capacity(shape, policy_, shape.slot);
}

BlockScores Scorer::score_blocks(const ArchitectureSpec &arch) const {
  const auto shapes = enumerate_shapes(*space_, arch);
  BlockScores out;
  const auto layers = static_cast<std::size_t>(arch.num_layers);
  out.per_layer_attn.assign(layers, 0.0);
  out.per_layer_ffn.assign(layers, 0.0);
  for (const auto &s : shapes) {
    if (s.block == Block::other || !s.layer)
      continue;
    const auto l = static_cast<std::size_t>(*s.layer);
    (s.block == Block::attention ? out.per_layer_attn : out.per_layer_ffn)[l] += module_score(s);
  }
  for (std::size_t l = 0; l < layers; ++l) {
    out.total_attn += out.per_layer_attn[l];
    out.total_ffn += out.per_layer_ffn[l];
  }
  return out;
}

double Scorer::log_complexity(const ArchitectureSpec &arch) const {
  double total = 0.0;
  for (const auto &s : enumerate_shapes(*space_, arch)) {
    if (s.block == Block::other)
      continue;
    double sq = 0.0;
    if (source_) {
      generations_.fetch_add(1, std::memory_order_relaxed);
      sq = source_(s, s.slot).squaredNorm();
    } else {
      // Capacity times min(rows, cols) recovers the squared Frobenius norm.
      sq = module_score(s) * static_cast<double>(std::min(s.rows, s.cols));
    }
    if (!(sq > 0.0))
      throw DegenerateInputError("log complexity undefined: module '" + s.name + "' of " + arch.id +
                                 " has zero norm");
    total += 0.5 * std::log(sq);
  }
  return total;
}

BlockScores score_blocks(const SearchSpace &space, const ArchitectureSpec &arch,
                         const WeightInitPolicy &policy) {
  return Scorer(space, policy).score_blocks(arch);
}

double log_complexity(const SearchSpace &space, const ArchitectureSpec &arch,
                      const WeightInitPolicy &policy) {
  return Scorer(space, policy).log_complexity(arch);
}

} // namespace zerolm
