#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "zerolm/expr.hpp"

namespace zerolm {

inline constexpr int kSchemaVersion = 1;

enum class Block { attention, ffn, other };

std::string_view to_string(Block block);
Block block_from_string(std::string_view text);

/// One allowed value of a search dimension: an integer size or a categorical
/// label (e.g. an attention operator name).
using DimValue = std::variant<std::int64_t, std::string>;

std::string to_string(const DimValue &value);

/// One weight matrix of an architecture.
struct ModuleShape {
  std::string name;
  std::int64_t rows = 0; // output dimension
  std::int64_t cols = 0; // input dimension
  Block block = Block::other;
  std::optional<std::int64_t> layer; // empty for embedding-level modules
  /// Stable position of the module in the space's slot layout. Keys the
  /// weight RNG stream and the lookup table.
  std::uint64_t slot = 0;

  std::uint64_t size() const { return static_cast<std::uint64_t>(rows) * cols; }
  friend bool operator==(const ModuleShape &, const ModuleShape &) = default;
};

using DimAssignment = std::map<std::string, DimValue, std::less<>>;

/// A concrete Transformer candidate drawn from a search space.
struct ArchitectureSpec {
  std::string id;
  std::string space;
  std::int64_t num_layers = 0;
  DimAssignment globals;
  std::vector<DimAssignment> layers;

  friend bool operator==(const ArchitectureSpec &, const ArchitectureSpec &) = default;
};

enum class SpaceKind { heterogeneous_per_layer, homogeneous, decoder_grid };

std::string_view to_string(SpaceKind kind);
SpaceKind space_kind_from_string(std::string_view text);

// ---------------------------------------------------------------------------
// Declarative search-space grammar. This is what space files contain.

struct DimensionDef {
  std::string name;
  bool layer_scoped = false;
  std::vector<DimValue> values;
  /// Optional per-layer allowed lists (layer-scoped dimensions of spaces with
  /// a fixed layer count). Overrides `values` when present.
  std::vector<std::vector<DimValue>> per_layer_values;
};

struct ModuleDef {
  std::string name;
  Block block = Block::other;
  std::string rows;
  std::string cols;
  std::string count = "1";
};

struct SearchSpaceDef {
  std::string name;
  SpaceKind kind = SpaceKind::homogeneous;
  /// Either a fixed layer count or the name of a global dimension holding it.
  std::variant<std::int64_t, std::string> layers = std::int64_t{1};
  std::vector<DimensionDef> dimensions;
  std::map<std::string, std::int64_t> constants;
  std::vector<ModuleDef> global_modules;
  std::vector<ModuleDef> layer_modules;
  /// Per-layer width used by the attention-score FLOPs term.
  std::string attention_width = "hidden";
  /// Adds one bias vector (length rows) per attention/FFN matrix to #params.
  bool count_biases = false;
};

// ---------------------------------------------------------------------------

/// Validated, compiled search space. Immutable and shareable across threads.
class SearchSpace {
public:
  struct Dimension {
    std::string name;
    bool layer_scoped = false;
    std::vector<std::vector<DimValue>> allowed; // one list, or one per layer

    const std::vector<DimValue> &allowed_at(std::int64_t layer) const {
      return allowed.size() == 1 ? allowed.front() : allowed.at(static_cast<std::size_t>(layer));
    }
  };

  struct Module {
    std::string name;
    Block block;
    Expr rows;
    Expr cols;
    Expr count;
    std::uint64_t max_count = 1;
    std::uint64_t slot_offset = 0; // within the global block or within one layer
  };

  /// Throws ValidationError naming the offending field.
  explicit SearchSpace(SearchSpaceDef def);

  const SearchSpaceDef &definition() const noexcept { return def_; }
  const std::string &name() const noexcept { return def_.name; }
  SpaceKind kind() const noexcept { return def_.kind; }

  const std::vector<Dimension> &global_dims() const noexcept { return global_dims_; }
  const std::vector<Dimension> &layer_dims() const noexcept { return layer_dims_; }
  const std::vector<Module> &global_modules() const noexcept { return global_modules_; }
  const std::vector<Module> &layer_modules() const noexcept { return layer_modules_; }
  const Expr &attention_width() const noexcept { return attention_width_; }

  /// Name of the global dimension carrying the layer count, if any.
  const std::optional<std::string> &layer_count_dim() const noexcept { return layer_count_dim_; }
  /// Allowed layer counts, ascending.
  const std::vector<std::int64_t> &layer_counts() const noexcept { return layer_counts_; }
  std::int64_t max_layers() const noexcept { return layer_counts_.back(); }

  std::uint64_t global_slot_count() const noexcept { return global_slots_; }
  std::uint64_t slots_per_layer() const noexcept { return layer_stride_; }

  std::optional<std::int64_t> constant(std::string_view name) const;

private:
  SearchSpaceDef def_;
  std::vector<Dimension> global_dims_;
  std::vector<Dimension> layer_dims_;
  std::vector<Module> global_modules_;
  std::vector<Module> layer_modules_;
  Expr attention_width_;
  std::optional<std::string> layer_count_dim_;
  std::vector<std::int64_t> layer_counts_;
  std::uint64_t global_slots_ = 0;
  std::uint64_t layer_stride_ = 0;
};

/// Exact size of a search space. Arithmetic is overflow-checked: results
/// beyond 512 bits raise OverflowError.
using SpaceSize = boost::multiprecision::checked_uint512_t;

/// Throws ValidationError naming the offending dimension.
void validate(const SearchSpace &space, const ArchitectureSpec &arch);

/// One shape per weight matrix, layer-major: embedding-level modules first,
/// then each layer's modules in grammar order.
std::vector<ModuleShape> enumerate_shapes(const SearchSpace &space, const ArchitectureSpec &arch);

/// Sum of rows*cols over attention and FFN matrices (plus bias vectors when
/// the space counts them); `include_other` adds embedding/norm matrices.
std::uint64_t count_params(const SearchSpace &space, const ArchitectureSpec &arch,
                           bool include_other = false);

/// Dense-matmul forward-pass estimate in TFLOPs for one sequence:
///   2 * matmul_params * seq_len + 2 * seq_len^2 * sum_l attention_width_l.
/// An ordering heuristic, not a hardware measurement.
double estimate_tflops(const SearchSpace &space, const ArchitectureSpec &arch, std::int64_t seq_len);

/// Uniform independent choice per dimension (per layer for layer-scoped
/// dimensions). Deterministic for a fixed seed.
ArchitectureSpec sample_architecture(const SearchSpace &space, std::uint64_t seed);

SpaceSize space_size(const SearchSpace &space);

/// Calls `visit` for every architecture of the space in mixed-radix order.
/// Throws SetupError if the space is larger than `cap`.
void for_each_architecture(const SearchSpace &space, std::uint64_t cap,
                           const std::function<void(ArchitectureSpec &&)> &visit);

/// Canonical text of the dimension assignment (ignores id).
std::string canonical_key(const ArchitectureSpec &arch);

/// Content-derived identifier: "<space>-<16 hex digits>".
std::string architecture_id(std::string_view space_name, const ArchitectureSpec &arch);

/// Sets num_layers from the layer-count dimension and assigns the content id.
void finalize_architecture(const SearchSpace &space, ArchitectureSpec &arch);

} // namespace zerolm
