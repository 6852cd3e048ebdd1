#include "zerolm/archspace.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "zerolm/error.hpp"
#include "zerolm/rng.hpp"

namespace zerolm {

namespace {

constexpr std::uint64_t kMaxComboEnumeration = 1'000'000;

std::string layer_field(std::int64_t layer, std::string_view dim) {
  return "layers[" + std::to_string(layer) + "]." + std::string(dim);
}

std::optional<std::int64_t> as_int(const DimValue &v) {
  if (const auto *i = std::get_if<std::int64_t>(&v))
    return *i;
  return std::nullopt;
}

bool all_int(const std::vector<DimValue> &values) {
  return std::all_of(values.begin(), values.end(),
                     [](const DimValue &v) { return std::holds_alternative<std::int64_t>(v); });
}

void check_value_list(const std::string &field, const std::vector<DimValue> &values) {
  if (values.empty())
    throw ValidationError(field, "allowed-value list is empty");
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j)
      if (values[i] == values[j])
        throw ValidationError(field, "duplicate allowed value " + to_string(values[i]));
}

/// Calls fn(resolver) for every combination of the named dimensions' values.
/// `lists` maps each name to its candidate values; names missing from `lists`
/// fall through to `fallback`.
void for_each_combo(const std::vector<std::string> &names,
                    const std::vector<const std::vector<DimValue> *> &lists,
                    const Expr::Resolver &fallback,
                    const std::function<void(const Expr::Resolver &)> &fn) {
  std::uint64_t total = 1;
  for (const auto *list : lists) {
    if (__builtin_mul_overflow(total, list->size(), &total) || total > kMaxComboEnumeration)
      throw ValidationError("module grammar", "too many value combinations to enumerate");
  }
  std::vector<std::size_t> digit(names.size(), 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    Expr::Resolver resolve = [&](std::string_view id) -> std::optional<std::int64_t> {
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == id)
          return as_int((*lists[i])[digit[i]]);
      return fallback(id);
    };
    fn(resolve);
    for (std::size_t i = names.size(); i-- > 0;) {
      if (++digit[i] < lists[i]->size())
        break;
      digit[i] = 0;
    }
  }
}

struct Lookup {
  const SearchSpace &space;
  const ArchitectureSpec &arch;
  const DimAssignment *layer = nullptr;

  std::optional<std::int64_t> operator()(std::string_view id) const {
    if (layer) {
      if (auto it = layer->find(id); it != layer->end())
        return as_int(it->second);
    }
    if (auto it = arch.globals.find(id); it != arch.globals.end())
      return as_int(it->second);
    return space.constant(id);
  }
};

void check_assignment(const std::vector<SearchSpace::Dimension> &dims, const DimAssignment &values,
                      std::optional<std::int64_t> layer) {
  auto field = [&](std::string_view dim) {
    return layer ? layer_field(*layer, dim) : "globals." + std::string(dim);
  };
  for (const auto &dim : dims) {
    auto it = values.find(dim.name);
    if (it == values.end())
      throw ValidationError(field(dim.name), "missing value");
    const auto &allowed = dim.allowed_at(layer.value_or(0));
    if (std::find(allowed.begin(), allowed.end(), it->second) == allowed.end())
      throw ValidationError(field(dim.name), "value " + to_string(it->second) + " not allowed");
  }
  for (const auto &[name, value] : values) {
    const bool known = std::any_of(dims.begin(), dims.end(),
                                   [&](const auto &d) { return d.name == name; });
    if (!known)
      throw ValidationError(field(name), "unknown dimension");
  }
}

nlohmann::json to_json_value(const DimValue &v) {
  if (const auto *i = std::get_if<std::int64_t>(&v))
    return *i;
  return std::get<std::string>(v);
}

} // namespace

std::string_view to_string(Block block) {
  switch (block) {
  case Block::attention:
    return "attention";
  case Block::ffn:
    return "ffn";
  case Block::other:
    break;
  }
  return "other";
}

Block block_from_string(std::string_view text) {
  if (text == "attention")
    return Block::attention;
  if (text == "ffn")
    return Block::ffn;
  if (text == "other")
    return Block::other;
  throw ValidationError("block", "unknown block tag '" + std::string(text) + "'");
}

std::string to_string(const DimValue &value) {
  if (const auto *i = std::get_if<std::int64_t>(&value))
    return std::to_string(*i);
  return std::get<std::string>(value);
}

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
  case SpaceKind::heterogeneous_per_layer:
    return "heterogeneous_per_layer";
  case SpaceKind::homogeneous:
    return "homogeneous";
  case SpaceKind::decoder_grid:
    break;
  }
  return "decoder_grid";
}

SpaceKind space_kind_from_string(std::string_view text) {
  if (text == "heterogeneous_per_layer")
    return SpaceKind::heterogeneous_per_layer;
  if (text == "homogeneous")
    return SpaceKind::homogeneous;
  if (text == "decoder_grid")
    return SpaceKind::decoder_grid;
  throw ValidationError("kind", "unknown space kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

SearchSpace::SearchSpace(SearchSpaceDef def) : def_(std::move(def)) {
  if (def_.name.empty())
    throw ValidationError("name", "space name is empty");

  std::set<std::string, std::less<>> seen;
  for (const auto &[name, value] : def_.constants) {
    if (!seen.insert(name).second)
      throw ValidationError("constants." + name, "duplicate name");
  }

  if (const auto *fixed = std::get_if<std::int64_t>(&def_.layers)) {
    if (*fixed < 0)
      throw ValidationError("layers", "layer count must be non-negative");
    layer_counts_ = {*fixed};
  } else {
    layer_count_dim_ = std::get<std::string>(def_.layers);
  }

  for (const auto &d : def_.dimensions) {
    const std::string field = "dimensions." + d.name;
    if (d.name.empty())
      throw ValidationError("dimensions", "dimension with empty name");
    if (!seen.insert(d.name).second)
      throw ValidationError(field, "duplicate name");
    Dimension dim{d.name, d.layer_scoped, {}};
    if (!d.per_layer_values.empty()) {
      if (!d.layer_scoped)
        throw ValidationError(field, "per_layer_values requires layer_scoped");
      if (layer_count_dim_ || static_cast<std::int64_t>(d.per_layer_values.size()) != layer_counts_[0])
        throw ValidationError(field, "per_layer_values needs one list per layer of a fixed layer count");
      for (std::size_t l = 0; l < d.per_layer_values.size(); ++l)
        check_value_list(field + "[" + std::to_string(l) + "]", d.per_layer_values[l]);
      dim.allowed = d.per_layer_values;
    } else {
      check_value_list(field, d.values);
      dim.allowed = {d.values};
    }
    (d.layer_scoped ? layer_dims_ : global_dims_).push_back(std::move(dim));
  }

  if (layer_count_dim_) {
    auto it = std::find_if(global_dims_.begin(), global_dims_.end(),
                           [&](const auto &d) { return d.name == *layer_count_dim_; });
    if (it == global_dims_.end())
      throw ValidationError("layers", "'" + *layer_count_dim_ + "' is not a global dimension");
    for (const auto &v : it->allowed.front()) {
      auto n = as_int(v);
      if (!n || *n < 0)
        throw ValidationError("dimensions." + it->name, "layer counts must be non-negative integers");
      layer_counts_.push_back(*n);
    }
    std::sort(layer_counts_.begin(), layer_counts_.end());
  }

  // Candidate integer values per identifier, for bounding module counts.
  auto candidates = [&](const std::string &id, bool layer_context) -> std::vector<DimValue> {
    for (const auto &d : global_dims_)
      if (d.name == id)
        return d.allowed.front();
    if (layer_context) {
      for (const auto &d : layer_dims_) {
        if (d.name != id)
          continue;
        std::vector<DimValue> all;
        for (const auto &list : d.allowed)
          for (const auto &v : list)
            if (std::find(all.begin(), all.end(), v) == all.end())
              all.push_back(v);
        return all;
      }
    }
    if (auto c = constant(id))
      return {DimValue{*c}};
    throw ValidationError("identifier '" + id + "'",
                          layer_context ? "not a dimension or constant"
                                        : "not a global dimension or constant");
  };

  auto compile = [&](const std::vector<ModuleDef> &defs, bool layer_context,
                     std::vector<Module> &out, std::uint64_t &slots) {
    std::set<std::string> names;
    for (const auto &m : defs) {
      const std::string field = (layer_context ? "layer_modules." : "global_modules.") + m.name;
      if (m.name.empty() || !names.insert(m.name).second)
        throw ValidationError(field, "module names must be non-empty and unique");
      if (!layer_context && m.block != Block::other)
        throw ValidationError(field, "embedding-level modules must use block 'other'");
      Module mod{m.name, m.block, Expr::parse(m.rows), Expr::parse(m.cols), Expr::parse(m.count), 1,
                 slots};
      for (const Expr *e : {&mod.rows, &mod.cols, &mod.count}) {
        for (const auto &id : e->identifiers()) {
          const auto values = candidates(id, layer_context);
          if (!all_int(values))
            throw ValidationError(field, "dimension '" + id + "' is categorical and cannot size a matrix");
        }
      }
      std::vector<std::vector<DimValue>> lists;
      std::vector<const std::vector<DimValue> *> ptrs;
      for (const auto &id : mod.count.identifiers())
        lists.push_back(candidates(id, layer_context));
      for (const auto &l : lists)
        ptrs.push_back(&l);
      std::int64_t max_count = 0;
      for_each_combo(
          mod.count.identifiers(), ptrs, [](std::string_view) { return std::nullopt; },
          [&](const Expr::Resolver &r) {
            const auto c = mod.count.eval(r);
            if (c < 0)
              throw ValidationError(field, "count expression can be negative");
            max_count = std::max(max_count, c);
          });
      mod.max_count = static_cast<std::uint64_t>(max_count);
      slots += mod.max_count;
      out.push_back(std::move(mod));
    }
  };
  compile(def_.global_modules, false, global_modules_, global_slots_);
  compile(def_.layer_modules, true, layer_modules_, layer_stride_);

  attention_width_ = Expr::parse(def_.attention_width);
  for (const auto &id : attention_width_.identifiers()) {
    if (!all_int(candidates(id, true)))
      throw ValidationError("attention_width", "dimension '" + id + "' is categorical");
  }
}

std::optional<std::int64_t> SearchSpace::constant(std::string_view name) const {
  for (const auto &[k, v] : def_.constants)
    if (k == name)
      return v;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

void validate(const SearchSpace &space, const ArchitectureSpec &arch) {
  if (!arch.space.empty() && arch.space != space.name())
    throw ValidationError("space", "architecture belongs to space '" + arch.space +
                                       "', expected '" + space.name() + "'");
  check_assignment(space.global_dims(), arch.globals, std::nullopt);
  if (const auto &dim = space.layer_count_dim()) {
    const auto declared = as_int(arch.globals.at(*dim));
    if (declared != arch.num_layers)
      throw ValidationError("num_layers", "does not match dimension '" + *dim + "'");
  } else if (arch.num_layers != space.layer_counts().front()) {
    throw ValidationError("num_layers", "space has exactly " +
                                            std::to_string(space.layer_counts().front()) + " layers");
  }
  if (static_cast<std::int64_t>(arch.layers.size()) != arch.num_layers)
    throw ValidationError("layers", "expected " + std::to_string(arch.num_layers) +
                                        " layer records, got " + std::to_string(arch.layers.size()));
  for (std::size_t l = 0; l < arch.layers.size(); ++l)
    check_assignment(space.layer_dims(), arch.layers[l], static_cast<std::int64_t>(l));
}

std::vector<ModuleShape> enumerate_shapes(const SearchSpace &space, const ArchitectureSpec &arch) {
  validate(space, arch);
  std::vector<ModuleShape> shapes;

  auto expand = [&](const SearchSpace::Module &mod, const Lookup &lookup,
                    std::optional<std::int64_t> layer, std::uint64_t base) {
    const std::int64_t count = mod.count.eval(std::cref(lookup));
    if (count < 0)
      throw ValidationError("module " + mod.name, "negative count");
    for (std::int64_t r = 0; r < count; ++r) {
      ModuleShape s;
      s.name = mod.max_count > 1 ? mod.name + "." + std::to_string(r) : mod.name;
      s.rows = mod.rows.eval(std::cref(lookup));
      s.cols = mod.cols.eval(std::cref(lookup));
      if (s.rows < 1 || s.cols < 1)
        throw ValidationError(layer ? layer_field(*layer, mod.name) : "globals." + mod.name,
                              "matrix dimensions must be positive, got " + std::to_string(s.rows) +
                                  "x" + std::to_string(s.cols));
      s.block = mod.block;
      s.layer = layer;
      s.slot = base + mod.slot_offset + static_cast<std::uint64_t>(r);
      shapes.push_back(std::move(s));
    }
  };

  const Lookup global_lookup{space, arch, nullptr};
  for (const auto &mod : space.global_modules())
    expand(mod, global_lookup, std::nullopt, 0);
  for (std::int64_t l = 0; l < arch.num_layers; ++l) {
    const Lookup lookup{space, arch, &arch.layers[static_cast<std::size_t>(l)]};
    const std::uint64_t base = space.global_slot_count() +
                               static_cast<std::uint64_t>(l) * space.slots_per_layer();
    for (const auto &mod : space.layer_modules())
      expand(mod, lookup, l, base);
  }
  return shapes;
}

std::uint64_t count_params(const SearchSpace &space, const ArchitectureSpec &arch,
                           bool include_other) {
  std::uint64_t total = 0;
  const bool biases = space.definition().count_biases;
  for (const auto &s : enumerate_shapes(space, arch)) {
    if (s.block == Block::other) {
      if (include_other)
        total += s.size();
      continue;
    }
    total += s.size();
    if (biases)
      total += static_cast<std::uint64_t>(s.rows);
  }
  return total;
}

double estimate_tflops(const SearchSpace &space, const ArchitectureSpec &arch, std::int64_t seq_len) {
  if (seq_len < 1)
    throw ValidationError("seq_len", "must be >= 1");
  double matmul_params = 0.0;
  for (const auto &s : enumerate_shapes(space, arch))
    if (s.block != Block::other)
      matmul_params += static_cast<double>(s.size());
  double width_sum = 0.0;
  for (std::int64_t l = 0; l < arch.num_layers; ++l) {
    const Lookup lookup{space, arch, &arch.layers[static_cast<std::size_t>(l)]};
    width_sum += static_cast<double>(space.attention_width().eval(std::cref(lookup)));
  }
  const double seq = static_cast<double>(seq_len);
  return (2.0 * matmul_params * seq + 2.0 * seq * seq * width_sum) / 1e12;
}

ArchitectureSpec sample_architecture(const SearchSpace &space, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<DimValue> &values) -> const DimValue & {
    std::uniform_int_distribution<std::size_t> dist(0, values.size() - 1);
    return values[dist(rng)];
  };
  ArchitectureSpec arch;
  arch.space = space.name();
  for (const auto &d : space.global_dims())
    arch.globals.emplace(d.name, pick(d.allowed.front()));
  arch.num_layers = space.layer_count_dim()
                        ? std::get<std::int64_t>(arch.globals.at(*space.layer_count_dim()))
                        : space.layer_counts().front();
  arch.layers.resize(static_cast<std::size_t>(arch.num_layers));
  for (std::int64_t l = 0; l < arch.num_layers; ++l)
    for (const auto &d : space.layer_dims())
      arch.layers[static_cast<std::size_t>(l)].emplace(d.name, pick(d.allowed_at(l)));
  arch.id = architecture_id(space.name(), arch);
  return arch;
}

SpaceSize space_size(const SearchSpace &space) {
  try {
    SpaceSize globals = 1;
    for (const auto &d : space.global_dims())
      if (!space.layer_count_dim() || d.name != *space.layer_count_dim())
        globals *= d.allowed.front().size();
    SpaceSize layered = 0;
    for (const auto count : space.layer_counts()) {
      SpaceSize term = 1;
      for (std::int64_t l = 0; l < count; ++l)
        for (const auto &d : space.layer_dims())
          term *= d.allowed_at(l).size();
      layered += term;
    }
    return globals * layered;
  } catch (const std::overflow_error &) {
    throw OverflowError("size of space '" + space.name() + "' exceeds 512 bits");
  }
}

void for_each_architecture(const SearchSpace &space, std::uint64_t cap,
                           const std::function<void(ArchitectureSpec &&)> &visit) {
  const SpaceSize size = space_size(space);
  if (size > cap)
    throw SetupError("space '" + space.name() + "' has " + size.str() +
                     " architectures, above the enumeration cap of " + std::to_string(cap));

  for (const auto count : space.layer_counts()) {
    // Digit lists: global dims (layer-count dim pinned), then layer dims per layer.
    std::vector<const std::vector<DimValue> *> lists;
    std::vector<DimValue> pinned{DimValue{count}};
    for (const auto &d : space.global_dims())
      lists.push_back(space.layer_count_dim() && d.name == *space.layer_count_dim()
                          ? &pinned
                          : &d.allowed.front());
    for (std::int64_t l = 0; l < count; ++l)
      for (const auto &d : space.layer_dims())
        lists.push_back(&d.allowed_at(l));

    std::vector<std::size_t> digit(lists.size(), 0);
    for (;;) {
      ArchitectureSpec arch;
      arch.space = space.name();
      arch.num_layers = count;
      std::size_t k = 0;
      for (const auto &d : space.global_dims())
        arch.globals.emplace(d.name, (*lists[k])[digit[k]]), ++k;
      arch.layers.resize(static_cast<std::size_t>(count));
      for (auto &layer : arch.layers)
        for (const auto &d : space.layer_dims())
          layer.emplace(d.name, (*lists[k])[digit[k]]), ++k;
      arch.id = architecture_id(space.name(), arch);
      visit(std::move(arch));

      std::size_t i = lists.size();
      while (i-- > 0) {
        if (++digit[i] < lists[i]->size())
          break;
        digit[i] = 0;
      }
      if (i == static_cast<std::size_t>(-1))
        break;
    }
  }
}

std::string canonical_key(const ArchitectureSpec &arch) {
  nlohmann::json j;
  j["globals"] = nlohmann::json::object();
  for (const auto &[k, v] : arch.globals)
    j["globals"][k] = to_json_value(v);
  j["layers"] = nlohmann::json::array();
  for (const auto &layer : arch.layers) {
    nlohmann::json lj = nlohmann::json::object();
    for (const auto &[k, v] : layer)
      lj[k] = to_json_value(v);
    j["layers"].push_back(std::move(lj));
  }
  return j.dump();
}

std::string architecture_id(std::string_view space_name, const ArchitectureSpec &arch) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_key(arch))));
  return std::string(space_name) + "-" + hex;
}

void finalize_architecture(const SearchSpace &space, ArchitectureSpec &arch) {
  arch.space = space.name();
  if (const auto &dim = space.layer_count_dim()) {
    if (auto it = arch.globals.find(*dim); it != arch.globals.end())
      if (auto n = as_int(it->second))
        arch.num_layers = *n;
  } else {
    arch.num_layers = space.layer_counts().front();
  }
  arch.id = architecture_id(space.name(), arch);
}

} // namespace zerolm
