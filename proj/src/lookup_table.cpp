#include <set>

#include "zerolm/capacity.hpp"
#include "zerolm/error.hpp"
#include "zerolm/parallel.hpp"

namespace zerolm {

namespace {

std::optional<std::int64_t> as_int(const DimValue &v) {
  if (const auto *i = std::get_if<std::int64_t>(&v))
    return *i;
  return std::nullopt;
}

} // namespace

std::vector<ModuleKey> plan_lookup_table(const SearchSpace &space, std::size_t max_entries) {
  if (space.kind() == SpaceKind::heterogeneous_per_layer)
    throw UnsupportedSpaceError("lookup tables need a homogeneous or decoder_grid space; '" +
                                space.name() + "' is heterogeneous_per_layer");

  std::set<ModuleKey> keys;
  for (std::int64_t layer = 0; layer < space.max_layers(); ++layer) {
    const std::uint64_t base =
        space.global_slot_count() + static_cast<std::uint64_t>(layer) * space.slots_per_layer();
    for (const auto &mod : space.layer_modules()) {
      if (mod.block == Block::other)
        continue;
      // Dimensions the module depends on, with their allowed values at this layer.
      std::vector<std::string> names;
      std::vector<const std::vector<DimValue> *> lists;
      for (const Expr *e : {&mod.rows, &mod.cols, &mod.count}) {
        for (const auto &id : e->identifiers()) {
          if (std::find(names.begin(), names.end(), id) != names.end())
            continue;
          const std::vector<DimValue> *list = nullptr;
          for (const auto &d : space.layer_dims())
            if (d.name == id)
              list = &d.allowed_at(layer);
          for (const auto &d : space.global_dims())
            if (d.name == id)
              list = &d.allowed.front();
          if (list) {
            names.push_back(id);
            lists.push_back(list);
          }
        }
      }
      std::uint64_t combos = 1;
      for (const auto *l : lists)
        if (__builtin_mul_overflow(combos, l->size(), &combos) || combos > max_entries)
          throw UnsupportedSpaceError("module '" + mod.name + "' of space '" + space.name() +
                                      "' has too many distinct shapes for a lookup table");

      std::vector<std::size_t> digit(names.size(), 0);
      for (std::uint64_t n = 0; n < combos; ++n) {
        auto resolve = [&](std::string_view id) -> std::optional<std::int64_t> {
          for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == id)
              return as_int((*lists[i])[digit[i]]);
          return space.constant(id);
        };
        const std::int64_t count = mod.count.eval(resolve);
        const std::int64_t rows = mod.rows.eval(resolve);
        const std::int64_t cols = mod.cols.eval(resolve);
        if (rows >= 1 && cols >= 1)
          for (std::int64_t r = 0; r < count; ++r)
            keys.insert({base + mod.slot_offset + static_cast<std::uint64_t>(r), rows, cols, mod.block});
        if (keys.size() > max_entries)
          throw UnsupportedSpaceError("space '" + space.name() + "' needs more than " +
                                      std::to_string(max_entries) + " lookup-table entries");
        for (std::size_t i = names.size(); i-- > 0;) {
          if (++digit[i] < lists[i]->size())
            break;
          digit[i] = 0;
        }
      }
    }
  }
  return {keys.begin(), keys.end()};
}

LookupTable build_lookup_table(const SearchSpace &space, const WeightInitPolicy &policy,
                               ScoreMode mode, unsigned workers, std::size_t max_entries) {
  const auto keys = plan_lookup_table(space, max_entries);
  const Scorer scorer(space, policy, mode);
  std::vector<double> values(keys.size());
  parallel_for(keys.size(), workers, [&](std::size_t i) {
    ModuleShape shape;
    shape.rows = keys[i].rows;
    shape.cols = keys[i].cols;
    shape.block = keys[i].block;
    shape.slot = keys[i].slot;
    values[i] = scorer.module_score(shape);
  });
  std::map<ModuleKey, double> entries;
  for (std::size_t i = 0; i < keys.size(); ++i)
    entries.emplace_hint(entries.end(), keys[i], values[i]);
  return LookupTable(std::move(entries), scorer.describe());
}

} // namespace zerolm
