#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zerolm/archspace.hpp"

namespace zerolm::testing {

std::vector<DimValue> ints(std::initializer_list<std::int64_t> values);
std::vector<DimValue> int_range(std::int64_t first, std::int64_t last, std::int64_t step);

/// Encoder layers: q, k, v (attn x hidden), o (hidden x attn), f1 (ffn x hidden),
/// f2 (hidden x ffn), plus embedding and norm modules tagged other.
/// Dimensions "hidden" (global), "attn" and "ffn" (layer-scoped).
SearchSpaceDef encoder_space(std::string name, SpaceKind kind, std::int64_t layers,
                             std::vector<DimValue> hidden, std::vector<DimValue> attn,
                             std::vector<DimValue> ffn);

/// 3 hidden widths x 3 FFN widths, one layer: 9 architectures.
SearchSpaceDef toy9();
/// Layer count {1,2,3}, d_model {32..128}, per-layer d_inner: 156 architectures.
SearchSpaceDef toy_grid();
/// Four layers with per-layer value lists: 1296 architectures.
SearchSpaceDef toy_hetero();
/// Six layers of independent attention and FFN widths; cheap to table.
SearchSpaceDef synth_space();

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string &tag);

} // namespace zerolm::testing
