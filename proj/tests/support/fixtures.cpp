#include "fixtures.hpp"

#include <random>

namespace zerolm::testing {

std::vector<DimValue> ints(std::initializer_list<std::int64_t> values) { return {values.begin(), values.end()}; }

std::vector<DimValue> int_range(std::int64_t first, std::int64_t last, std::int64_t step) {
  std::vector<DimValue> out;
  for (auto v = first; v <= last; v += step)
    out.emplace_back(v);
  return out;
}

namespace {

void add_encoder_modules(SearchSpaceDef &d, const std::string &hidden, const std::string &attn,
                         const std::string &ffn) {
  d.global_modules = {{"tok_emb", Block::other, "vocab", hidden, "1"}};
  d.layer_modules = {
      {"q", Block::attention, attn, hidden, "1"},   {"k", Block::attention, attn, hidden, "1"},
      {"v", Block::attention, attn, hidden, "1"},   {"o", Block::attention, hidden, attn, "1"},
      {"attn_norm", Block::other, "1", hidden, "1"}, {"f1", Block::ffn, ffn, hidden, "1"},
      {"f2", Block::ffn, hidden, ffn, "1"},         {"ffn_norm", Block::other, "1", hidden, "1"},
  };
  d.constants["vocab"] = 1000;
  d.attention_width = attn;
}

} // namespace

SearchSpaceDef encoder_space(std::string name, SpaceKind kind, std::int64_t layers,
                             std::vector<DimValue> hidden, std::vector<DimValue> attn,
                             std::vector<DimValue> ffn) {
  SearchSpaceDef d;
  d.name = std::move(name);
  d.kind = kind;
  d.layers = layers;
  d.dimensions = {{"hidden", false, std::move(hidden), {}},
                  {"attn", true, std::move(attn), {}},
                  {"ffn", true, std::move(ffn), {}}};
  add_encoder_modules(d, "hidden", "attn", "ffn");
  return d;
}

SearchSpaceDef toy9() {
  SearchSpaceDef d;
  d.name = "toy9";
  d.kind = SpaceKind::homogeneous;
  d.layers = std::int64_t{1};
  d.dimensions = {{"hidden", false, ints({64, 128, 192}), {}}, {"ffn", true, ints({128, 256, 512}), {}}};
  add_encoder_modules(d, "hidden", "hidden", "ffn");
  return d;
}

SearchSpaceDef toy_grid() {
  SearchSpaceDef d;
  d.name = "toy-grid";
  d.kind = SpaceKind::decoder_grid;
  d.layers = std::string("n_layer");
  d.dimensions = {{"n_layer", false, ints({1, 2, 3}), {}},
                  {"d_model", false, ints({32, 64, 96, 128}), {}},
                  {"d_inner", true, ints({64, 128, 256}), {}}};
  add_encoder_modules(d, "d_model", "d_model", "d_inner");
  return d;
}

SearchSpaceDef toy_hetero() {
  SearchSpaceDef d;
  d.name = "toy-hetero";
  d.kind = SpaceKind::heterogeneous_per_layer;
  d.layers = std::int64_t{4};
  d.dimensions = {
      {"attn", true, {}, {ints({32, 64}), ints({48, 96}), ints({32, 80}), ints({64, 128})}},
      {"ffn", true, {}, {ints({64, 128, 192}), ints({96, 160, 256}), ints({64, 256, 320}), ints({128, 192, 384})}},
  };
  d.constants["hidden"] = 48;
  add_encoder_modules(d, "hidden", "attn", "ffn");
  return d;
}

SearchSpaceDef synth_space() {
  SearchSpaceDef d;
  d.name = "synth";
  d.kind = SpaceKind::homogeneous;
  d.layers = std::int64_t{6};
  d.dimensions = {{"attn", true, int_range(64, 384, 64), {}}, {"ffn", true, int_range(64, 1024, 64), {}}};
  d.constants["hidden"] = 64;
  add_encoder_modules(d, "hidden", "attn", "ffn");
  return d;
}

std::filesystem::path temp_dir(const std::string &tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() / ("zerolm-" + tag + "-" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace zerolm::testing
