#include "zerolm/templates.hpp"

#include "zerolm/error.hpp"

namespace zerolm {

namespace {

std::vector<DimValue> ints(std::initializer_list<std::int64_t> values) {
  return {values.begin(), values.end()};
}

std::vector<DimValue> range(std::int64_t first, std::int64_t last, std::int64_t step) {
  std::vector<DimValue> out;
  for (std::int64_t v = first; v <= last; v += step)
    out.emplace_back(v);
  return out;
}

ModuleDef mod(std::string name, Block block, std::string rows, std::string cols,
              std::string count = "1") {
  return {std::move(name), block, std::move(rows), std::move(cols), std::move(count)};
}

// Encoder layers with hidden width `hidden`; attention operators other than
// self-attention are scored as same-sized projection matrices.
SearchSpaceDef flexibert() {
  SearchSpaceDef d;
  d.name = "flexibert";
  d.kind = SpaceKind::heterogeneous_per_layer;
  d.layers = std::string("num_layers");
  d.dimensions = {
      {"hidden", false, ints({128, 256}), {}},
      {"num_layers", false, ints({2, 4}), {}},
      {"attention_op",
       true,
       {DimValue{"sa-sdp"}, DimValue{"sa-wma"}, DimValue{"lt-dft"}, DimValue{"lt-dct"},
        DimValue{"dc-5"}, DimValue{"dc-9"}},
       {}},
      {"heads", true, ints({2, 4}), {}},
      {"ffn_dim", true, ints({512, 1024}), {}},
      {"ffn_stacks", true, ints({1, 3}), {}},
  };
  d.constants = {{"vocab", 30522}, {"max_positions", 512}};
  d.global_modules = {
      mod("tok_emb", Block::other, "vocab", "hidden"),
      mod("pos_emb", Block::other, "max_positions", "hidden"),
      mod("emb_norm", Block::other, "1", "hidden"),
  };
  d.layer_modules = {
      mod("q", Block::attention, "hidden", "hidden"),
      mod("k", Block::attention, "hidden", "hidden"),
      mod("v", Block::attention, "hidden", "hidden"),
      mod("o", Block::attention, "hidden", "hidden"),
      mod("attn_norm", Block::other, "1", "hidden"),
      mod("f1", Block::ffn, "ffn_dim", "hidden"),
      mod("f_mid", Block::ffn, "ffn_dim", "ffn_dim", "ffn_stacks - 1"),
      mod("f2", Block::ffn, "hidden", "ffn_dim"),
      mod("ffn_norm", Block::other, "1", "hidden"),
  };
  d.attention_width = "hidden";
  return d;
}

SearchSpaceDef gpt2() {
  SearchSpaceDef d;
  d.name = "gpt2";
  d.kind = SpaceKind::decoder_grid;
  d.layers = std::string("n_layer");
  d.dimensions = {
      {"n_layer", false, range(2, 16, 1), {}},
      {"d_model", false, range(128, 1024, 64), {}},
      {"d_embed", false, ints({128, 256, 512}), {}},
      {"div_val", false, ints({1, 2, 4}), {}},
      {"d_inner", true, range(256, 4096, 64), {}},
      {"n_head", true, ints({2, 4, 8}), {}},
  };
  d.constants = {{"vocab", 50257}, {"n_positions", 1024}};
  d.global_modules = {
      mod("tok_emb", Block::other, "vocab", "d_embed"),
      mod("emb_proj", Block::other, "d_model", "d_embed"),
      mod("pos_emb", Block::other, "n_positions", "d_model"),
      mod("final_norm", Block::other, "1", "d_model"),
  };
  d.layer_modules = {
      mod("q", Block::attention, "d_model", "d_model"),
      mod("k", Block::attention, "d_model", "d_model"),
      mod("v", Block::attention, "d_model", "d_model"),
      mod("o", Block::attention, "d_model", "d_model"),
      mod("attn_norm", Block::other, "1", "d_model"),
      mod("f1", Block::ffn, "d_inner", "d_model"),
      mod("f2", Block::ffn, "d_model", "d_inner"),
      mod("ffn_norm", Block::other, "1", "d_model"),
  };
  d.attention_width = "d_model";
  return d;
}

SearchSpaceDef lonas_bert() {
  SearchSpaceDef d;
  d.name = "lonas-bert";
  d.kind = SpaceKind::homogeneous;
  d.layers = std::int64_t{12};
  std::vector<std::vector<DimValue>> attn = {
      ints({768, 384}), ints({768, 320}), ints({768, 256}), ints({768, 512}),
      ints({768, 512}), ints({768, 704}), ints({768, 576}), ints({768, 576}),
      ints({768, 640}), ints({768, 192}), ints({768, 704, 192}), ints({768, 320}),
  };
  std::vector<std::vector<DimValue>> inter = {
      ints({3072, 2634, 216}), ints({3072, 2634, 181}), ints({3072, 2627, 208}),
      ints({3072, 2676, 226}), ints({3072, 2628, 179}), ints({3072, 2662, 175}),
      ints({3072, 2706, 182}), ints({3072, 2687, 169}), ints({3072, 2616, 165}),
      ints({3072, 2400, 160}), ints({3072, 2198, 163}), ints({3072, 1940, 150}),
  };
  std::vector<std::vector<DimValue>> rank(12, ints({8, 4, 2}));
  d.dimensions = {
      {"attn_dim", true, {}, attn},
      {"lora_rank", true, {}, rank},
      {"intermediate", true, {}, inter},
  };
  d.constants = {{"hidden", 768}, {"vocab", 30522}, {"max_positions", 512}, {"type_vocab", 2}};
  d.global_modules = {
      mod("tok_emb", Block::other, "vocab", "hidden"),
      mod("pos_emb", Block::other, "max_positions", "hidden"),
      mod("type_emb", Block::other, "type_vocab", "hidden"),
      mod("emb_norm", Block::other, "1", "hidden"),
  };
  d.layer_modules = {
      mod("q", Block::attention, "attn_dim", "hidden"),
      mod("k", Block::attention, "attn_dim", "hidden"),
      mod("v", Block::attention, "attn_dim", "hidden"),
      mod("o", Block::attention, "hidden", "attn_dim"),
      mod("q_lora_a", Block::attention, "lora_rank", "hidden"),
      mod("q_lora_b", Block::attention, "attn_dim", "lora_rank"),
      mod("v_lora_a", Block::attention, "lora_rank", "hidden"),
      mod("v_lora_b", Block::attention, "attn_dim", "lora_rank"),
      mod("attn_norm", Block::other, "1", "hidden"),
      mod("f1", Block::ffn, "intermediate", "hidden"),
      mod("f2", Block::ffn, "hidden", "intermediate"),
      mod("ffn_norm", Block::other, "1", "hidden"),
  };
  d.attention_width = "attn_dim";
  return d;
}

SearchSpaceDef lonas_llama() {
  SearchSpaceDef d;
  d.name = "lonas-llama";
  d.kind = SpaceKind::homogeneous;
  d.layers = std::int64_t{32};
  d.dimensions = {
      {"qkv_rank", true, ints({32, 28}), {}},
      {"ffn_width", true, ints({11008, 9632, 8256, 6880, 5504}), {}},
      {"ffn_rank", true, ints({32, 28}), {}},
  };
  d.constants = {{"hidden", 4096}, {"vocab", 32000}};
  d.global_modules = {
      mod("tok_emb", Block::other, "vocab", "hidden"),
      mod("lm_head", Block::other, "vocab", "hidden"),
      mod("final_norm", Block::other, "1", "hidden"),
  };
  d.layer_modules = {
      mod("q", Block::attention, "hidden", "hidden"),
      mod("k", Block::attention, "hidden", "hidden"),
      mod("v", Block::attention, "hidden", "hidden"),
      mod("o", Block::attention, "hidden", "hidden"),
      mod("q_lora_a", Block::attention, "qkv_rank", "hidden"),
      mod("q_lora_b", Block::attention, "hidden", "qkv_rank"),
      mod("k_lora_a", Block::attention, "qkv_rank", "hidden"),
      mod("k_lora_b", Block::attention, "hidden", "qkv_rank"),
      mod("v_lora_a", Block::attention, "qkv_rank", "hidden"),
      mod("v_lora_b", Block::attention, "hidden", "qkv_rank"),
      mod("attn_norm", Block::other, "1", "hidden"),
      mod("up", Block::ffn, "ffn_width", "hidden"),
      mod("gate", Block::ffn, "ffn_width", "hidden"),
      mod("down", Block::ffn, "hidden", "ffn_width"),
      mod("up_lora_a", Block::ffn, "ffn_rank", "hidden"),
      mod("up_lora_b", Block::ffn, "ffn_width", "ffn_rank"),
      mod("gate_lora_a", Block::ffn, "ffn_rank", "hidden"),
      mod("gate_lora_b", Block::ffn, "ffn_width", "ffn_rank"),
      mod("ffn_norm", Block::other, "1", "hidden"),
  };
  d.attention_width = "hidden";
  return d;
}

} // namespace

const std::vector<std::string> &template_names() {
  static const std::vector<std::string> names = {"flexibert", "gpt2", "lonas-bert", "lonas-llama"};
  return names;
}

SearchSpaceDef space_template(std::string_view name) {
  if (name == "flexibert")
    return flexibert();
  if (name == "gpt2")
    return gpt2();
  if (name == "lonas-bert")
    return lonas_bert();
  if (name == "lonas-llama")
    return lonas_llama();
  std::string known;
  for (const auto &n : template_names())
    known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("template", "unknown template '" + std::string(name) + "' (known: " + known + ")");
}

} // namespace zerolm
