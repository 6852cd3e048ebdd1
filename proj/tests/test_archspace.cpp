#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "zerolm/archspace.hpp"
#include "zerolm/error.hpp"
#include "zerolm/space_io.hpp"
#include "zerolm/templates.hpp"

using namespace zerolm;
using namespace zerolm::testing;

namespace {

ArchitectureSpec uniform_arch(const SearchSpace &space, std::int64_t layers, std::int64_t hidden,
                              std::int64_t attn, std::int64_t ffn) {
  ArchitectureSpec a;
  a.num_layers = layers;
  a.globals["hidden"] = hidden;
  for (std::int64_t l = 0; l < layers; ++l)
    a.layers.push_back({{"attn", attn}, {"ffn", ffn}});
  finalize_architecture(space, a);
  return a;
}

SpaceSize pow_size(unsigned base, unsigned exp) {
  SpaceSize r = 1;
  for (unsigned i = 0; i < exp; ++i)
    r *= base;
  return r;
}

} // namespace

TEST_SUITE("archspace") {

TEST_CASE("one encoder layer expands to six scored shapes") {
  const SearchSpace space(encoder_space("enc", SpaceKind::homogeneous, 1, ints({128}), ints({128}), ints({512})));
  const auto arch = uniform_arch(space, 1, 128, 128, 512);
  std::vector<ModuleShape> scored;
  for (const auto &s : enumerate_shapes(space, arch))
    if (s.block != Block::other)
      scored.push_back(s);
  REQUIRE(scored.size() == 6);
  const char *names[] = {"q", "k", "v", "o", "f1", "f2"};
  for (int i = 0; i < 4; ++i) {
    CHECK(scored[i].name == names[i]);
    CHECK(scored[i].rows == 128);
    CHECK(scored[i].cols == 128);
    CHECK(scored[i].block == Block::attention);
  }
  CHECK(scored[4].name == "f1");
  CHECK(scored[4].rows == 512);
  CHECK(scored[4].cols == 128);
  CHECK(scored[5].rows == 128);
  CHECK(scored[5].cols == 512);
  CHECK(scored[5].block == Block::ffn);
  CHECK(count_params(space, arch) == 196608);
}

TEST_CASE("shapes are layer-major and repeat per layer") {
  const SearchSpace space(encoder_space("enc", SpaceKind::homogeneous, 2, ints({128}), ints({128}), ints({512})));
  const auto arch = uniform_arch(space, 2, 128, 128, 512);
  const auto shapes = enumerate_shapes(space, arch);
  std::vector<ModuleShape> scored;
  for (const auto &s : shapes)
    if (s.block != Block::other)
      scored.push_back(s);
  REQUIRE(scored.size() == 12);
  for (std::size_t i = 0; i < 12; ++i)
    CHECK(*scored[i].layer == static_cast<std::int64_t>(i / 6));
  CHECK(shapes.front().block == Block::other);
  CHECK(!shapes.front().layer.has_value());
  CHECK(enumerate_shapes(space, arch) == shapes);
}

TEST_CASE("single matrix parameter count") {
  SearchSpaceDef d;
  d.name = "one";
  d.layers = std::int64_t{1};
  d.dimensions = {{"w", true, ints({128}), {}}};
  d.layer_modules = {{"m", Block::attention, "w", "w", "1"}};
  d.attention_width = "w";
  const SearchSpace space(d);
  const auto arch = sample_architecture(space, 1);
  CHECK(count_params(space, arch) == 16384);
}

TEST_CASE("gpt2 grid expansion") {
  const SearchSpace space(space_template("gpt2"));
  ArchitectureSpec a;
  a.globals = {{"n_layer", std::int64_t{3}}, {"d_model", std::int64_t{256}}, {"d_embed", std::int64_t{256}},
               {"div_val", std::int64_t{1}}};
  for (int l = 0; l < 3; ++l)
    a.layers.push_back({{"d_inner", std::int64_t{1024}}, {"n_head", std::int64_t{4}}});
  finalize_architecture(space, a);
  validate(space, a);
  std::size_t transformer = 0, other = 0;
  for (const auto &s : enumerate_shapes(space, a)) {
    if (s.block == Block::other) {
      ++other;
      continue;
    }
    ++transformer;
    if (s.block == Block::ffn)
      CHECK((s.rows == 1024 || s.cols == 1024));
  }
  CHECK(transformer == 18);
  CHECK(other >= 3);
  CHECK(count_params(space, a) == 3 * (4 * 256 * 256 + 2 * 256 * 1024));
}

TEST_CASE("bert-base parameter count matches closed form") {
  const SearchSpace space(encoder_space("bert", SpaceKind::homogeneous, 12, ints({768}), ints({768}), ints({3072})));
  const auto arch = uniform_arch(space, 12, 768, 768, 3072);
  CHECK(count_params(space, arch) == encoder_params(12, 768, 3072));
  CHECK(count_params(space, arch, true) == encoder_params(12, 768, 3072) + 1000 * 768 + 24 * 768);
}

TEST_CASE("bias counting adds one vector per matrix") {
  auto def = encoder_space("enc", SpaceKind::homogeneous, 1, ints({128}), ints({128}), ints({512}));
  def.count_biases = true;
  const SearchSpace space(def);
  const auto arch = uniform_arch(space, 1, 128, 128, 512);
  CHECK(count_params(space, arch) == 196608 + 4 * 128 + 512 + 128);
}

TEST_CASE("parameter count equals re-summation over scored shapes") {
  for (const auto &name : {"flexibert", "gpt2", "lonas-bert", "lonas-llama"}) {
    const SearchSpace space(space_template(name));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto arch = sample_architecture(space, seed);
      std::uint64_t sum = 0;
      for (const auto &s : enumerate_shapes(space, arch))
        if (s.block != Block::other)
          sum += static_cast<std::uint64_t>(s.rows * s.cols);
      CHECK(count_params(space, arch) == sum);
    }
  }
}

TEST_CASE("tflops estimate") {
  SUBCASE("zero layers") {
    const SearchSpace space(encoder_space("enc", SpaceKind::homogeneous, 0, ints({128}), ints({128}), ints({512})));
    const auto arch = uniform_arch(space, 0, 128, 128, 512);
    CHECK(estimate_tflops(space, arch, 128) == 0.0);
  }
  SUBCASE("closed form for one layer") {
    const SearchSpace space(encoder_space("enc", SpaceKind::homogeneous, 1, ints({128}), ints({128}), ints({512})));
    const auto arch = uniform_arch(space, 1, 128, 128, 512);
    CHECK(estimate_tflops(space, arch, 128) == doctest::Approx(encoder_tflops(1, 128, 512, 128)).epsilon(1e-12));
  }
  SUBCASE("monotone in every dimension") {
    const SearchSpace space(encoder_space("enc", SpaceKind::homogeneous, 2, ints({128, 256}), ints({128, 256}),
                                          ints({512, 1024})));
    const double base = estimate_tflops(space, uniform_arch(space, 2, 128, 128, 512), 64);
    CHECK(estimate_tflops(space, uniform_arch(space, 2, 128, 128, 1024), 64) > base);
    CHECK(estimate_tflops(space, uniform_arch(space, 2, 128, 256, 512), 64) > base);
    CHECK(estimate_tflops(space, uniform_arch(space, 2, 256, 128, 512), 64) > base);
    CHECK(estimate_tflops(space, uniform_arch(space, 2, 128, 128, 512), 65) > base);
  }
  SUBCASE("rejects non-positive sequence length") {
    const SearchSpace space(toy9());
    CHECK_THROWS_AS(estimate_tflops(space, sample_architecture(space, 0), 0), ValidationError);
  }
}

TEST_CASE("sampling") {
  SUBCASE("singleton space") {
    const SearchSpace space(encoder_space("one", SpaceKind::homogeneous, 1, ints({64}), ints({64}), ints({64})));
    const auto a = sample_architecture(space, 1);
    CHECK(sample_architecture(space, 999) == a);
    CHECK(space_size(space) == 1);
  }
  SUBCASE("deterministic and valid") {
    for (const auto &name : template_names()) {
      const SearchSpace space(space_template(name));
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = sample_architecture(space, seed);
        CHECK(sample_architecture(space, seed) == a);
        CHECK_NOTHROW(validate(space, a));
        CHECK(a.id == architecture_id(space.name(), a));
      }
    }
  }
  SUBCASE("two-value dimension is uniform") {
    SearchSpaceDef d;
    d.name = "coin";
    d.layers = std::int64_t{0};
    d.dimensions = {{"c", false, ints({0, 1}), {}}};
  d.attention_width = "0";
    const SearchSpace space(d);
    const int n = 100000;
    int ones = 0;
    for (int i = 0; i < n; ++i)
      ones += std::get<std::int64_t>(sample_architecture(space, static_cast<std::uint64_t>(i)).globals.at("c")) == 1;
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(ones - n / 2.0) <= 3.0 * sigma);
  }
}

TEST_CASE("space sizes") {
  SearchSpaceDef d;
  d.name = "three";
  d.layers = std::int64_t{0};
  d.dimensions = {{"a", false, ints({1, 2, 3}), {}}};
  d.attention_width = "0";
  CHECK(space_size(SearchSpace(d)) == 3);
  CHECK(space_size(SearchSpace(space_template("flexibert"))) == 10621440);
  CHECK(space_size(SearchSpace(space_template("lonas-bert"))) == pow_size(3, 25) * pow_size(2, 11));
  CHECK(space_size(SearchSpace(space_template("lonas-llama"))) == pow_size(2, 64) * pow_size(5, 32));
  CHECK(space_size(SearchSpace(toy9())) == 9);
  CHECK(space_size(SearchSpace(toy_grid())) == 156);
  CHECK(space_size(SearchSpace(toy_hetero())) == 1296);
}

TEST_CASE("space size overflow is reported") {
  SearchSpaceDef d;
  d.name = "huge";
  d.layers = std::int64_t{600};
  d.dimensions = {{"a", true, ints({1, 2}), {}}};
  d.attention_width = "0";
  const SearchSpace space(d);
  CHECK_THROWS_AS(space_size(space), OverflowError);
}

TEST_CASE("enumeration visits every architecture once") {
  const SearchSpace space(toy_grid());
  std::set<std::string> ids;
  for_each_architecture(space, 1000, [&](ArchitectureSpec &&a) {
    CHECK_NOTHROW(validate(space, a));
    ids.insert(a.id);
  });
  CHECK(ids.size() == 156);
  CHECK_THROWS_AS(for_each_architecture(space, 100, [](ArchitectureSpec &&) {}), SetupError);
}

TEST_CASE("validation names the offending dimension") {
  const SearchSpace space(toy_grid());
  auto a = sample_architecture(space, 3);
  a.layers.at(0)["d_inner"] = std::int64_t{100};
  try {
    validate(space, a);
    FAIL("expected a validation error");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("d_inner") != std::string::npos);
  }
  auto b = sample_architecture(space, 3);
  b.globals.erase("d_model");
  CHECK_THROWS_AS(validate(space, b), ValidationError);
  auto c = sample_architecture(space, 3);
  c.layers.pop_back();
  CHECK_THROWS_AS(validate(space, c), ValidationError);
}

TEST_CASE("grammar validation") {
  auto dup = toy9();
  dup.dimensions[0].values = ints({64, 64});
  CHECK_THROWS_AS(SearchSpace{dup}, ValidationError);

  auto empty = toy9();
  empty.dimensions[1].values.clear();
  CHECK_THROWS_AS(SearchSpace{empty}, ValidationError);

  auto unknown = toy9();
  unknown.layer_modules[0].rows = "nope * 2";
  CHECK_THROWS_AS(SearchSpace{unknown}, ValidationError);

  auto bad_expr = toy9();
  bad_expr.layer_modules[0].rows = "hidden * (2";
  CHECK_THROWS_AS(SearchSpace{bad_expr}, ValidationError);

  auto scored_global = toy9();
  scored_global.global_modules[0].block = Block::attention;
  CHECK_THROWS_AS(SearchSpace{scored_global}, ValidationError);
}

TEST_CASE("space files round-trip and match the templates") {
  const auto dir = temp_dir("space");
  for (const auto &name : template_names()) {
    const auto def = space_template(name);
    save_space(dir / (name + ".json"), def);
    const auto loaded = load_space(dir / (name + ".json"));
    CHECK(to_json(loaded.definition()) == to_json(def));
    const auto shipped = std::filesystem::path(ZEROLM_SOURCE_DIR) / "spaces" / (name + ".json");
    CHECK(read_text_file(shipped) == read_text_file(dir / (name + ".json")));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("architecture files round-trip") {
  const SearchSpace space(toy_hetero());
  std::vector<ArchitectureSpec> archs;
  for (std::uint64_t s = 0; s < 10; ++s)
    archs.push_back(sample_architecture(space, s));
  const auto dir = temp_dir("archs");
  save_architectures(dir / "a.jsonl", archs);
  CHECK(load_architectures(dir / "a.jsonl", space) == archs);
  write_text_file(dir / "bad.jsonl", "{\"num_layers\": 4}\n{not json\n");
  try {
    load_architectures(dir / "bad.jsonl", space);
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(load_architectures(dir / "missing.jsonl", space), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown template lists the known ones") {
  try {
    space_template("nope");
    FAIL("expected a validation error");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("lonas-llama") != std::string::npos);
  }
}

}
