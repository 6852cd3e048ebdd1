#include <doctest.h>

#include <cmath>
#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "zerolm/capacity.hpp"
#include "zerolm/error.hpp"
#include "zerolm/templates.hpp"

using namespace zerolm;
using namespace zerolm::testing;

namespace {

ModuleShape shape(std::int64_t rows, std::int64_t cols, Block block = Block::attention) {
  ModuleShape s;
  s.name = "m";
  s.rows = rows;
  s.cols = cols;
  s.block = block;
  return s;
}

} // namespace

TEST_SUITE("capacity") {

TEST_CASE("module capacity examples") {
  CHECK(module_capacity(Matrix::Identity(3, 3)) == 1.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 4;
  CHECK(module_capacity(d) == 12.5);
  Matrix m(2, 3);
  m << 1, 2, 2, 0, 3, 4;
  CHECK(module_capacity(m) == 17.0);
  CHECK_THROWS_AS(module_capacity(Matrix(0, 3)), ValidationError);
}

TEST_CASE("svd capacity examples") {
  CHECK(module_capacity_svd(Matrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::VectorXd u(4), v(6);
  u << 1, -2, 0.5, 3;
  v << 0.1, 0.2, -1, 2, 0, 1;
  const Matrix outer = u * v.transpose();
  CHECK(module_capacity_svd(outer) ==
        doctest::Approx(u.squaredNorm() * v.squaredNorm() / 4.0).epsilon(1e-12));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1);
  Matrix r(8, 16);
  for (Eigen::Index i = 0; i < r.size(); ++i)
    r.data()[i] = n(rng);
  const double ref = capacity_jacobi(r);
  CHECK(std::abs(module_capacity(r) - ref) <= 1e-9 * ref);
  CHECK(std::abs(module_capacity_svd(r) - ref) <= 1e-9 * ref);
  CHECK_THROWS_AS(module_capacity_svd(Matrix(3, 0)), ValidationError);
}

TEST_CASE("scale law") {
  const auto w = generate_weight(shape(20, 30), {}, 4);
  const double c = module_capacity(w);
  CHECK(module_capacity(3.0 * w) == doctest::Approx(9.0 * c).epsilon(1e-13));
}

TEST_CASE("generated weights are reproducible") {
  WeightInitPolicy p;
  p.seed = 11;
  const auto a = generate_weight(shape(17, 9), p, 3);
  const auto b = generate_weight(shape(17, 9), p, 3);
  CHECK((a.array() == b.array()).all());
  CHECK(!(a.array() == generate_weight(shape(17, 9), p, 4).array()).all());
  p.seed = 12;
  CHECK(!(a.array() == generate_weight(shape(17, 9), p, 3).array()).all());
}

TEST_CASE("constant-std moments") {
  WeightInitPolicy p;
  const auto w = generate_weight(shape(256, 256), p, 0);
  const double n = static_cast<double>(w.size());
  const double mean = w.mean();
  CHECK(std::abs(mean) <= 4.0 * 0.02 / std::sqrt(n));
  const double var = (w.array() - mean).square().sum() / (n - 1);
  CHECK(std::abs(var - 4e-4) <= 0.05 * 4e-4);
}

TEST_CASE("fan-in init gives unit expected capacity when rows <= cols") {
  WeightInitPolicy p;
  p.distribution = InitDistribution::gaussian_fan_in;
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    p.seed = seed;
    sum += sampled_capacity(shape(32, 64), p, 0);
  }
  CHECK(sum / 100.0 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(expected_capacity(shape(32, 64), p) == doctest::Approx(1.0));
}

TEST_CASE("expected capacity matches Monte-Carlo mean") {
  WeightInitPolicy p;
  p.std = 0.05;
  const auto s = shape(24, 40);
  std::vector<double> values;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    p.seed = seed;
    values.push_back(sampled_capacity(s, p, 1));
  }
  double mean = 0.0;
  for (double v : values)
    mean += v;
  mean /= 200.0;
  double var = 0.0;
  for (double v : values)
    var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / 199.0 / 200.0);
  CHECK(std::abs(mean - expected_capacity(s, p)) <= 3.0 * se);
  CHECK(expected_capacity(s, p) == doctest::Approx(24.0 * 40.0 * 0.0025 / 24.0));
}

TEST_CASE("streamed capacity equals materialized capacity") {
  WeightInitPolicy p;
  p.seed = 5;
  for (auto [r, c] : {std::pair{1, 1}, {7, 3}, {64, 100}, {300, 50}}) {
    const auto s = shape(r, c);
    const double direct = module_capacity(generate_weight(s, p, 9));
    CHECK(sampled_capacity(s, p, 9) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("seed stability for large modules") {
  for (auto [r, c] : {std::pair{128, 128}, {128, 512}, {256, 128}}) {
    std::vector<double> v;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      WeightInitPolicy p;
      p.seed = seed;
      v.push_back(sampled_capacity(shape(r, c), p, 0));
    }
    double mean = 0, var = 0;
    for (double x : v)
      mean += x / 10.0;
    for (double x : v)
      var += (x - mean) * (x - mean) / 9.0;
    CHECK(std::sqrt(var) / mean <= 0.02);
  }
}

TEST_CASE("policy validation and description") {
  WeightInitPolicy p;
  p.std = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK(WeightInitPolicy{}.describe() == "gaussian_const_std(std=0.02,seed=0)");
  CHECK(init_distribution_from_string("gaussian_fan_in") == InitDistribution::gaussian_fan_in);
  CHECK_THROWS_AS(init_distribution_from_string("uniform"), ValidationError);
}

TEST_CASE("block scores") {
  SUBCASE("no FFN matrices") {
    SearchSpaceDef d;
    d.name = "attn";
    d.layers = std::int64_t{2};
    d.dimensions = {{"w", true, ints({16}), {}}};
    d.layer_modules = {{"q", Block::attention, "w", "w", "1"}};
    d.attention_width = "w";
    const SearchSpace space(d);
    const auto b = score_blocks(space, sample_architecture(space, 0), {});
    CHECK(b.total_ffn == 0.0);
    CHECK(b.total_attn > 0.0);
    CHECK(b.per_layer_attn.size() == 2);
  }
  SUBCASE("identity weights") {
    const SearchSpace space(encoder_space("enc", SpaceKind::homogeneous, 1, ints({32}), ints({32}), ints({64})));
    Scorer scorer(space, {});
    scorer.set_weight_source([](const ModuleShape &s, std::uint64_t) { return Matrix::Identity(s.rows, s.cols); });
    const auto b = scorer.score_blocks(sample_architecture(space, 0));
    CHECK(b.per_layer_attn.at(0) == 4.0);
    CHECK(b.per_layer_ffn.at(0) == 2.0);
  }
  SUBCASE("totals equal the SVD oracle over generated weights") {
    const SearchSpace space(toy_hetero());
    WeightInitPolicy p;
    p.seed = 3;
    const Scorer scorer(space, p);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto arch = sample_architecture(space, s);
      const auto b = scorer.score_blocks(arch);
      double attn = 0, ffn = 0, sum_layers = 0;
      for (const auto &m : enumerate_shapes(space, arch)) {
        if (m.block == Block::other)
          continue;
        const double c = capacity_jacobi(generate_weight(m, p, m.slot));
        (m.block == Block::attention ? attn : ffn) += c;
      }
      CHECK(std::abs(b.total_attn - attn) <= 1e-9 * attn);
      CHECK(std::abs(b.total_ffn - ffn) <= 1e-9 * ffn);
      for (double v : b.per_layer_attn)
        sum_layers += v;
      CHECK(b.total_attn == sum_layers);
      CHECK(b.per_layer_ffn.size() == static_cast<std::size_t>(arch.num_layers));
    }
  }
}

TEST_CASE("combine") {
  BlockScores b;
  b.per_layer_attn = {4.0, 6.0};
  b.per_layer_ffn = {1.0, 5.0};
  b.total_attn = 10.0;
  b.total_ffn = 6.0;
  CHECK(combine(b, 1.0) == 10.0);
  CHECK(combine(b, 0.0) == 6.0);
  CHECK(combine(b, 0.5) == 8.0);
  for (double a : {-1.5, -0.3, 0.7, 1.2}) {
    double layered = 0.0;
    for (std::size_t l = 0; l < 2; ++l)
      layered += a * b.per_layer_attn[l] + (1 - a) * b.per_layer_ffn[l];
    CHECK(combine(b, a) == doctest::Approx(layered).epsilon(1e-12));
  }
}

TEST_CASE("log complexity") {
  Matrix unit = Matrix::Zero(2, 2);
  unit(0, 0) = 1.0;
  CHECK(log_complexity(std::vector<Matrix>{unit}) == 0.0);
  Matrix e1 = Matrix::Zero(1, 1), e2 = Matrix::Zero(1, 1);
  e1(0, 0) = std::exp(1.0);
  e2(0, 0) = std::exp(2.0);
  CHECK(log_complexity(std::vector<Matrix>{e1, e2}) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK_THROWS_AS(log_complexity(std::vector<Matrix>{Matrix::Zero(2, 2)}), DegenerateInputError);

  const SearchSpace space(toy9());
  const auto arch = sample_architecture(space, 2);
  WeightInitPolicy p;
  double expect = 0.0;
  for (const auto &m : enumerate_shapes(space, arch))
    if (m.block != Block::other)
      expect += std::log(generate_weight(m, p, m.slot).norm());
  CHECK(log_complexity(space, arch, p) == doctest::Approx(expect).epsilon(1e-12));

  Scorer zero(space, p);
  zero.set_weight_source([](const ModuleShape &s, std::uint64_t) { return Matrix::Zero(s.rows, s.cols); });
  CHECK_THROWS_AS(zero.log_complexity(arch), DegenerateInputError);
}

TEST_CASE("lookup table keys") {
  SUBCASE("five FFN widths give five entries per FFN slot") {
    const SearchSpace space(space_template("lonas-llama"));
    const auto keys = plan_lookup_table(space);
    CHECK(keys.size() == 1760);
    std::map<std::uint64_t, std::set<std::int64_t>> widths;
    for (const auto &k : keys)
      if (k.block == Block::ffn)
        widths[k.slot].insert(k.rows == 4096 ? k.cols : k.rows);
    for (const auto &[slot, w] : widths)
      if (w.size() != 2)
        CHECK(w.size() == 5);
  }
  SUBCASE("heterogeneous spaces are rejected") {
    CHECK_THROWS_AS(plan_lookup_table(SearchSpace(space_template("flexibert"))), UnsupportedSpaceError);
  }
  SUBCASE("entry cap") {
    CHECK_THROWS_AS(plan_lookup_table(SearchSpace(space_template("gpt2")), 1000), UnsupportedSpaceError);
  }
}

TEST_CASE("table-backed scoring equals direct scoring") {
  const SearchSpace space(synth_space());
  WeightInitPolicy p;
  p.seed = 21;
  const Scorer direct(space, p);
  Scorer cached(space, p);
  cached.use_lookup_table(std::make_shared<LookupTable>(build_lookup_table(space, p, ScoreMode::sampled, 2)));
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto arch = sample_architecture(space, s);
    const auto a = direct.score_blocks(arch);
    const auto b = cached.score_blocks(arch);
    CHECK(a.total_attn == b.total_attn);
    CHECK(a.total_ffn == b.total_ffn);
    CHECK(a.per_layer_attn == b.per_layer_attn);
  }
  CHECK(cached.weight_generations() == 0);
  CHECK(direct.weight_generations() > 0);

  WeightInitPolicy other = p;
  other.seed = 22;
  Scorer mismatched(space, other);
  CHECK_THROWS_AS(mismatched.use_lookup_table(cached.lookup_table()), ValidationError);
}

TEST_CASE("expected mode") {
  const SearchSpace space(toy9());
  const Scorer scorer(space, {}, ScoreMode::expected);
  CHECK(scorer.describe() == "gaussian_const_std(std=0.02,seed=0)+expected");
  const auto arch = sample_architecture(space, 1);
  double attn = 0.0;
  for (const auto &m : enumerate_shapes(space, arch))
    if (m.block == Block::attention)
      attn += static_cast<double>(std::max(m.rows, m.cols)) * 0.02 * 0.02;
  CHECK(scorer.score_blocks(arch).total_attn == doctest::Approx(attn).epsilon(1e-12));
  CHECK(scorer.weight_generations() == 0);
}

}
