#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "zerolm/alphaopt.hpp"
#include "zerolm/error.hpp"
#include "zerolm/rankstats.hpp"

using namespace zerolm;

using V = std::vector<double>;

TEST_SUITE("alphaopt") {

TEST_CASE("grid") {
  const AlphaGrid g;
  CHECK(g.size() == 31);
  const auto pts = g.points();
  CHECK(pts.front() == -1.5);
  CHECK(pts.back() == 1.5);
  CHECK(pts[15] == 0.0);
  CHECK(pts[18] == 0.3);
  CHECK(AlphaGrid::parse("-1.5:1.5:0.1").size() == 31);
  CHECK(AlphaGrid::parse("0:1:0.25").points() == V{0, 0.25, 0.5, 0.75, 1});
  CHECK_THROWS_AS(AlphaGrid::parse("1:0:0.1"), ValidationError);
  CHECK_THROWS_AS(AlphaGrid::parse("0:1:0.3"), ValidationError);
  CHECK_THROWS_AS(AlphaGrid::parse("0:1"), ValidationError);
  CHECK_THROWS_AS(AlphaGrid::parse("a:1:0.1"), ValidationError);
}

TEST_CASE("attention-only truth peaks at alpha one") {
  V attn, ffn;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 40; ++i) {
    attn.push_back(g(rng));
    ffn.push_back(-attn.back() + 0.3 * g(rng));
  }
  // At alpha = 1 the proxy is the truth itself.
  const auto r = optimize_alpha_sampling(attn, attn, ffn);
  CHECK(r.top1.alpha == doctest::Approx(1.0));
  CHECK(r.top1.tau == 1.0);
  CHECK(r.alpha_star == (r.top1.alpha + r.top2.alpha) / 2);
  CHECK(r.grid_curve.size() == 31);
  for (const auto &p : r.grid_curve)
    if (p.tau && p.alpha != r.top1.alpha && p.alpha != r.top2.alpha)
      CHECK(*p.tau <= r.top2.tau);
}

TEST_CASE("curve matches an explicit sort") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  V truth, attn, ffn;
  for (int i = 0; i < 60; ++i) {
    attn.push_back(g(rng));
    ffn.push_back(g(rng));
    truth.push_back(0.4 * attn.back() + 0.6 * ffn.back() + 0.5 * g(rng));
  }
  const auto r = optimize_alpha_sampling(truth, attn, ffn);
  std::vector<std::pair<double, double>> pairs;
  for (double a : AlphaGrid{}.points()) {
    V s;
    for (std::size_t i = 0; i < attn.size(); ++i)
      s.push_back(a * attn[i] + (1 - a) * ffn[i]);
    pairs.emplace_back(-kendall_tau(truth, s), a);
  }
  std::sort(pairs.begin(), pairs.end());
  CHECK(r.top1.alpha == pairs[0].second);
  CHECK(r.top2.alpha == pairs[1].second);
  CHECK(r.top1.tau >= r.top2.tau);
  CHECK(r.alpha_star >= -1.5);
  CHECK(r.alpha_star <= 1.5);
}

TEST_CASE("ties prefer the lower alpha") {
  // The combined score is (2 - alpha) * attn, so every grid point ties at tau = 1.
  const V attn{1, 2, 3, 4, 5};
  const V ffn{2, 4, 6, 8, 10};
  const V truth{1, 2, 3, 4, 5};
  const auto r = optimize_alpha_sampling(truth, attn, ffn);
  CHECK(r.top1.alpha == -1.5);
  CHECK(r.top2.alpha == -1.4);
  CHECK(r.alpha_star == doctest::Approx(-1.45));
  CHECK(optimize_alpha_sampling(truth, attn, ffn).alpha_star == r.alpha_star);
}

TEST_CASE("failure when tau is undefined everywhere") {
  CHECK_THROWS_AS(optimize_alpha_sampling(V{1, 1, 1}, V{1, 2, 3}, V{3, 1, 2}), DegenerateInputError);
  CHECK_THROWS_AS(optimize_alpha_sampling(V{1, 2}, V{1, 2}, V{1, 2}), ValidationError);
  CHECK_THROWS_AS(optimize_alpha_sampling(V{1, 2, 3}, V{1, 2, 3}, V{1, 2}), ValidationError);
}

TEST_CASE("single defined grid point") {
  // The combined score is constant at alpha = 0.5.
  const V attn{1, 2, 3, 4};
  const V ffn{-1, -2, -3, -4};
  const V truth{4, 1, 3, 2};
  const auto r = optimize_alpha_sampling(truth, attn, ffn, AlphaGrid{0.0, 0.5, 0.5});
  REQUIRE(r.grid_curve.size() == 2);
  CHECK(!r.grid_curve[1].tau.has_value());
  CHECK(r.top1.alpha == 0.0);
  CHECK(r.top2.alpha == 0.0);
  CHECK(r.alpha_star == 0.0);
}

TEST_CASE("joint positive rescaling leaves the result unchanged") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  V truth, attn, ffn, attn2, ffn2;
  for (int i = 0; i < 50; ++i) {
    attn.push_back(1 + g(rng));
    ffn.push_back(2 + g(rng));
    truth.push_back(attn.back() - 0.2 * ffn.back() + 0.1 * g(rng));
    attn2.push_back(4.0 * attn.back());
    ffn2.push_back(4.0 * ffn.back());
  }
  const auto a = optimize_alpha_sampling(truth, attn, ffn);
  const auto b = optimize_alpha_sampling(truth, attn2, ffn2);
  CHECK(a.alpha_star == b.alpha_star);
  CHECK(a.top1.tau == b.top1.tau);
}

TEST_CASE("heuristic worked values") {
  CHECK(heuristic_alpha({0.5, 0.8, 0.4}) == doctest::Approx(-0.34).epsilon(1e-12));
  CHECK(heuristic_alpha({0.2, 0.3, 0.0}) == doctest::Approx(0.86).epsilon(1e-12));
  const double again = heuristic_alpha({0.5, 0.8, 0.4});
  CHECK(heuristic_alpha({0.5, 0.8, 0.4}) == again);
}

TEST_CASE("lambda cancels when tau_af equals the smaller tau") {
  const HeuristicInputs h{0.3, 0.7, 0.3};
  const double phi = (1 - 0.7) * (1 - 0.3) + 0.3;
  CHECK(heuristic_alpha(h) == doctest::Approx(flag(phi, 0.3) * phi).epsilon(1e-15));
}

TEST_CASE("flag boundaries") {
  CHECK(flag(0.6, 0.5) == 1);
  CHECK(flag(0.5, 0.5) == -1);
  CHECK(flag(-0.1, 0.0) == -1);
  CHECK(flag(0.0, -0.0) == -1);
  CHECK(flag(std::nextafter(0.5, 1.0), 0.5) == 1);
  CHECK(flag(std::nextafter(0.5, 0.0), 0.5) == -1);
}

TEST_CASE("heuristic degeneracy") {
  try {
    heuristic_alpha({0.0, 0.5, 0.2});
    FAIL("expected a degeneracy error");
  } catch (const DegenerateInputError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("tau_ap=0") != std::string::npos);
    CHECK(msg.find("tau_fp=0.5") != std::string::npos);
    CHECK(msg.find("tau_af=0.2") != std::string::npos);
  }
  CHECK_THROWS_AS(heuristic_alpha({0.5, 1e-10, 0.2}), DegenerateInputError);
  CHECK_THROWS_AS(heuristic_alpha({1.5, 0.5, 0.2}), ValidationError);
}

TEST_CASE("signed and absolute modes differ for negative taus") {
  const HeuristicInputs h{-0.6, 0.4, 0.1};
  const double signed_lambda = std::abs(0.4 * (1 - 0.1 / -0.6));
  const double abs_lambda = std::abs(0.6 * (1 - 0.1 / 0.4));
  const double phi = (1 - 0.4) * (1 + 0.6) + 0.1;
  CHECK(heuristic_alpha(h) == doctest::Approx(signed_lambda + phi).epsilon(1e-14));
  HeuristicOptions abs;
  abs.absolute = true;
  CHECK(heuristic_alpha(h, abs) == doctest::Approx(abs_lambda + phi).epsilon(1e-14));
}

TEST_CASE("serialization includes the curve") {
  const auto r = optimize_alpha_sampling(V{1, 2, 3, 4}, V{1, 3, 2, 4}, V{4, 3, 2, 1});
  const auto j = to_json(r);
  CHECK(j.at("method") == "sampling");
  CHECK(j.at("grid_curve").size() == 31);
  CHECK(j.at("tau_variant") == "tau-b");
  const auto h = to_json(heuristic_result({0.2, 0.3, 0.0}));
  CHECK(h.at("method") == "heuristic");
  CHECK(h.at("heuristic_inputs").at("tau_fp") == 0.3);
}

}
