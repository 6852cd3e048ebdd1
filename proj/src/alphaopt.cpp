#include "zerolm/alphaopt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "zerolm/error.hpp"
#include "zerolm/parallel.hpp"
#include "zerolm/rankstats.hpp"

namespace zerolm {

namespace {

double snap(double a) { return std::round(a * 1e12) / 1e12; }

double parse_number(std::string_view text, const std::string &field) {
  double v = 0.0;
  const auto *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ValidationError(field, "not a number: '" + std::string(text) + "'");
  return v;
}

} // namespace

void AlphaGrid::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw ValidationError("grid", "need finite lo < hi");
  if (!(step > 0.0) || !std::isfinite(step))
    throw ValidationError("grid.step", "must be positive");
  const double intervals = (hi - lo) / step;
  if (std::abs(intervals - std::round(intervals)) > 1e-9 * std::max(1.0, intervals))
    throw ValidationError("grid.step", "does not divide hi - lo");
}

std::size_t AlphaGrid::size() const {
  validate();
  return static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
}

std::vector<double> AlphaGrid::points() const {
  const std::size_t n = size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = snap(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

AlphaGrid AlphaGrid::parse(std::string_view text) {
  const auto a = text.find(':');
  const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos)
    throw ValidationError("grid", "expected lo:hi:step, got '" + std::string(text) + "'");
  AlphaGrid g{parse_number(text.substr(0, a), "grid.lo"),
              parse_number(text.substr(a + 1, b - a - 1), "grid.hi"),
              parse_number(text.substr(b + 1), "grid.step")};
  g.validate();
  return g;
}

std::string AlphaGrid::to_string() const {
  std::ostringstream os;
  os << lo << ':' << hi << ':' << step;
  return os.str();
}

std::string_view to_string(AlphaMethod method) {
  return method == AlphaMethod::sampling ? "sampling" : "heuristic";
}

void HeuristicInputs::validate() const {
  for (auto [name, v] : {std::pair{"tau_ap", tau_ap}, {"tau_fp", tau_fp}, {"tau_af", tau_af}})
    if (!(v >= -1.0 && v <= 1.0))
      throw ValidationError(name, "must lie in [-1, 1]");
}

AlphaResult optimize_alpha_sampling(std::span<const double> ground_truth,
                                    std::span<const double> s_attn, std::span<const double> s_ffn,
                                    const AlphaGrid &grid, unsigned workers) {
  const std::size_t n = ground_truth.size();
  if (s_attn.size() != n || s_ffn.size() != n)
    throw ValidationError("scores", "ground truth, attention and FFN vectors differ in length");
  if (n < 3)
    throw ValidationError("scores", "need at least 3 architectures, got " + std::to_string(n));
  const auto alphas = grid.points();

  AlphaResult result;
  result.method = AlphaMethod::sampling;
  result.grid_curve.resize(alphas.size());
  parallel_for(alphas.size(), workers, [&](std::size_t g) {
    const double a = alphas[g];
    std::vector<double> combined(n);
    for (std::size_t i = 0; i < n; ++i)
      combined[i] = a * s_attn[i] + (1.0 - a) * s_ffn[i];
    result.grid_curve[g].alpha = a;
    try {
      result.grid_curve[g].tau = kendall_tau(ground_truth, combined);
    } catch (const DegenerateInputError &) {
    }
  });

  std::vector<AlphaTau> ranked;
  for (const auto &p : result.grid_curve)
    if (p.tau)
      ranked.push_back({p.alpha, *p.tau});
  if (ranked.empty())
    throw DegenerateInputError("alpha optimization failed: tau is undefined at every grid point");
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const AlphaTau &a, const AlphaTau &b) { return a.tau > b.tau; });
  result.top1 = ranked[0];
  result.top2 = ranked.size() > 1 ? ranked[1] : ranked[0];
  result.alpha_star = (result.top1.alpha + result.top2.alpha) / 2.0;
  return result;
}

int flag(double phi, double tau_ap) { return phi > tau_ap ? 1 : -1; }

double heuristic_alpha(const HeuristicInputs &h, const HeuristicOptions &options) {
  h.validate();
  const double ap = options.absolute ? std::abs(h.tau_ap) : h.tau_ap;
  const double fp = options.absolute ? std::abs(h.tau_fp) : h.tau_fp;
  const double hi = std::max(ap, fp);
  const double lo = std::min(ap, fp);
  if (std::abs(lo) <= options.tie_epsilon) {
    std::ostringstream os;
    os << "heuristic alpha undefined: divisor min(tau_ap, tau_fp) is ~0 (tau_ap=" << h.tau_ap
       << ", tau_fp=" << h.tau_fp << ", tau_af=" << h.tau_af << ")";
    throw DegenerateInputError(os.str());
  }
  const double lambda = std::abs(hi * (1.0 - h.tau_af / lo));
  const double phi = (1.0 - h.tau_fp) * (1.0 - h.tau_ap) + h.tau_af;
  return lambda + flag(phi, h.tau_ap) * phi;
}

AlphaResult heuristic_result(const HeuristicInputs &h, const HeuristicOptions &options) {
  AlphaResult r;
  r.method = AlphaMethod::heuristic;
  r.alpha_star = heuristic_alpha(h, options);
  r.top1 = r.top2 = {r.alpha_star, 0.0};
  r.heuristic = h;
  return r;
}

nlohmann::json to_json(const HeuristicInputs &h) {
  return {{"tau_ap", h.tau_ap}, {"tau_fp", h.tau_fp}, {"tau_af", h.tau_af}};
}

nlohmann::json to_json(const AlphaResult &r) {
  nlohmann::json j;
  j["alpha_star"] = r.alpha_star;
  j["method"] = to_string(r.method);
  if (r.method == AlphaMethod::sampling) {
    j["top1"] = {{"alpha", r.top1.alpha}, {"tau", r.top1.tau}};
    j["top2"] = {{"alpha", r.top2.alpha}, {"tau", r.top2.tau}};
    auto curve = nlohmann::json::array();
    for (const auto &p : r.grid_curve)
      curve.push_back({{"alpha", p.alpha}, {"tau", p.tau ? nlohmann::json(*p.tau) : nlohmann::json()}});
    j["grid_curve"] = std::move(curve);
  }
  if (r.heuristic)
    j["heuristic_inputs"] = to_json(*r.heuristic);
  j["sample_ids"] = r.sample_ids;
  j["tau_variant"] = kTauVariant;
  return j;
}

} // namespace zerolm
