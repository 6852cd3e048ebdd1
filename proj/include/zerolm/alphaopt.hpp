#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace zerolm {

/// Evenly spaced alpha values lo, lo + step, ..., hi.
struct AlphaGrid {
  double lo = -1.5;
  double hi = 1.5;
  double step = 0.1;

  /// Throws ValidationError unless lo < hi and step divides hi - lo.
  void validate() const;
  std::size_t size() const;
  std::vector<double> points() const;

  /// Parses "lo:hi:step".
  static AlphaGrid parse(std::string_view text);
  std::string to_string() const;
};

struct AlphaPoint {
  double alpha = 0.0;
  std::optional<double> tau; // empty where tau is undefined
};

struct AlphaTau {
  double alpha = 0.0;
  double tau = 0.0;
};

enum class AlphaMethod { sampling, heuristic };

std::string_view to_string(AlphaMethod method);

struct HeuristicInputs {
  double tau_ap = 0.0; // attention-only vs #params
  double tau_fp = 0.0; // FFN-only vs #params
  double tau_af = 0.0; // attention-only vs FFN-only

  void validate() const;
};

struct AlphaResult {
  double alpha_star = 0.0;
  AlphaMethod method = AlphaMethod::sampling;
  std::vector<AlphaPoint> grid_curve; // ascending alpha
  AlphaTau top1;
  AlphaTau top2;
  std::vector<std::string> sample_ids;
  std::optional<HeuristicInputs> heuristic;
};

/// Scores every grid alpha by tau(ground_truth, alpha*s_attn + (1-alpha)*s_ffn)
/// and returns the mean of the two best alphas. Equal taus rank the lower
/// alpha first. Grid points with undefined tau are skipped; if all are
/// undefined, throws DegenerateInputError.
AlphaResult optimize_alpha_sampling(std::span<const double> ground_truth,
                                    std::span<const double> s_attn, std::span<const double> s_ffn,
                                    const AlphaGrid &grid = {}, unsigned workers = 1);

struct HeuristicOptions {
  /// Take min/max over |tau_ap|, |tau_fp| instead of the signed values.
  bool absolute = false;
  double tie_epsilon = 1e-9;
};

/// +1 if phi > tau_ap, otherwise -1.
int flag(double phi, double tau_ap);

/// lambda + flag(phi, tau_ap) * phi with
///   lambda = |max(tau_ap, tau_fp) * (1 - tau_af / min(tau_ap, tau_fp))|
///   phi    = (1 - tau_fp) * (1 - tau_ap) + tau_af.
/// Throws DegenerateInputError when the divisor is within tie_epsilon of 0.
double heuristic_alpha(const HeuristicInputs &h, const HeuristicOptions &options = {});

AlphaResult heuristic_result(const HeuristicInputs &h, const HeuristicOptions &options = {});

nlohmann::json to_json(const AlphaResult &result);
nlohmann::json to_json(const HeuristicInputs &h);

} // namespace zerolm
