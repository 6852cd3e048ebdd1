#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zerolm/archspace.hpp"
#include "zerolm/capacity.hpp"

namespace zerolm {

/// Open interval low < params < high.
struct ParamBounds {
  std::uint64_t low = 0;
  std::uint64_t high = std::numeric_limits<std::uint64_t>::max();

  bool contains(std::uint64_t params) const { return low < params && params < high; }
  /// Distance outside the interval; 0 when feasible.
  double violation(std::uint64_t params) const;
};

struct Candidate {
  ArchitectureSpec arch;
  double proxy = 0.0;
  double tflops = 0.0;
  std::uint64_t params = 0;
  std::size_t rank = 0;
  double crowding = 0.0;
  double violation = 0.0;

  bool feasible() const { return violation == 0.0; }
};

/// Objective dominance: proxy maximized, tflops minimized.
bool dominates(const Candidate &a, const Candidate &b);

/// Feasible beats infeasible; infeasible candidates compare by violation;
/// feasible ones by dominates().
bool constrained_dominates(const Candidate &a, const Candidate &b);

/// Fronts of indices into `pop`, rank 0 first, each ascending.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Candidate> pop);

/// Boundary members get +infinity; interior members the sum of normalized
/// neighbour gaps over both objectives.
std::vector<double> crowding_distance(std::span<const Candidate> front);

struct SearchConfig {
  std::size_t population = 64;
  std::size_t generations = 50;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  ParamBounds bounds;
  double alpha = 0.5;
  std::uint64_t seed = 0;
  std::int64_t seq_len = 128;
  bool include_other_params = false;
  unsigned workers = 1;

  void validate() const;
};

struct ParetoFront {
  std::vector<Candidate> members; // ascending tflops, then id
  std::vector<std::string> warnings;
};

struct GenerationStats {
  std::size_t generation = 0;
  double best_proxy = 0.0;
  double median_proxy = 0.0;
  std::size_t feasible = 0;
};

struct SearchResult {
  ParetoFront front;
  std::vector<GenerationStats> history;
  std::size_t evaluations = 0;
};

/// Scores one architecture under the run settings.
Candidate evaluate_candidate(const Scorer &scorer, ArchitectureSpec arch, double alpha,
                             std::int64_t seq_len, const ParamBounds &bounds,
                             bool include_other_params = false);

/// NSGA-II over the scorer's space. Every feasible candidate evaluated is
/// kept in an archive; the returned front is the archive's nondominated set.
/// Throws SetupError when no feasible candidate is found among the initial
/// samples.
SearchResult nsga2_search(const Scorer &scorer, const SearchConfig &cfg);

/// Brute-force Pareto set of the whole space. Throws SetupError when the
/// space has more than `cap` architectures.
ParetoFront exhaustive_pareto(const Scorer &scorer, const ParamBounds &bounds, double alpha,
                              std::int64_t seq_len = 128, std::uint64_t cap = 100'000,
                              bool include_other_params = false, unsigned workers = 1);

} // namespace zerolm
