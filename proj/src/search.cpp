#include "zerolm/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "zerolm/error.hpp"
#include "zerolm/parallel.hpp"
#include "zerolm/rng.hpp"

namespace zerolm {

namespace {

constexpr std::uint64_t kSearchStream = 0x5ea2c4ULL;

using Rng = std::mt19937_64;

bool coin(Rng &rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

const DimValue &pick(Rng &rng, const std::vector<DimValue> &values) {
  return values[std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng)];
}

std::int64_t layer_count_of(const SearchSpace &space, const ArchitectureSpec &arch) {
  if (const auto &dim = space.layer_count_dim())
    return std::get<std::int64_t>(arch.globals.at(*dim));
  return space.layer_counts().front();
}

// Resizes arch.layers to the count implied by its globals; new layers are
// drawn uniformly.
void fit_layers(const SearchSpace &space, ArchitectureSpec &arch, Rng &rng) {
  const auto count = static_cast<std::size_t>(layer_count_of(space, arch));
  while (arch.layers.size() < count) {
    DimAssignment layer;
    const auto l = static_cast<std::int64_t>(arch.layers.size());
    for (const auto &d : space.layer_dims())
      layer[d.name] = pick(rng, d.allowed_at(l));
    arch.layers.push_back(std::move(layer));
  }
  arch.layers.resize(count);
}

std::pair<ArchitectureSpec, ArchitectureSpec> crossover(const SearchSpace &space,
                                                         const ArchitectureSpec &a,
                                                         const ArchitectureSpec &b, Rng &rng) {
  ArchitectureSpec c1 = a, c2 = b;
  for (const auto &d : space.global_dims())
    if (coin(rng, 0.5))
      std::swap(c1.globals.at(d.name), c2.globals.at(d.name));
  const std::size_t shared = std::min(a.layers.size(), b.layers.size());
  for (std::size_t l = 0; l < shared; ++l)
    for (const auto &d : space.layer_dims())
      if (coin(rng, 0.5))
        std::swap(c1.layers[l].at(d.name), c2.layers[l].at(d.name));
  // A child that took the longer parent's layer count inherits its extra layers.
  auto extend = [&](ArchitectureSpec &child, const ArchitectureSpec &other) {
    const auto count = static_cast<std::size_t>(layer_count_of(space, child));
    for (std::size_t l = child.layers.size(); l < count && l < other.layers.size(); ++l)
      child.layers.push_back(other.layers[l]);
    child.layers.resize(std::min(child.layers.size(), count));
  };
  extend(c1, b);
  extend(c2, a);
  return {std::move(c1), std::move(c2)};
}

void mutate(const SearchSpace &space, ArchitectureSpec &arch, double rate, Rng &rng) {
  for (const auto &d : space.global_dims())
    if (coin(rng, rate))
      arch.globals[d.name] = pick(rng, d.allowed.front());
  fit_layers(space, arch, rng);
  for (std::size_t l = 0; l < arch.layers.size(); ++l)
    for (const auto &d : space.layer_dims())
      if (coin(rng, rate))
        arch.layers[l][d.name] = pick(rng, d.allowed_at(static_cast<std::int64_t>(l)));
}

bool better_in_tournament(const Candidate &a, const Candidate &b) {
  if (a.rank != b.rank)
    return a.rank < b.rank;
  return a.crowding > b.crowding;
}

// Members of `pool` not dominated by any other member, ascending tflops.
std::vector<Candidate> pareto_filter(std::vector<Candidate> pool) {
  std::sort(pool.begin(), pool.end(), [](const Candidate &a, const Candidate &b) {
    if (a.tflops != b.tflops)
      return a.tflops < b.tflops;
    if (a.proxy != b.proxy)
      return a.proxy > b.proxy;
    return a.arch.id < b.arch.id;
  });
  std::vector<Candidate> out;
  double best_before = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size();) {
    std::size_t j = i;
    while (j < pool.size() && pool[j].tflops == pool[i].tflops)
      ++j;
    const double group_best = pool[i].proxy;
    if (group_best > best_before)
      for (std::size_t k = i; k < j && pool[k].proxy == group_best; ++k)
        out.push_back(pool[k]);
    best_before = std::max(best_before, group_best);
    i = j;
  }
  return out;
}

ParetoFront make_front(std::vector<Candidate> pool) {
  ParetoFront front;
  front.members = pareto_filter(std::move(pool));
  const auto crowd = crowding_distance(front.members);
  for (std::size_t i = 0; i < front.members.size(); ++i) {
    front.members[i].rank = 0;
    front.members[i].crowding = crowd[i];
  }
  return front;
}

[[noreturn]] void rethrow_in_generation(std::size_t generation) {
  const std::string where = "generation " + std::to_string(generation) + ": ";
  try {
    throw;
  } catch (const DegenerateInputError &e) {
    throw DegenerateInputError(where + e.what());
  } catch (const NumericalError &e) {
    throw NumericalError(where + e.what());
  } catch (const OverflowError &e) {
    throw OverflowError(where + e.what());
  }
}

GenerationStats stats_of(std::size_t generation, const std::vector<Candidate> &pop) {
  GenerationStats s;
  s.generation = generation;
  std::vector<double> proxies;
  for (const auto &c : pop) {
    proxies.push_back(c.proxy);
    s.feasible += c.feasible() ? 1 : 0;
  }
  std::sort(proxies.begin(), proxies.end());
  const std::size_t n = proxies.size();
  s.best_proxy = proxies.back();
  s.median_proxy = n % 2 ? proxies[n / 2] : 0.5 * (proxies[n / 2 - 1] + proxies[n / 2]);
  return s;
}

// Rank and crowding for every member; returns the fronts.
std::vector<std::vector<std::size_t>> assign_rank_and_crowding(std::vector<Candidate> &pop) {
  auto fronts = nondominated_sort(pop);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    std::vector<Candidate> members;
    for (auto i : fronts[r])
      members.push_back(pop[i]);
    const auto crowd = crowding_distance(members);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      pop[fronts[r][k]].rank = r;
      pop[fronts[r][k]].crowding = crowd[k];
    }
  }
  return fronts;
}

} // namespace

double ParamBounds::violation(std::uint64_t params) const {
  if (params <= low)
    return static_cast<double>(low - params) + 1.0;
  if (params >= high)
    return static_cast<double>(params - high) + 1.0;
  return 0.0;
}

bool dominates(const Candidate &a, const Candidate &b) {
  return a.proxy >= b.proxy && a.tflops <= b.tflops && (a.proxy > b.proxy || a.tflops < b.tflops);
}

bool constrained_dominates(const Candidate &a, const Candidate &b) {
  if (a.feasible() != b.feasible())
    return a.feasible();
  if (!a.feasible())
    return a.violation < b.violation;
  return dominates(a, b);
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Candidate> pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> counts(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        continue;
      if (constrained_dominates(pop[i], pop[j]))
        dominated[i].push_back(j);
      else if (constrained_dominates(pop[j], pop[i]))
        ++counts[i];
    }
    if (counts[i] == 0)
      current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto i : current)
      for (auto j : dominated[i])
        if (--counts[j] == 0)
          next.push_back(j);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const Candidate> front) {
  const std::size_t n = front.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  auto objective = [&](std::size_t i, int m) { return m == 0 ? front[i].proxy : front[i].tflops; };
  for (int m = 0; m < 2; ++m) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
      order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (objective(a, m) != objective(b, m))
        return objective(a, m) < objective(b, m);
      if (objective(a, 1 - m) != objective(b, 1 - m))
        return objective(a, 1 - m) < objective(b, 1 - m);
      return front[a].arch.id < front[b].arch.id;
    });
    const double range = objective(order.back(), m) - objective(order.front(), m);
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    if (range <= 0.0)
      continue;
    for (std::size_t k = 1; k + 1 < n; ++k)
      dist[order[k]] += (objective(order[k + 1], m) - objective(order[k - 1], m)) / range;
  }
  return dist;
}

void SearchConfig::validate() const {
  if (population < 2 || population % 2 != 0)
    throw ValidationError("population", "must be an even number >= 2");
  if (generations < 1)
    throw ValidationError("generations", "must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
    throw ValidationError("crossover_rate", "must lie in [0, 1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
    throw ValidationError("mutation_rate", "must lie in [0, 1]");
  if (!(bounds.low < bounds.high))
    throw ValidationError("param_bounds", "low must be < high");
  if (!std::isfinite(alpha))
    throw ValidationError("alpha", "must be finite");
  if (seq_len < 1)
    throw ValidationError("seq_len", "must be >= 1");
}

Candidate evaluate_candidate(const Scorer &scorer, ArchitectureSpec arch, double alpha,
                             std::int64_t seq_len, const ParamBounds &bounds,
                             bool include_other_params) {
  Candidate c;
  const auto &space = scorer.space();
  c.proxy = combine(scorer.score_blocks(arch), alpha);
  c.tflops = estimate_tflops(space, arch, seq_len);
  c.params = count_params(space, arch, include_other_params);
  c.violation = bounds.violation(c.params);
  c.arch = std::move(arch);
  return c;
}

SearchResult nsga2_search(const Scorer &scorer, const SearchConfig &cfg) {
  cfg.validate();
  const SearchSpace &space = scorer.space();
  Rng rng(stream_seed(cfg.seed, kSearchStream));

  std::map<std::string, Candidate> cache; // every evaluated candidate, by id
  SearchResult result;

  auto evaluate_all = [&](std::vector<ArchitectureSpec> archs, std::size_t generation) {
    std::vector<ArchitectureSpec> fresh;
    std::set<std::string> queued;
    for (auto &a : archs)
      if (!cache.count(a.id) && queued.insert(a.id).second)
        fresh.push_back(a);
    std::vector<Candidate> scored(fresh.size());
    try {
      parallel_for(fresh.size(), cfg.workers, [&](std::size_t i) {
        scored[i] = evaluate_candidate(scorer, fresh[i], cfg.alpha, cfg.seq_len, cfg.bounds,
                                       cfg.include_other_params);
      });
    } catch (...) {
      rethrow_in_generation(generation);
    }
    result.evaluations += scored.size();
    for (auto &c : scored)
      cache.emplace(c.arch.id, std::move(c));
    std::vector<Candidate> out;
    std::set<std::string> seen;
    for (const auto &a : archs)
      if (seen.insert(a.id).second)
        out.push_back(cache.at(a.id));
    return out;
  };

  // Initial population: the whole space when it fits, else unique samples.
  std::vector<ArchitectureSpec> initial;
  if (space_size(space) <= cfg.population) {
    for_each_architecture(space, cfg.population, [&](ArchitectureSpec &&a) { initial.push_back(std::move(a)); });
  } else {
    std::set<std::string> ids;
    for (std::size_t attempt = 0; initial.size() < cfg.population && attempt < 100 * cfg.population;
         ++attempt) {
      auto a = sample_architecture(space, rng());
      if (ids.insert(a.id).second)
        initial.push_back(std::move(a));
    }
  }

  auto feasible_arch = [&](const ArchitectureSpec &a) {
    return cfg.bounds.contains(count_params(space, a, cfg.include_other_params));
  };
  if (std::none_of(initial.begin(), initial.end(), feasible_arch)) {
    bool found = false;
    for (std::size_t attempt = initial.size(); !found && attempt < 10 * cfg.population; ++attempt) {
      auto a = sample_architecture(space, rng());
      if (feasible_arch(a)) {
        initial.back() = std::move(a);
        found = true;
      }
    }
    if (!found)
      throw SetupError("parameter bounds (" + std::to_string(cfg.bounds.low) + ", " +
                       std::to_string(cfg.bounds.high) + ") are infeasible: no sampled candidate of '" +
                       space.name() + "' satisfies them");
  }

  std::vector<Candidate> pop = evaluate_all(std::move(initial), 0);
  assign_rank_and_crowding(pop);
  result.history.push_back(stats_of(0, pop));

  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    auto tournament = [&]() -> const Candidate & {
      std::uniform_int_distribution<std::size_t> idx(0, pop.size() - 1);
      const Candidate &a = pop[idx(rng)];
      const Candidate &b = pop[idx(rng)];
      return better_in_tournament(b, a) ? b : a;
    };
    std::set<std::string> parent_ids;
    for (const auto &c : pop)
      parent_ids.insert(c.arch.id);
    std::vector<ArchitectureSpec> offspring;
    std::set<std::string> offspring_ids;
    for (std::size_t attempt = 0; offspring.size() < cfg.population && attempt < 10 * cfg.population;
         ++attempt) {
      const Candidate &p1 = tournament();
      const Candidate &p2 = tournament();
      auto [c1, c2] = coin(rng, cfg.crossover_rate) ? crossover(space, p1.arch, p2.arch, rng)
                                                    : std::pair{p1.arch, p2.arch};
      for (auto *child : {&c1, &c2}) {
        mutate(space, *child, cfg.mutation_rate, rng);
        finalize_architecture(space, *child);
        if (offspring.size() < cfg.population && !parent_ids.count(child->id) &&
            offspring_ids.insert(child->id).second)
          offspring.push_back(std::move(*child));
      }
    }

    std::vector<ArchitectureSpec> combined_archs;
    for (const auto &c : pop)
      combined_archs.push_back(c.arch);
    for (auto &a : offspring)
      combined_archs.push_back(std::move(a));
    std::vector<Candidate> combined = evaluate_all(std::move(combined_archs), gen);

    auto fronts = assign_rank_and_crowding(combined);
    std::vector<Candidate> next;
    for (const auto &front : fronts) {
      if (next.size() >= cfg.population)
        break;
      std::vector<std::size_t> members = front;
      if (next.size() + members.size() > cfg.population) {
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
          if (combined[a].crowding != combined[b].crowding)
            return combined[a].crowding > combined[b].crowding;
          return combined[a].arch.id < combined[b].arch.id;
        });
        members.resize(cfg.population - next.size());
      }
      for (auto i : members)
        next.push_back(combined[i]);
    }
    pop = std::move(next);
    result.history.push_back(stats_of(gen, pop));
  }

  std::vector<Candidate> archive;
  for (const auto &[id, c] : cache)
    if (c.feasible())
      archive.push_back(c);
  result.front = make_front(std::move(archive));
  return result;
}

ParetoFront exhaustive_pareto(const Scorer &scorer, const ParamBounds &bounds, double alpha,
                              std::int64_t seq_len, std::uint64_t cap, bool include_other_params,
                              unsigned workers) {
  const SearchSpace &space = scorer.space();
  const SpaceSize size = space_size(space);
  if (size > cap)
    throw SetupError("space '" + space.name() + "' has " + size.str() +
                     " architectures, more than the exhaustive cap of " + std::to_string(cap));
  std::vector<ArchitectureSpec> archs;
  for_each_architecture(space, cap, [&](ArchitectureSpec &&a) { archs.push_back(std::move(a)); });
  std::vector<Candidate> all(archs.size());
  parallel_for(archs.size(), workers, [&](std::size_t i) {
    all[i] = evaluate_candidate(scorer, archs[i], alpha, seq_len, bounds, include_other_params);
  });
  std::vector<Candidate> feasible;
  for (auto &c : all)
    if (c.feasible())
      feasible.push_back(std::move(c));
  ParetoFront front = make_front(std::move(feasible));
  if (front.members.empty())
    front.warnings.push_back("no architecture of '" + space.name() + "' satisfies the parameter bounds");
  return front;
}

} // namespace zerolm
