#include "zerolm/benchio.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "zerolm/error.hpp"
#include "zerolm/parallel.hpp"
#include "zerolm/rankstats.hpp"
#include "zerolm/rng.hpp"
#include "zerolm/space_io.hpp"

namespace zerolm {

using nlohmann::json;

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kSampleStream = 0x73616d706c65ULL;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

std::string normalize_metric_name(std::string_view name) {
  std::string out;
  for (char c : name)
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const bool ok = !out.empty() && std::islower(static_cast<unsigned char>(out[0])) &&
                  std::all_of(out.begin(), out.end(), [](char c) {
                    return std::islower(static_cast<unsigned char>(c)) ||
                           std::isdigit(static_cast<unsigned char>(c)) || c == '_';
                  });
  if (!ok)
    throw ValidationError("metrics", "invalid metric name '" + std::string(name) + "'");
  return out;
}

std::vector<BenchmarkRecord> parse_benchmark(std::string_view text, const SearchSpace &space,
                                             const std::string &source, std::vector<std::string> *warnings) {
  std::vector<BenchmarkRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::set<std::string> ids;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      const json j = json::parse(line);
      if (!j.is_object())
        throw ValidationError("record", "expected a JSON object");
      if (j.value("schema_version", 0) != kSchemaVersion)
        throw ValidationError("schema_version", "unsupported; expected " + std::to_string(kSchemaVersion));
      if (const auto name = j.value("space", std::string()); name != space.name())
        throw ValidationError("space", "record is for space '" + name + "', not '" + space.name() + "'");
      BenchmarkRecord rec;
      rec.arch = arch_from_json(j);
      validate(space, rec.arch);
      rec.arch.space = space.name();
      if (rec.arch.id.empty())
        rec.arch.id = architecture_id(space.name(), rec.arch);
      if (!ids.insert(rec.arch.id).second)
        throw ValidationError("id", "duplicate architecture id '" + rec.arch.id + "'");
      const auto it = j.find("metrics");
      if (it == j.end() || !it->is_object() || it->empty())
        throw ValidationError("metrics", "record needs at least one metric");
      for (const auto &[name, value] : it->items()) {
        if (!value.is_number())
          throw ValidationError("metrics." + name, "must be a number");
        const double v = value.get<double>();
        if (!std::isfinite(v))
          throw ValidationError("metrics." + name, "must be finite");
        if (!rec.metrics.emplace(normalize_metric_name(name), v).second)
          throw ValidationError("metrics." + name, "duplicate after lowercasing");
      }
      out.push_back(std::move(rec));
    } catch (const json::exception &e) {
      throw ParseError(source, lineno, e.what());
    } catch (const ParseError &) {
      throw;
    } catch (const ValidationError &e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (out.empty() && warnings)
    warnings->push_back("benchmark '" + source + "' contains no records");
  return out;
}

std::vector<BenchmarkRecord> load_benchmark(const std::filesystem::path &path, const SearchSpace &space,
                                            std::vector<std::string> *warnings) {
  return parse_benchmark(read_text_file(path), space, path.string(), warnings);
}

std::string benchmark_to_text(std::string_view space_name, std::span<const BenchmarkRecord> records) {
  std::string text;
  for (const auto &r : records) {
    json j = to_json(r.arch);
    j["space"] = space_name;
    j["schema_version"] = kSchemaVersion;
    j["metrics"] = json::object();
    for (const auto &[name, value] : r.metrics)
      j["metrics"][name] = value;
    text += j.dump() + "\n";
  }
  return text;
}

void save_benchmark(const std::filesystem::path &path, std::string_view space_name,
                    std::span<const BenchmarkRecord> records) {
  write_text_file(path, benchmark_to_text(space_name, records));
}

std::string ProxySpec::name() const {
  switch (kind) {
  case ProxyKind::zerolm: {
    std::ostringstream os;
    os << "zerolm(" << alpha << ")";
    return os.str();
  }
  case ProxyKind::params:
    return "params";
  case ProxyKind::log_complexity:
    return "log_complexity";
  case ProxyKind::attn_only:
    return "attn_only";
  case ProxyKind::ffn_only:
    return "ffn_only";
  }
  return "?";
}

ProxySpec ProxySpec::parse(std::string_view text, double default_alpha) {
  if (text == "params")
    return {ProxyKind::params, default_alpha};
  if (text == "log_complexity")
    return {ProxyKind::log_complexity, default_alpha};
  if (text == "attn_only")
    return {ProxyKind::attn_only, default_alpha};
  if (text == "ffn_only")
    return {ProxyKind::ffn_only, default_alpha};
  if (text == "zerolm")
    return {ProxyKind::zerolm, default_alpha};
  if (text.starts_with("zerolm(") && text.ends_with(")")) {
    const std::string inner(text.substr(7, text.size() - 8));
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(inner, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == inner.size() && used > 0 && std::isfinite(a))
      return {ProxyKind::zerolm, a};
  }
  throw ValidationError("proxy", "unknown proxy '" + std::string(text) +
                                     "' (known: zerolm, zerolm(<alpha>), params, log_complexity, "
                                     "attn_only, ffn_only)");
}

double proxy_score(const Scorer &scorer, const ArchitectureSpec &arch, const ProxySpec &proxy,
                   const ProxyOptions &options) {
  switch (proxy.kind) {
  case ProxyKind::params:
    return static_cast<double>(count_params(scorer.space(), arch, options.include_other_params));
  case ProxyKind::log_complexity:
    return scorer.log_complexity(arch);
  case ProxyKind::attn_only:
    return scorer.score_blocks(arch).total_attn;
  case ProxyKind::ffn_only:
    return scorer.score_blocks(arch).total_ffn;
  case ProxyKind::zerolm:
    break;
  }
  return combine(scorer.score_blocks(arch), proxy.alpha);
}

std::vector<double> metric_values(std::span<const BenchmarkRecord> records, std::string_view metric) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto &r : records) {
    const auto it = r.metrics.find(std::string(metric));
    if (it == r.metrics.end()) {
      std::string known;
      for (const auto &[name, v] : r.metrics)
        known += (known.empty() ? "" : ", ") + name;
      throw ValidationError("metric", "record '" + r.arch.id + "' has no metric '" + std::string(metric) +
                                          "' (available: " + known + ")");
    }
    out.push_back(it->second);
  }
  return out;
}

Evaluation evaluate_proxy(std::span<const BenchmarkRecord> records, const ProxySpec &proxy,
                          std::string_view metric, const Scorer &scorer, const ProxyOptions &options) {
  if (records.size() < 3)
    throw ValidationError("records", "need at least 3 records, got " + std::to_string(records.size()));
  const auto truth = metric_values(records, metric);
  std::vector<double> scores(records.size());
  std::vector<double> seconds(records.size());
  parallel_for(records.size(), options.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    scores[i] = proxy_score(scorer, records[i].arch, proxy, options);
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  Evaluation ev;
  auto &rep = ev.report;
  rep.proxy_name = proxy.name();
  rep.metric_name = std::string(metric);
  rep.n = records.size();
  rep.kt = kendall_tau(truth, scores);
  rep.spr = spearman_rho(truth, scores);
  double total = 0.0;
  for (double s : seconds)
    total += s;
  rep.mean_score_time = total / static_cast<double>(records.size());
  if (proxy.kind == ProxyKind::zerolm)
    rep.alpha = proxy.alpha;
  rep.init_policy = proxy.kind == ProxyKind::params ? "none" : scorer.describe();
  rep.tau_variant = std::string(kTauVariant);

  const auto truth_rank = average_ranks(truth);
  const auto score_rank = average_ranks(scores);
  for (std::size_t i = 0; i < records.size(); ++i)
    ev.scatter.push_back({records[i].arch.id, truth[i], scores[i], truth_rank[i], score_rank[i]});
  return ev;
}

std::string report_csv_header() {
  return "proxy,metric,n,kt,spr,mean_score_time_s,alpha,init_policy,tau_variant";
}

std::string report_csv_row(const CorrelationReport &r) {
  return csv_field(r.proxy_name) + "," + csv_field(r.metric_name) + "," + std::to_string(r.n) + "," +
         format_double(r.kt) + "," + format_double(r.spr) + "," + format_double(r.mean_score_time) + "," +
         (r.alpha ? format_double(*r.alpha) : std::string()) + "," + csv_field(r.init_policy) + "," +
         r.tau_variant;
}

json to_json(const CorrelationReport &r) {
  json j{{"proxy", r.proxy_name},
         {"metric", r.metric_name},
         {"n", r.n},
         {"kt", r.kt},
         {"spr", r.spr},
         {"mean_score_time_s", r.mean_score_time},
         {"init_policy", r.init_policy},
         {"tau_variant", r.tau_variant}};
  j["alpha"] = r.alpha ? json(*r.alpha) : json();
  return j;
}

std::vector<BenchmarkRecord> synth_benchmark(const Scorer &scorer, std::size_t n, double true_alpha,
                                             double noise_sigma, std::uint64_t seed, unsigned workers) {
  if (n < 10)
    throw ValidationError("n", "synthetic benchmarks need at least 10 records");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ValidationError("noise_sigma", "must be a finite non-negative number");
  if (!std::isfinite(true_alpha))
    throw ValidationError("true_alpha", "must be finite");
  const SearchSpace &space = scorer.space();

  std::vector<ArchitectureSpec> archs;
  std::set<std::string> ids;
  for (std::uint64_t attempt = 0; archs.size() < n && attempt < 100 * n; ++attempt) {
    auto a = sample_architecture(space, stream_seed(seed, attempt));
    if (ids.insert(a.id).second)
      archs.push_back(std::move(a));
  }
  if (archs.size() < n)
    throw SetupError("could only sample " + std::to_string(archs.size()) + " distinct architectures of '" +
                     space.name() + "', " + std::to_string(n) + " requested");

  std::vector<double> signal(n);
  parallel_for(n, workers, [&](std::size_t i) { signal[i] = combine(scorer.score_blocks(archs[i]), true_alpha); });
  double mean = 0.0;
  for (double s : signal)
    mean += s;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double s : signal)
    var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));

  std::mt19937_64 rng(stream_seed(seed, kNoiseStream));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<BenchmarkRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = sd > 0.0 ? (signal[i] - mean) / sd : 0.0;
    out[i].arch = std::move(archs[i]);
    out[i].metrics[std::string(kSyntheticMetric)] = z + noise_sigma * noise(rng);
  }
  return out;
}

std::vector<BenchmarkRecord> sample_records(std::span<const BenchmarkRecord> records, std::size_t k,
                                            std::uint64_t seed) {
  std::vector<std::size_t> idx(records.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  std::mt19937_64 rng(stream_seed(seed, kSampleStream));
  const std::size_t take = std::min(k, idx.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<BenchmarkRecord> out;
  for (std::size_t i = 0; i < take; ++i)
    out.push_back(records[idx[i]]);
  return out;
}

AlphaResult tune_alpha_sampling(std::span<const BenchmarkRecord> records, std::string_view metric,
                                const Scorer &scorer, const AlphaGrid &grid, unsigned workers) {
  const auto truth = metric_values(records, metric);
  std::vector<double> attn(records.size()), ffn(records.size());
  parallel_for(records.size(), workers, [&](std::size_t i) {
    const auto b = scorer.score_blocks(records[i].arch);
    attn[i] = b.total_attn;
    ffn[i] = b.total_ffn;
  });
  auto result = optimize_alpha_sampling(truth, attn, ffn, grid, workers);
  for (const auto &r : records)
    result.sample_ids.push_back(r.arch.id);
  return result;
}

HeuristicInputs heuristic_inputs(std::span<const ArchitectureSpec> archs, const Scorer &scorer,
                                 const ProxyOptions &options) {
  if (archs.size() < 10)
    throw ValidationError("k", "the heuristic needs at least 10 architectures, got " +
                                   std::to_string(archs.size()));
  const std::size_t n = archs.size();
  std::vector<double> attn(n), ffn(n), params(n);
  parallel_for(n, options.workers, [&](std::size_t i) {
    const auto b = scorer.score_blocks(archs[i]);
    attn[i] = b.total_attn;
    ffn[i] = b.total_ffn;
    params[i] = static_cast<double>(count_params(scorer.space(), archs[i], options.include_other_params));
  });
  HeuristicInputs h;
  h.tau_ap = kendall_tau(attn, params);
  h.tau_fp = kendall_tau(ffn, params);
  h.tau_af = kendall_tau(attn, ffn);
  return h;
}

HeuristicInputs heuristic_inputs_from_sample(std::span<const BenchmarkRecord> records,
                                             const Scorer &scorer, const ProxyOptions &options) {
  std::vector<ArchitectureSpec> archs;
  archs.reserve(records.size());
  for (const auto &r : records)
    archs.push_back(r.arch);
  return heuristic_inputs(archs, scorer, options);
}

} // namespace zerolm
