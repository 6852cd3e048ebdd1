#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "zerolm/alphaopt.hpp"
#include "zerolm/archspace.hpp"
#include "zerolm/benchio.hpp"
#include "zerolm/capacity.hpp"
#include "zerolm/error.hpp"
#include "zerolm/parallel.hpp"
#include "zerolm/rng.hpp"
#include "zerolm/search.hpp"
#include "zerolm/space_io.hpp"
#include "zerolm/templates.hpp"

namespace zerolm::cli {

using nlohmann::json;

namespace {

constexpr const char *kToolVersion = "0.1.0";
// Element budget under which `--lookup auto` precomputes module scores.
constexpr double kAutoLookupBudget = 2e8;

struct SpaceOpts {
  std::string file;
  std::string template_name;
};

struct PolicyOpts {
  std::string init = "gaussian_const_std";
  double std = 0.02;
  std::uint64_t seed = 0;
  std::string mode = "sampled";
};

struct Common {
  SpaceOpts space;
  PolicyOpts policy;
  unsigned workers = 1;
  std::string manifest_path;
  bool include_other = false;
};

void add_space_opts(CLI::App *cmd, SpaceOpts &o) {
  auto *f = cmd->add_option("--space", o.file, "Search-space file");
  auto *t = cmd->add_option("--template", o.template_name, "Built-in space template");
  f->excludes(t);
  t->excludes(f);
}

void add_common(CLI::App *cmd, Common &c, bool with_space = true) {
  if (with_space)
    add_space_opts(cmd, c.space);
  cmd->add_option("--init", c.policy.init, "Weight init: gaussian_const_std | gaussian_fan_in")
      ->capture_default_str();
  cmd->add_option("--std", c.policy.std, "Standard deviation of gaussian_const_std")->capture_default_str();
  cmd->add_option("--seed", c.policy.seed, "Random seed")->capture_default_str();
  cmd->add_option("--mode", c.policy.mode, "Scoring mode: sampled | expected")->capture_default_str();
  cmd->add_option("--workers", c.workers, "Worker threads (default from ZEROLM_WORKERS)");
  cmd->add_option("--manifest", c.manifest_path, "Write the run manifest to this file");
  cmd->add_flag("--include-other", c.include_other, "Count embedding and norm matrices in #params");
}

SearchSpaceDef resolve_space_def(const SpaceOpts &o) {
  if (!o.template_name.empty())
    return space_template(o.template_name);
  if (!o.file.empty())
    return load_space(o.file).definition();
  throw ValidationError("space", "pass --space FILE or --template NAME");
}

WeightInitPolicy make_policy(const PolicyOpts &o) {
  WeightInitPolicy p;
  p.distribution = init_distribution_from_string(o.init);
  p.std = o.std;
  p.seed = o.seed;
  p.validate();
  return p;
}

ScoreMode make_mode(const std::string &mode) {
  if (mode == "sampled")
    return ScoreMode::sampled;
  if (mode == "expected")
    return ScoreMode::expected;
  throw ValidationError("mode", "unknown scoring mode '" + mode + "' (known: sampled, expected)");
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
public:
  Manifest(std::string command, json config) : command_(std::move(command)), config_(std::move(config)) {
    started_ = iso_now();
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(command_ + "\n" + config_.dump())));
    id_ = std::string("run-") + hex;
  }

  const std::string &id() const { return id_; }

  void write(const std::string &path) const {
    if (path.empty())
      return;
    json j{{"schema_version", kSchemaVersion},
           {"kind", "manifest"},
           {"manifest_id", id_},
           {"command", command_},
           {"config", config_},
           {"tool_version", kToolVersion},
           {"started", started_},
           {"finished", iso_now()}};
    write_text_file(path, j.dump(2) + "\n");
  }

private:
  std::string command_;
  json config_;
  std::string id_;
  std::string started_;
};

json policy_config(const Common &c, const Scorer &scorer) {
  return {{"init_policy", scorer.describe()},
          {"init", c.policy.init},
          {"std", c.policy.std},
          {"seed", c.policy.seed},
          {"mode", c.policy.mode},
          {"log_complexity_norm", "frobenius"},
          {"include_other_params", c.include_other}};
}

void emit(const std::string &text, const std::string &path, std::ostream &out) {
  if (path.empty())
    out << text;
  else
    write_text_file(path, text);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Builds the lookup table when requested ("on"), or when cheap enough ("auto").
bool maybe_use_lookup(Scorer &scorer, const std::string &choice, unsigned workers, std::ostream &err) {
  if (choice == "off")
    return false;
  if (choice != "on" && choice != "auto")
    throw ValidationError("lookup", "expected auto, on or off");
  std::vector<ModuleKey> keys;
  try {
    keys = plan_lookup_table(scorer.space());
  } catch (const UnsupportedSpaceError &e) {
    if (choice == "on")
      throw;
    return false;
  }
  if (choice == "auto" && scorer.mode() == ScoreMode::sampled) {
    double elements = 0.0;
    for (const auto &k : keys)
      elements += static_cast<double>(k.rows) * static_cast<double>(k.cols);
    if (elements > kAutoLookupBudget) {
      err << "note: lookup table skipped (" << keys.size() << " entries, too costly to precompute)\n";
      return false;
    }
  }
  scorer.use_lookup_table(std::make_shared<LookupTable>(
      build_lookup_table(scorer.space(), scorer.policy(), scorer.mode(), workers)));
  return true;
}

std::vector<ArchitectureSpec> sample_unique(const SearchSpace &space, std::size_t n, std::uint64_t seed,
                                            std::ostream &err) {
  std::vector<ArchitectureSpec> archs;
  std::set<std::string> ids;
  for (std::uint64_t attempt = 0; archs.size() < n && attempt < 100 * static_cast<std::uint64_t>(n); ++attempt) {
    auto a = sample_architecture(space, stream_seed(seed, attempt));
    if (ids.insert(a.id).second)
      archs.push_back(std::move(a));
  }
  if (archs.size() < n)
    err << "warning: only " << archs.size() << " distinct architectures sampled of " << n << " requested\n";
  return archs;
}

// ---------------------------------------------------------------------------

struct ScoreOpts {
  Common common;
  std::string archs_file;
  std::optional<std::size_t> sample;
  double alpha = 0.5;
  std::int64_t seq_len = 128;
  bool timing = false;
  bool lookup = false;
  std::string format = "jsonl";
  std::string out_path;
};

int cmd_score(const ScoreOpts &o, std::ostream &out, std::ostream &err) {
  const SearchSpace space(resolve_space_def(o.common.space));
  Scorer scorer(space, make_policy(o.common.policy), make_mode(o.common.policy.mode));
  if (o.format != "jsonl" && o.format != "csv")
    throw ValidationError("format", "expected jsonl or csv");
  if (o.archs_file.empty() == !o.sample.has_value())
    throw ValidationError("input", "pass exactly one of --archs FILE or --sample N");

  std::vector<ArchitectureSpec> archs =
      o.sample ? sample_unique(space, *o.sample, o.common.policy.seed, err) : load_architectures(o.archs_file, space);
  if (o.lookup)
    maybe_use_lookup(scorer, "on", o.common.workers, err);

  json config = policy_config(o.common, scorer);
  config["space"] = space.name();
  config["alpha"] = o.alpha;
  config["seq_len"] = o.seq_len;
  config["lookup_table"] = o.lookup;
  config["input"] = o.sample ? json{{"sample", *o.sample}} : json{{"archs", o.archs_file}};
  const Manifest manifest("score", config);

  struct Row {
    BlockScores blocks;
    double tflops = 0.0;
    std::uint64_t params = 0;
    std::int64_t micros = 0;
  };
  std::vector<Row> rows(archs.size());
  parallel_for(archs.size(), o.common.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    rows[i].blocks = scorer.score_blocks(archs[i]);
    rows[i].micros = std::chrono::duration_cast<std::chrono::microseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    rows[i].params = count_params(space, archs[i], o.common.include_other);
    rows[i].tflops = estimate_tflops(space, archs[i], o.seq_len);
  });
  std::vector<std::size_t> order(archs.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return archs[a].id < archs[b].id; });

  std::string text;
  if (o.format == "csv") {
    text += "# manifest=" + manifest.id() + "\n";
    text += std::string("id,s_attn,s_ffn,s_proxy,params,tflops") + (o.timing ? ",micros" : "") + "\n";
  }
  for (auto i : order) {
    const auto &r = rows[i];
    const double proxy = combine(r.blocks, o.alpha);
    if (o.format == "csv") {
      text += archs[i].id + "," + fmt(r.blocks.total_attn) + "," + fmt(r.blocks.total_ffn) + "," + fmt(proxy) +
              "," + std::to_string(r.params) + "," + fmt(r.tflops) +
              (o.timing ? "," + std::to_string(r.micros) : "") + "\n";
    } else {
      json j{{"id", archs[i].id},
             {"s_attn", r.blocks.total_attn},
             {"s_ffn", r.blocks.total_ffn},
             {"s_proxy", proxy},
             {"alpha", o.alpha},
             {"per_layer_attn", r.blocks.per_layer_attn},
             {"per_layer_ffn", r.blocks.per_layer_ffn},
             {"params", r.params},
             {"tflops", r.tflops},
             {"policy", scorer.describe()},
             {"manifest", manifest.id()}};
      if (o.timing)
        j["micros"] = r.micros;
      text += j.dump() + "\n";
    }
  }
  emit(text, o.out_path, out);
  manifest.write(o.common.manifest_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalOpts {
  Common common;
  std::string bench;
  std::string proxy = "zerolm";
  std::string metric;
  double alpha = 0.5;
  std::string scatter_path;
  std::string format = "json";
  std::string out_path;
};

int cmd_eval(const EvalOpts &o, std::ostream &out, std::ostream &err) {
  const SearchSpace space(resolve_space_def(o.common.space));
  const Scorer scorer(space, make_policy(o.common.policy), make_mode(o.common.policy.mode));
  if (o.format != "json" && o.format != "csv")
    throw ValidationError("format", "expected json or csv");
  const auto proxy = ProxySpec::parse(o.proxy, o.alpha);
  std::vector<std::string> warnings;
  const auto records = load_benchmark(o.bench, space, &warnings);
  for (const auto &w : warnings)
    err << "warning: " << w << "\n";
  const std::string metric = normalize_metric_name(o.metric);

  json config = policy_config(o.common, scorer);
  config["space"] = space.name();
  config["benchmark"] = o.bench;
  config["proxy"] = proxy.name();
  config["metric"] = metric;
  const Manifest manifest("eval", config);

  const auto ev = evaluate_proxy(records, proxy, metric, scorer, {o.common.include_other, o.common.workers});
  if (o.format == "csv") {
    emit("# manifest=" + manifest.id() + "\n" + report_csv_header() + "\n" + report_csv_row(ev.report) + "\n",
         o.out_path, out);
  } else {
    json j = to_json(ev.report);
    j["manifest"] = manifest.id();
    emit(j.dump() + "\n", o.out_path, out);
  }
  if (!o.scatter_path.empty()) {
    std::string text = "# manifest=" + manifest.id() + "\nid,metric,score,metric_rank,proxy_rank\n";
    for (const auto &p : ev.scatter)
      text += p.id + "," + fmt(p.metric) + "," + fmt(p.score) + "," + fmt(p.metric_rank) + "," +
              fmt(p.proxy_rank) + "\n";
    write_text_file(o.scatter_path, text);
  }
  manifest.write(o.common.manifest_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TuneOpts {
  Common common;
  std::string method = "sampling";
  std::string bench;
  std::string metric;
  std::size_t k = 50;
  std::string grid = "-1.5:1.5:0.1";
  std::string curve_path;
  bool absolute = false;
  std::string out_path;
};

int cmd_tune_alpha(const TuneOpts &o, std::ostream &out, std::ostream &err) {
  const SearchSpace space(resolve_space_def(o.common.space));
  const Scorer scorer(space, make_policy(o.common.policy), make_mode(o.common.policy.mode));
  const AlphaGrid grid = AlphaGrid::parse(o.grid);
  if (o.method != "sampling" && o.method != "heuristic")
    throw ValidationError("method", "expected sampling or heuristic");

  std::vector<BenchmarkRecord> records;
  if (!o.bench.empty()) {
    std::vector<std::string> warnings;
    records = load_benchmark(o.bench, space, &warnings);
    for (const auto &w : warnings)
      err << "warning: " << w << "\n";
  }

  json config = policy_config(o.common, scorer);
  config["space"] = space.name();
  config["method"] = o.method;
  config["k"] = o.k;
  config["benchmark"] = o.bench;
  config["sample_without_replacement"] = true;
  if (o.method == "sampling") {
    config["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"step", grid.step}};
    config["metric"] = o.metric;
  } else {
    config["absolute"] = o.absolute;
  }
  const Manifest manifest("tune-alpha", config);

  AlphaResult result;
  if (o.method == "sampling") {
    if (o.bench.empty() || o.metric.empty())
      throw ValidationError("method", "sampling needs a benchmark with ground truth (--bench FILE --metric NAME); "
                                      "use --method heuristic to tune alpha from the space alone");
    const std::string metric = normalize_metric_name(o.metric);
    const auto subset = sample_records(records, o.k, o.common.policy.seed);
    result = tune_alpha_sampling(subset, metric, scorer, grid, o.common.workers);
  } else {
    const ProxyOptions popts{o.common.include_other, o.common.workers};
    HeuristicInputs h;
    std::vector<std::string> ids;
    if (!records.empty()) {
      const auto subset = sample_records(records, o.k, o.common.policy.seed);
      h = heuristic_inputs_from_sample(subset, scorer, popts);
      for (const auto &r : subset)
        ids.push_back(r.arch.id);
    } else {
      const auto archs = sample_unique(space, o.k, o.common.policy.seed, err);
      h = heuristic_inputs(archs, scorer, popts);
      for (const auto &a : archs)
        ids.push_back(a.id);
    }
    HeuristicOptions hopts;
    hopts.absolute = o.absolute;
    result = heuristic_result(h, hopts);
    result.sample_ids = std::move(ids);
  }

  json j = to_json(result);
  j["manifest"] = manifest.id();
  emit(j.dump() + "\n", o.out_path, out);
  if (!o.curve_path.empty()) {
    std::string text = "# manifest=" + manifest.id() + "\nalpha,tau\n";
    for (const auto &p : result.grid_curve)
      text += fmt(p.alpha) + "," + (p.tau ? fmt(*p.tau) : std::string()) + "\n";
    write_text_file(o.curve_path, text);
  }
  manifest.write(o.common.manifest_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SearchOpts {
  Common common;
  double alpha = 0.5;
  std::size_t pop = 64;
  std::size_t gens = 50;
  std::uint64_t params_low = 0;
  std::uint64_t params_high = std::numeric_limits<std::uint64_t>::max();
  std::int64_t seq_len = 128;
  double crossover = 0.9;
  double mutation = 0.1;
  std::string lookup = "auto";
  std::string front_path;
  std::string history_path;
  bool quiet = false;
};

int cmd_search(const SearchOpts &o, std::ostream &out, std::ostream &err) {
  const SearchSpace space(resolve_space_def(o.common.space));
  Scorer scorer(space, make_policy(o.common.policy), make_mode(o.common.policy.mode));
  SearchConfig cfg;
  cfg.population = o.pop;
  cfg.generations = o.gens;
  cfg.crossover_rate = o.crossover;
  cfg.mutation_rate = o.mutation;
  cfg.bounds = {o.params_low, o.params_high};
  cfg.alpha = o.alpha;
  cfg.seed = o.common.policy.seed;
  cfg.seq_len = o.seq_len;
  cfg.include_other_params = o.common.include_other;
  cfg.workers = o.common.workers;
  cfg.validate();
  const bool table = maybe_use_lookup(scorer, o.lookup, o.common.workers, err);

  json config = policy_config(o.common, scorer);
  config["space"] = space.name();
  config["alpha"] = o.alpha;
  config["population"] = o.pop;
  config["generations"] = o.gens;
  config["crossover_rate"] = o.crossover;
  config["mutation_rate"] = o.mutation;
  config["param_bounds"] = {o.params_low, o.params_high};
  config["seq_len"] = o.seq_len;
  config["lookup_table"] = table;
  config["ga_operators"] = {{"selection", "binary tournament (rank, crowding)"},
                            {"crossover", "uniform per dimension"},
                            {"mutation", "uniform resample per dimension"},
                            {"constraints", "feasibility-first domination"},
                            {"defaults", "artifact choices"}};
  const Manifest manifest("search", config);

  const auto result = nsga2_search(scorer, cfg);
  std::string front;
  for (const auto &c : result.front.members) {
    json a = to_json(c.arch);
    front += json{{"id", c.arch.id},
                  {"arch", a},
                  {"proxy", c.proxy},
                  {"tflops", c.tflops},
                  {"params", c.params},
                  {"manifest", manifest.id()}}
                 .dump() +
             "\n";
  }
  emit(front, o.front_path, out);
  if (!o.history_path.empty()) {
    std::string text = "# manifest=" + manifest.id() + "\ngeneration,best_proxy,median_proxy,feasible\n";
    for (const auto &h : result.history)
      text += std::to_string(h.generation) + "," + fmt(h.best_proxy) + "," + fmt(h.median_proxy) + "," +
              std::to_string(h.feasible) + "\n";
    write_text_file(o.history_path, text);
  }
  if (!o.quiet) {
    err << "pareto front: " << result.front.members.size() << " members, " << result.evaluations
        << " evaluations\n";
    err << std::left << std::setw(34) << "id" << std::setw(16) << "proxy" << std::setw(14) << "tflops"
        << "params\n";
    for (const auto &c : result.front.members)
      err << std::left << std::setw(34) << c.arch.id << std::setw(16) << c.proxy << std::setw(14) << c.tflops
          << c.params << "\n";
  }
  manifest.write(o.common.manifest_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GenSpaceOpts {
  std::string template_name;
  std::string out_path;
};

int cmd_gen_space(const GenSpaceOpts &o, std::ostream &out) {
  const auto def = space_template(o.template_name);
  const SearchSpace space(def);
  if (o.out_path.empty()) {
    out << to_json(def).dump(2) << "\n";
  } else {
    save_space(o.out_path, def);
    out << json{{"template", o.template_name},
                {"space", space.name()},
                {"kind", to_string(space.kind())},
                {"space_size", space_size(space).str()},
                {"file", o.out_path}}
               .dump()
        << "\n";
  }
  return kExitOk;
}

struct GenSynthOpts {
  Common common;
  std::size_t n = 100;
  double true_alpha = 0.3;
  double noise = 0.0;
  std::string out_path;
};

int cmd_gen_synth(const GenSynthOpts &o, std::ostream &out) {
  const SearchSpace space(resolve_space_def(o.common.space));
  const Scorer scorer(space, make_policy(o.common.policy), make_mode(o.common.policy.mode));
  const auto records = synth_benchmark(scorer, o.n, o.true_alpha, o.noise, o.common.policy.seed, o.common.workers);
  json config = policy_config(o.common, scorer);
  config["space"] = space.name();
  config["n"] = o.n;
  config["true_alpha"] = o.true_alpha;
  config["noise_sigma"] = o.noise;
  const Manifest manifest("gen synth", config);
  emit(benchmark_to_text(space.name(), records), o.out_path, out);
  manifest.write(o.common.manifest_path);
  return kExitOk;
}

struct InfoOpts {
  SpaceOpts space;
};

int cmd_info(const InfoOpts &o, std::ostream &out) {
  const SearchSpace space(resolve_space_def(o.space));
  json j{{"space", space.name()},
         {"kind", to_string(space.kind())},
         {"space_size", space_size(space).str()},
         {"layer_counts", space.layer_counts()}};
  json dims = json::array();
  for (const auto *group : {&space.global_dims(), &space.layer_dims()})
    for (const auto &d : *group)
      dims.push_back({{"name", d.name}, {"layer_scoped", d.layer_scoped}, {"choices", d.allowed.front().size()}});
  j["dimensions"] = std::move(dims);
  try {
    j["lookup_entries"] = plan_lookup_table(space).size();
  } catch (const UnsupportedSpaceError &) {
    j["lookup_entries"] = nullptr;
  }
  out << j.dump() << "\n";
  return kExitOk;
}

} // namespace

int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const IoError *>(&e))
    return kExitIo;
  if (dynamic_cast<const DegenerateInputError *>(&e) || dynamic_cast<const NumericalError *>(&e) ||
      dynamic_cast<const OverflowError *>(&e))
    return kExitDegenerate;
  if (dynamic_cast<const Error *>(&e))
    return kExitUsage;
  return kExitIo;
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Data-free capacity proxy for Transformer architecture search", "zerolm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  const unsigned workers = default_workers();

  ScoreOpts score;
  score.common.workers = workers;
  auto *score_cmd = app.add_subcommand("score", "Score architectures");
  add_common(score_cmd, score.common);
  score_cmd->add_option("--archs", score.archs_file, "Architecture file (one record per line)");
  score_cmd->add_option("--sample", score.sample, "Score N sampled architectures");
  score_cmd->add_option("--alpha", score.alpha, "Attention weight alpha")->capture_default_str();
  score_cmd->add_option("--seq-len", score.seq_len, "Sequence length for TFLOPs")->capture_default_str();
  score_cmd->add_flag("--timing", score.timing, "Add per-architecture scoring micros");
  score_cmd->add_flag("--lookup", score.lookup, "Precompute module scores");
  score_cmd->add_option("--format", score.format, "jsonl | csv")->capture_default_str();
  score_cmd->add_option("--out", score.out_path, "Output file (default stdout)");

  EvalOpts eval;
  eval.common.workers = workers;
  auto *eval_cmd = app.add_subcommand("eval", "Correlate a proxy with benchmark ground truth");
  add_common(eval_cmd, eval.common);
  eval_cmd->add_option("--bench", eval.bench, "Benchmark file")->required();
  eval_cmd->add_option("--proxy", eval.proxy, "zerolm | zerolm(<alpha>) | params | log_complexity | "
                                              "attn_only | ffn_only")
      ->capture_default_str();
  eval_cmd->add_option("--metric", eval.metric, "Ground-truth metric name")->required();
  eval_cmd->add_option("--alpha", eval.alpha, "Alpha for the zerolm proxy")->capture_default_str();
  eval_cmd->add_option("--scatter", eval.scatter_path, "Write per-record rank scatter CSV");
  eval_cmd->add_option("--format", eval.format, "json | csv")->capture_default_str();
  eval_cmd->add_option("--out", eval.out_path, "Output file (default stdout)");

  TuneOpts tune;
  tune.common.workers = workers;
  auto *tune_cmd = app.add_subcommand("tune-alpha", "Tune the attention/FFN balance alpha");
  add_common(tune_cmd, tune.common);
  tune_cmd->add_option("--method", tune.method, "sampling | heuristic")->capture_default_str();
  tune_cmd->add_option("--bench", tune.bench, "Benchmark file");
  tune_cmd->add_option("--metric", tune.metric, "Ground-truth metric name (sampling)");
  tune_cmd->add_option("--k", tune.k, "Number of sampled architectures")->capture_default_str();
  tune_cmd->add_option("--grid", tune.grid, "Alpha grid lo:hi:step")->capture_default_str();
  tune_cmd->add_option("--curve", tune.curve_path, "Write the alpha/tau curve CSV");
  tune_cmd->add_flag("--absolute", tune.absolute, "Heuristic min/max over absolute taus");
  tune_cmd->add_option("--out", tune.out_path, "Output file (default stdout)");

  SearchOpts search;
  search.common.workers = workers;
  auto *search_cmd = app.add_subcommand("search", "NSGA-II search: maximize proxy, minimize TFLOPs");
  add_common(search_cmd, search.common);
  search_cmd->add_option("--alpha", search.alpha, "Attention weight alpha")->capture_default_str();
  search_cmd->add_option("--pop", search.pop, "Population size (even)")->capture_default_str();
  search_cmd->add_option("--gens", search.gens, "Generations")->capture_default_str();
  search_cmd->add_option("--params-low", search.params_low, "Exclusive lower #params bound")->capture_default_str();
  search_cmd->add_option("--params-high", search.params_high, "Exclusive upper #params bound");
  search_cmd->add_option("--seq-len", search.seq_len, "Sequence length for TFLOPs")->capture_default_str();
  search_cmd->add_option("--crossover", search.crossover, "Crossover rate")->capture_default_str();
  search_cmd->add_option("--mutation", search.mutation, "Per-dimension mutation rate")->capture_default_str();
  search_cmd->add_option("--lookup", search.lookup, "auto | on | off")->capture_default_str();
  search_cmd->add_option("--front", search.front_path, "Front file (default stdout)");
  search_cmd->add_option("--history", search.history_path, "Per-generation history CSV");
  search_cmd->add_flag("--quiet", search.quiet, "No summary table on stderr");

  auto *gen_cmd = app.add_subcommand("gen", "Generate space files and synthetic benchmarks");
  gen_cmd->require_subcommand(1);
  GenSpaceOpts gen_space;
  auto *gen_space_cmd = gen_cmd->add_subcommand("space", "Write a built-in space template");
  gen_space_cmd->add_option("--template", gen_space.template_name, "flexibert | gpt2 | lonas-bert | lonas-llama")
      ->required();
  gen_space_cmd->add_option("--out", gen_space.out_path, "Output file (default stdout)");
  GenSynthOpts gen_synth;
  gen_synth.common.workers = workers;
  auto *gen_synth_cmd = gen_cmd->add_subcommand("synth", "Write a synthetic benchmark");
  add_common(gen_synth_cmd, gen_synth.common);
  gen_synth_cmd->add_option("--n", gen_synth.n, "Number of records")->capture_default_str();
  gen_synth_cmd->add_option("--true-alpha", gen_synth.true_alpha, "Alpha of the ground truth")->capture_default_str();
  gen_synth_cmd->add_option("--noise", gen_synth.noise, "Noise sigma (standardized units)")->capture_default_str();
  gen_synth_cmd->add_option("--out", gen_synth.out_path, "Output file (default stdout)");

  InfoOpts info;
  auto *info_cmd = app.add_subcommand("info", "Describe a search space");
  add_space_opts(info_cmd, info.space);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (score_cmd->parsed())
      return cmd_score(score, out, err);
    if (eval_cmd->parsed())
      return cmd_eval(eval, out, err);
    if (tune_cmd->parsed())
      return cmd_tune_alpha(tune, out, err);
    if (search_cmd->parsed())
      return cmd_search(search, out, err);
    if (gen_space_cmd->parsed())
      return cmd_gen_space(gen_space, out);
    if (gen_synth_cmd->parsed())
      return cmd_gen_synth(gen_synth, out);
    if (info_cmd->parsed())
      return cmd_info(info, out);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  std::vector<const char *> argv{"zerolm"};
  for (const auto &a : args)
    argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace zerolm::cli
