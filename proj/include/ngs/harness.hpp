#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ngs/graph.hpp"
#include "ngs/oracle.hpp"
#include "ngs/rng.hpp"
#include "ngs/strategy.hpp"

namespace ngs {

inline constexpr const char* kWorkersEnv = "NGS_WORKERS";

/// Worker count from NGS_WORKERS, else the hardware concurrency.
inline std::size_t default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct GraphSpec {
  GraphKind kind = GraphKind::erdos_renyi;
  std::size_t n = 64;
  GeneratorParams params;
  std::string edge_list;  // read the graph from this file instead of generating
};

enum class OracleKind { noisy, adversarial };

inline OracleKind parse_oracle_kind(std::string_view s) {
  if (s == "noisy") return OracleKind::noisy;
  if (s == "adversarial") return OracleKind::adversarial;
  throw std::invalid_argument("unknown oracle '" + std::string(s) + "'");
}

struct ExperimentSpec {
  GraphSpec graph;
  std::optional<double> epsilon;
  std::optional<double> p;
  std::vector<Policy> policies{Policy::exact_median};
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  ConstantScale scale;
  std::string out;
  bool verify = false;
  bool record_timing = true;  // off: timing columns stay empty, rows are byte-reproducible
  std::size_t workers = 0;    // 0: default_workers()
  OracleKind oracle = OracleKind::noisy;
  ErrorModel error_model = ErrorModel::uniform_wrong;
  TieBreak tie_break = TieBreak::uniform_random;
  AdversaryPolicy adversary = AdversaryPolicy::greedy_heavy;

  /// epsilon, or 1/2 - p; the default is epsilon = 0.2.
  double resolved_epsilon() const {
    if (epsilon && p && std::abs(*epsilon - (0.5 - *p)) > 1e-12)
      throw std::invalid_argument("epsilon and p disagree: epsilon must equal 1/2 - p");
    if (epsilon) return *epsilon;
    if (p) return 0.5 - *p;
    return 0.2;
  }

  void validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (policies.empty()) throw std::invalid_argument("at least one policy is required");
    if (graph.edge_list.empty() && graph.n < 1) throw std::invalid_argument("n must be at least 1");
    double eps = resolved_epsilon();
    if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("epsilon must lie in (0, 1/2]");
    if (!(scale.tau > 0.0 && scale.s > 0.0)) throw std::invalid_argument("scales must be positive");
  }
};

// ---------------------------------------------------------------------------
// JSON config

inline void from_json(const nlohmann::json& j, ExperimentSpec& spec) {
  if (j.contains("graph")) {
    const auto& g = j.at("graph");
    if (g.is_string()) {
      spec.graph.kind = parse_graph_kind(g.get<std::string>());
    } else {
      if (g.contains("kind")) spec.graph.kind = parse_graph_kind(g.at("kind").get<std::string>());
      if (g.contains("n")) spec.graph.n = g.at("n").get<std::size_t>();
      if (g.contains("edge_probability")) spec.graph.params.edge_probability = g.at("edge_probability").get<double>();
      if (g.contains("degree")) spec.graph.params.degree = g.at("degree").get<std::size_t>();
      if (g.contains("rows")) spec.graph.params.rows = g.at("rows").get<std::size_t>();
      if (g.contains("edge_list")) spec.graph.edge_list = g.at("edge_list").get<std::string>();
    }
  }
  if (j.contains("n")) spec.graph.n = j.at("n").get<std::size_t>();
  if (j.contains("epsilon")) spec.epsilon = j.at("epsilon").get<double>();
  if (j.contains("p")) spec.p = j.at("p").get<double>();
  if (j.contains("policy")) {
    spec.policies.clear();
    const auto& pol = j.at("policy");
    if (pol.is_array()) {
      for (const auto& x : pol) spec.policies.push_back(parse_policy(x.get<std::string>()));
    } else if (pol.get<std::string>() == "all") {
      spec.policies = {Policy::exact_median, Policy::global_sampled, Policy::local_search};
    } else {
      spec.policies.push_back(parse_policy(pol.get<std::string>()));
    }
  }
  if (j.contains("trials")) spec.trials = j.at("trials").get<std::size_t>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("scale_tau")) spec.scale.tau = j.at("scale_tau").get<double>();
  if (j.contains("scale_s")) spec.scale.s = j.at("scale_s").get<double>();
  if (j.contains("out")) spec.out = j.at("out").get<std::string>();
  if (j.contains("verify")) spec.verify = j.at("verify").get<bool>();
  if (j.contains("record_timing")) spec.record_timing = j.at("record_timing").get<bool>();
  if (j.contains("workers")) spec.workers = j.at("workers").get<std::size_t>();
  if (j.contains("oracle")) spec.oracle = parse_oracle_kind(j.at("oracle").get<std::string>());
  if (j.contains("error_model")) spec.error_model = parse_error_model(j.at("error_model").get<std::string>());
  if (j.contains("tie_break")) spec.tie_break = parse_tie_break(j.at("tie_break").get<std::string>());
  if (j.contains("adversary")) spec.adversary = parse_adversary_policy(j.at("adversary").get<std::string>());
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config '" + path + "': " + e.what());
  }
  ExperimentSpec spec;
  from_json(j, spec);
  return spec;
}

// ---------------------------------------------------------------------------
// Rows

struct ResultRow {
  std::string graph_kind;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t diameter = 0;
  std::size_t max_degree = 0;
  std::string policy;
  double epsilon = 0.0;
  double p = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Vertex target = 0;
  Vertex answer = 0;
  bool success = false;
  std::size_t queries = 0;
  std::size_t tau = 0;
  std::size_t s = 0;
  std::size_t errors = 0;
  std::size_t total_resampled = 0;
  double mean_resampled = 0.0;
  std::size_t total_local_iterations = 0;
  std::optional<double> mean_query_seconds;
  std::optional<double> p95_query_seconds;
  std::optional<std::size_t> violations;  // verify mode only
  std::string error;                      // non-empty on a failed cell
};

inline const char* kCsvHeader =
    "graph_kind,n,m,diameter,max_degree,policy,epsilon,p,trial,seed,target,answer,success,"
    "queries,tau,s,errors,total_resampled,mean_resampled,total_local_iterations,"
    "mean_query_seconds,p95_query_seconds,violations,error";

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

}  // namespace detail

inline void write_csv_row(std::ostream& out, const ResultRow& r) {
  auto opt = [](const std::optional<double>& x) { return x ? detail::fmt("%.6e", *x) : std::string(); };
  out << r.graph_kind << ',' << r.n << ',' << r.m << ',' << r.diameter << ',' << r.max_degree << ','
      << r.policy << ',' << detail::fmt("%.6g", r.epsilon) << ',' << detail::fmt("%.6g", r.p) << ','
      << r.trial << ',' << r.seed << ',' << r.target << ',' << r.answer << ',' << (r.success ? 1 : 0)
      << ',' << r.queries << ',' << r.tau << ',' << r.s << ',' << r.errors << ','
      << r.total_resampled << ',' << detail::fmt("%.4f", r.mean_resampled) << ','
      << r.total_local_iterations << ',' << opt(r.mean_query_seconds) << ','
      << opt(r.p95_query_seconds) << ','
      << (r.violations ? std::to_string(*r.violations) : std::string()) << ','
      << detail::csv_escape(r.error) << '\n';
}

// ---------------------------------------------------------------------------
// Cells

/// Seed of one trial; graph, target, oracle and sample streams derive from it.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  return make_stream(master, trial, stream_tag::trial)();
}

inline Graph build_graph(const GraphSpec& spec, std::uint64_t seed) {
  if (!spec.edge_list.empty()) {
    std::ifstream in(spec.edge_list);
    if (!in) throw GraphError("cannot open edge list '" + spec.edge_list + "'");
    return read_edge_list(in);
  }
  return generate(spec.kind, spec.n, spec.params, seed);
}

struct StepDump {
  std::size_t trial = 0;
  Policy policy = Policy::exact_median;
  const StepRecord* step = nullptr;
  const WeightState* weights = nullptr;
  const Sample* sample = nullptr;
};

using DumpSink = std::function<void(const StepDump&)>;

inline double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size()))) - 1;
  k = std::min(k, xs.size() - 1);
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k), xs.end());
  return xs[k];
}

/// All policies of one trial, on one graph and target.
inline std::vector<ResultRow> run_trial(const ExperimentSpec& spec, std::size_t trial,
                                        const DumpSink& dump = {}) {
  const double eps = spec.resolved_epsilon();
  const std::uint64_t seed = trial_seed(spec.seed, trial);
  std::vector<ResultRow> rows;
  auto blank = [&](Policy policy) {
    ResultRow r;
    r.graph_kind = spec.graph.edge_list.empty() ? std::string(to_string(spec.graph.kind)) : "edge-list";
    r.n = spec.graph.n;
    r.policy = std::string(to_string(policy));
    r.epsilon = eps;
    r.p = 0.5 - eps;
    r.trial = trial;
    r.seed = seed;
    return r;
  };

  std::optional<Graph> graph;
  try {
    graph.emplace(build_graph(spec.graph, seed));
  } catch (const std::exception& e) {
    for (Policy policy : spec.policies) {
      rows.push_back(blank(policy));
      rows.back().error = e.what();
    }
    return rows;
  }
  const Graph& g = *graph;
  Rng target_rng = make_stream(seed, 0, stream_tag::target);
  const Vertex target = static_cast<Vertex>(
      std::uniform_int_distribution<std::size_t>(0, g.order() - 1)(target_rng));

  for (Policy policy : spec.policies) {
    ResultRow r = blank(policy);
    r.n = g.order();
    r.m = g.size();
    r.diameter = g.diameter();
    r.max_degree = g.max_degree();
    r.target = target;
    try {
      StrategyConfig cfg = derive_config(eps, g.order(), policy, seed, spec.scale);
      r.tau = cfg.tau;
      r.s = cfg.s;
      std::vector<double> seconds;
      RunOptions opts;
      opts.verify = spec.verify;
      opts.keep_steps = spec.verify;
      if (spec.record_timing) seconds.reserve(cfg.tau);
      opts.observer = [&](const StepRecord& rec, const WeightState& w, const Sample* sample) {
        if (spec.record_timing) seconds.push_back(rec.seconds);
        if (dump) dump(StepDump{trial, policy, &rec, &w, sample});
      };
      SearchTranscript tr;
      if (spec.oracle == OracleKind::noisy) {
        NoisyOracle oracle(g, target, {cfg.p, spec.tie_break, spec.error_model},
                           make_stream(seed, 0, stream_tag::oracle));
        tr = lb_search(g, g.distances(), oracle, cfg, opts);
      } else {
        AdversarialOracle::Options ao;
        ao.policy = spec.adversary;
        ao.budget = cfg.lie_budget();
        ao.horizon = cfg.tau;
        AdversarialOracle oracle(g, target, ao, make_stream(seed, 0, stream_tag::adversary));
        tr = lb_search(g, g.distances(), oracle, cfg, opts);
      }
      r.answer = tr.answer;
      r.success = tr.success;
      r.queries = tr.queries;
      r.errors = tr.errors;
      r.total_resampled = tr.total_resampled;
      r.mean_resampled = tr.queries ? static_cast<double>(tr.total_resampled) / static_cast<double>(tr.queries) : 0.0;
      r.total_local_iterations = tr.total_local_iterations;
      if (spec.record_timing && !seconds.empty()) {
        r.mean_query_seconds = tr.total_seconds / static_cast<double>(tr.queries);
        r.p95_query_seconds = percentile(seconds, 0.95);
      }
      if (spec.verify) {
        std::size_t v = tr.checks.violations() + check_potential_drop(tr, cfg).violations();
        if (policy == Policy::local_search && !iteration_accounting_holds(tr, cfg, g.diameter())) ++v;
        r.violations = v;
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Runs every (trial, policy) cell on a bounded worker pool. Rows reach
/// `sink` in trial order through a single collector, one trial at a time.
inline void run_experiment(const ExperimentSpec& spec,
                           const std::function<void(const ResultRow&)>& sink,
                           const DumpSink& dump = {}) {
  spec.validate();
  std::size_t workers = spec.workers ? spec.workers : default_workers();
  if (dump) workers = 1;
  workers = std::min(workers, spec.trials);

  if (workers <= 1) {
    for (std::size_t t = 0; t < spec.trials; ++t)
      for (const auto& row : run_trial(spec, t, dump)) sink(row);
    return;
  }

  std::vector<std::optional<std::vector<ResultRow>>> done(spec.trials);
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t; (t = next.fetch_add(1)) < spec.trials;) {
        auto rows = run_trial(spec, t);
        std::lock_guard lock(mu);
        done[t] = std::move(rows);
        ready.notify_all();
      }
    });
  }
  for (std::size_t t = 0; t < spec.trials; ++t) {
    std::vector<ResultRow> rows;
    {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return done[t].has_value(); });
      rows = std::move(*done[t]);
      done[t].reset();
    }
    for (const auto& row : rows) sink(row);
  }
  for (auto& th : pool) th.join();
}

inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  std::vector<ResultRow> rows;
  run_experiment(spec, [&](const ResultRow& r) { rows.push_back(r); });
  return rows;
}

/// Streams rows to `out` as CSV, flushing after every row.
inline void run_experiment_csv(const ExperimentSpec& spec, std::ostream& out,
                               const DumpSink& dump = {}) {
  out << kCsvHeader << '\n';
  out.flush();
  run_experiment(
      spec,
      [&](const ResultRow& r) {
        write_csv_row(out, r);
        out.flush();
      },
      dump);
}

inline nlohmann::json dump_to_json(const StepDump& d) {
  nlohmann::json j;
  j["trial"] = d.trial;
  j["policy"] = to_string(d.policy);
  j["step"] = d.step->step;
  j["query"] = d.step->query;
  j["reply"] = d.step->reply;
  j["reply_error"] = d.step->reply_error;
  j["resampled"] = d.step->resampled;
  j["omega"] = std::vector<double>(d.weights->omega().begin(), d.weights->omega().end());
  j["lies"] = std::vector<std::uint32_t>(d.weights->lies().begin(), d.weights->lies().end());
  if (d.sample) {
    j["sample_counts"] =
        std::vector<std::uint32_t>(d.sample->counts().begin(), d.sample->counts().end());
  }
  return j;
}

}  // namespace ngs
