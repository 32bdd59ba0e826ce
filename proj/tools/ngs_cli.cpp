// Command-line front end: graph generation, experiment runs, verification
// suites and scaling benchmarks.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "ngs/bench.hpp"
#include "ngs/graph.hpp"
#include "ngs/harness.hpp"
#include "ngs/verify.hpp"

namespace {

using namespace ngs;

std::vector<Policy> parse_policies(const std::vector<std::string>& names) {
  std::vector<Policy> out;
  for (const auto& name : names) {
    if (name == "all") return {Policy::exact_median, Policy::global_sampled, Policy::local_search};
    out.push_back(parse_policy(name));
  }
  return out;
}

/// stdout when `path` is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct GenerateArgs {
  std::string graph = "erdos-renyi-connected";
  std::size_t n = 64;
  std::uint64_t seed = 0;
  double edge_probability = 0;
  std::size_t degree = 0;
  std::size_t rows = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  GeneratorParams params;
  if (a.edge_probability > 0) params.edge_probability = a.edge_probability;
  if (a.degree > 0) params.degree = a.degree;
  if (a.rows > 0) params.rows = a.rows;
  Graph g = generate(parse_graph_kind(a.graph), a.n, params, a.seed);
  Output out(a.out);
  write_edge_list(out.stream(), g);
  std::cerr << "generated " << a.graph << ": n=" << g.order() << " m=" << g.size()
            << " diameter=" << g.diameter() << " max_degree=" << g.max_degree() << '\n';
  return 0;
}

struct RunArgs {
  std::string config;
  std::string graph;
  std::size_t n = 0;
  double epsilon = 0;
  double p = 0;
  std::vector<std::string> policies;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double scale_tau = 0;
  double scale_s = 0;
  std::string out;
  bool verify = false;
  bool bench = false;
  std::size_t workers = 0;
  std::string oracle;
  std::string adversary;
  std::string error_model;
  std::string tie_break;
  std::string edge_list;
  bool no_timing = false;
  std::string report;
  std::string dump;
};

int cmd_run(const RunArgs& a, const CLI::App& app) {
  ExperimentSpec spec;
  if (!a.config.empty()) spec = load_spec(a.config);
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  if (given("--graph")) spec.graph.kind = parse_graph_kind(a.graph);
  if (given("--n")) spec.graph.n = a.n;
  if (given("--edge-list")) spec.graph.edge_list = a.edge_list;
  if (given("--epsilon")) spec.epsilon = a.epsilon;
  if (given("--p")) spec.p = a.p;
  if (given("--epsilon") && !given("--p")) spec.p.reset();
  if (given("--p") && !given("--epsilon")) spec.epsilon.reset();
  if (given("--policy")) spec.policies = parse_policies(a.policies);
  if (given("--trials")) spec.trials = a.trials;
  if (given("--seed")) spec.seed = a.seed;
  if (given("--scale-tau")) spec.scale.tau = a.scale_tau;
  if (given("--scale-s")) spec.scale.s = a.scale_s;
  if (given("--out")) spec.out = a.out;
  if (a.verify) spec.verify = true;
  if (given("--workers")) spec.workers = a.workers;
  if (given("--oracle")) spec.oracle = parse_oracle_kind(a.oracle);
  if (given("--adversary")) spec.adversary = parse_adversary_policy(a.adversary);
  if (given("--error-model")) spec.error_model = parse_error_model(a.error_model);
  if (given("--tie-break")) spec.tie_break = parse_tie_break(a.tie_break);
  if (a.no_timing) spec.record_timing = false;
  if (a.bench) {
    spec.workers = 1;
    spec.record_timing = true;
  }
  spec.validate();

  std::unique_ptr<std::ofstream> dump_file;
  DumpSink dump;
  if (!a.dump.empty()) {
    dump_file = std::make_unique<std::ofstream>(a.dump);
    if (!*dump_file) throw std::runtime_error("cannot open '" + a.dump + "' for writing");
    dump = [&](const StepDump& d) { *dump_file << dump_to_json(d).dump() << '\n'; };
  }

  Output out(spec.out);
  std::size_t rows = 0, successes = 0, failed_cells = 0, violations = 0;
  out.stream() << kCsvHeader << '\n';
  run_experiment(
      spec,
      [&](const ResultRow& r) {
        write_csv_row(out.stream(), r);
        out.stream().flush();
        ++rows;
        successes += r.success;
        failed_cells += !r.error.empty();
        violations += r.violations.value_or(0);
      },
      dump);

  nlohmann::json summary{{"rows", rows},
                         {"successes", successes},
                         {"failed_cells", failed_cells},
                         {"epsilon", spec.resolved_epsilon()},
                         {"verify", spec.verify}};
  if (spec.verify) summary["violations"] = violations;
  if (!a.report.empty()) {
    Output rep(a.report);
    rep.stream() << summary.dump(2) << '\n';
  }
  std::cerr << summary.dump() << '\n';
  if (failed_cells > 0) return 2;
  return violations > 0 ? 1 : 0;
}

struct VerifyArgs {
  std::vector<std::string> suites;
  bool quick = false;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  auto wanted = [&](const std::string& name) {
    return a.suites.empty() || std::find(a.suites.begin(), a.suites.end(), name) != a.suites.end();
  };
  const bool q = a.quick;
  std::vector<SuiteResult> results;
  if (wanted("median")) results.push_back(verify_median_bisection(q ? 6 : 7, q ? 5 : 50, a.seed));
  if (wanted("local-min")) results.push_back(verify_local_min_lambda(q ? 100 : 1000, a.seed + 1));
  if (wanted("closeness")) {
    auto c = verify_sampled_closeness(128, 0.05, q ? 20 : 200, 199.0 / 200.0, a.seed + 2);
    results.push_back(c.global);
    results.push_back(c.local);
  }
  if (wanted("marginal")) results.push_back(verify_resample_marginal(100000, 0.01, a.seed + 3));
  if (wanted("adversarial")) {
    AdversarialOptions o;
    o.trials = q ? 3 : 100;
    o.n = q ? 16 : 64;
    o.seed = a.seed + 4;
    results.push_back(verify_adversarial(o));
  }
  if (wanted("transcripts")) {
    for (Policy p : {Policy::exact_median, Policy::global_sampled, Policy::local_search}) {
      EndToEndOptions o;
      o.policy = p;
      o.n = q ? 16 : 64;
      o.trials = q ? 2 : 10;
      o.seed = a.seed + 5;
      if (q) o.scale = {0.25, 0.25};
      auto st = run_end_to_end(o);
      for (auto& s : transcript_suites(st, std::string(to_string(p)))) results.push_back(std::move(s));
    }
  }
  for (const auto& r : results)
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.instances << " instances, "
              << r.violations << " violations)\n";
  Output out(a.out);
  out.stream() << verification_report(results).dump(2) << '\n';
  return verification_exit_code(results);
}

struct BenchArgs {
  std::string graph = "erdos-renyi-connected";
  std::vector<std::size_t> ns{256, 512, 1024, 2048, 4096};
  std::vector<std::string> policies{"global-sampled"};
  double epsilon = 0.2;
  std::size_t trials = 1;
  std::uint64_t seed = 7;
  double scale_tau = 1.0;
  double scale_s = 1.0;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  BenchOptions o;
  o.kind = parse_graph_kind(a.graph);
  o.ns = a.ns;
  o.policies = parse_policies(a.policies);
  o.epsilon = a.epsilon;
  o.trials = a.trials;
  o.seed = a.seed;
  o.scale = {a.scale_tau, a.scale_s};
  BenchResult r = bench_scaling(o);
  for (const auto& pt : r.points)
    std::fprintf(stderr, "%-16s n=%-6zu mean=%.3e s p95=%.3e s runs=%zu\n",
                 std::string(to_string(pt.policy)).c_str(), pt.n, pt.mean_query_seconds,
                 pt.p95_query_seconds, pt.runs);
  for (auto [p, s] : r.slopes)
    std::fprintf(stderr, "%-16s log-log slope %.3f\n", std::string(to_string(p)).c_str(), s);
  Output out(a.out);
  out.stream() << to_json(r).dump(2) << '\n';
  return 0;
}

struct MedianArgs {
  std::size_t max_n = 7;
  std::size_t weights = 50;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_verify_median(const MedianArgs& a) {
  auto r = verify_median_bisection(a.max_n, a.weights, a.seed);
  Output out(a.out);
  out.stream() << verification_report({r}).dump(2) << '\n';
  std::cerr << (r.passed ? "PASS" : "FAIL") << ": " << r.instances << " weightings, "
            << r.violations << " violations, " << r.seconds << " s\n";
  return verification_exit_code({r});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy binary search on graphs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Write a generated graph as an edge list");
  generate_cmd->add_option("--graph", gen.graph, "Graph kind")->capture_default_str();
  generate_cmd->add_option("--n", gen.n, "Number of vertices")->capture_default_str();
  generate_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  generate_cmd->add_option("--edge-probability", gen.edge_probability, "Erdos-Renyi edge probability");
  generate_cmd->add_option("--degree", gen.degree, "Random-regular degree");
  generate_cmd->add_option("--rows", gen.rows, "Grid rows");
  generate_cmd->add_option("--out", gen.out, "Output file (default stdout)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run search trials and write CSV rows");
  run_cmd->add_option("--config", run.config, "JSON experiment config")->check(CLI::ExistingFile);
  run_cmd->add_option("--graph", run.graph, "Graph kind");
  run_cmd->add_option("--n", run.n, "Number of vertices");
  run_cmd->add_option("--edge-list", run.edge_list, "Read the graph from an edge-list file");
  auto* eps_opt = run_cmd->add_option("--epsilon", run.epsilon, "Noise margin, p = 1/2 - epsilon");
  auto* p_opt = run_cmd->add_option("--p", run.p, "Error probability");
  eps_opt->excludes(p_opt);
  run_cmd->add_option("--policy", run.policies, "exact-median, global-sampled, local-search or all");
  run_cmd->add_option("--trials", run.trials, "Trials");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--scale-tau", run.scale_tau, "Multiplier on the query budget");
  run_cmd->add_option("--scale-s", run.scale_s, "Multiplier on the sample size");
  run_cmd->add_option("--out", run.out, "CSV output (default stdout)");
  run_cmd->add_flag("--verify", run.verify, "Per-step bookkeeping and invariant checks");
  run_cmd->add_flag("--bench", run.bench, "Timing run: one worker, timing columns on");
  run_cmd->add_option("--workers", run.workers, std::string("Worker threads (default $") + kWorkersEnv + ")");
  run_cmd->add_option("--oracle", run.oracle, "noisy or adversarial");
  run_cmd->add_option("--adversary", run.adversary, "greedy-heavy, random-schedule or fixed-schedule");
  run_cmd->add_option("--error-model", run.error_model, "uniform-wrong or adversarial-wrong");
  run_cmd->add_option("--tie-break", run.tie_break, "uniform-random, lowest-id or adversarial-weight");
  run_cmd->add_flag("--no-timing", run.no_timing, "Leave timing columns empty");
  run_cmd->add_option("--report", run.report, "JSON summary output");
  run_cmd->add_option("--dump", run.dump, "JSONL per-step weights, lies and sample counts");

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run verification suites, JSON report");
  verify_cmd->add_option("--suite", ver.suites,
                         "median, local-min, closeness, marginal, adversarial, transcripts");
  verify_cmd->add_flag("--quick", ver.quick, "Reduced instance counts");
  verify_cmd->add_option("--seed", ver.seed, "Master seed")->capture_default_str();
  verify_cmd->add_option("--out", ver.out, "Report output (default stdout)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Per-query time against n, log-log slope");
  bench_cmd->add_option("--graph", bench.graph, "Graph kind")->capture_default_str();
  bench_cmd->add_option("--ns", bench.ns, "Values of n (at least 3)")->capture_default_str();
  bench_cmd->add_option("--policy", bench.policies, "Policies")->capture_default_str();
  bench_cmd->add_option("--epsilon", bench.epsilon, "Noise margin")->capture_default_str();
  bench_cmd->add_option("--trials", bench.trials, "Trials per n")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Master seed")->capture_default_str();
  bench_cmd->add_option("--scale-tau", bench.scale_tau, "Multiplier on the query budget");
  bench_cmd->add_option("--scale-s", bench.scale_s, "Multiplier on the sample size");
  bench_cmd->add_option("--out", bench.out, "JSON output (default stdout)");

  MedianArgs med;
  auto* median_cmd = app.add_subcommand("verify-median", "Exhaustive median bisection check");
  median_cmd->add_option("--max-n", med.max_n, "Largest graph order (at most 7)")
      ->check(CLI::Range(1, 7))
      ->capture_default_str();
  median_cmd->add_option("--weights", med.weights, "Weight vectors per graph")->capture_default_str();
  median_cmd->add_option("--seed", med.seed, "Seed")->capture_default_str();
  median_cmd->add_option("--out", med.out, "Report output (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate_cmd) return cmd_generate(gen);
    if (*run_cmd) return cmd_run(run, *run_cmd);
    if (*verify_cmd) return cmd_verify(ver);
    if (*bench_cmd) return cmd_bench(bench);
    if (*median_cmd) return cmd_verify_median(med);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
