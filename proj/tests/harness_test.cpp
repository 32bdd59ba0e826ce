#include "ngs/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ngs/bench.hpp"
#include "ngs/verify.hpp"

namespace ngs {
namespace {

std::string csv_of(const ExperimentSpec& spec) {
  std::ostringstream out;
  run_experiment_csv(spec, out);
  return out.str();
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

TEST(Workers, EnvironmentOverride) {
  ::setenv(kWorkersEnv, "3", 1);
  EXPECT_EQ(default_workers(), 3u);
  ::setenv(kWorkersEnv, "zero", 1);
  EXPECT_GE(default_workers(), 1u);
  ::unsetenv(kWorkersEnv);
  EXPECT_GE(default_workers(), 1u);
}

TEST(ExperimentSpec, EpsilonAndP) {
  ExperimentSpec spec;
  EXPECT_DOUBLE_EQ(spec.resolved_epsilon(), 0.2);
  spec.p = 0.3;
  EXPECT_DOUBLE_EQ(spec.resolved_epsilon(), 0.2);
  spec.epsilon = 0.1;
  EXPECT_THROW(spec.resolved_epsilon(), std::invalid_argument);
  spec.p.reset();
  spec.trials = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(ExperimentSpec, JsonConfig) {
  auto path = temp_file("ngs_config_test.json", R"({
    "graph": {"kind": "grid", "n": 16, "rows": 4},
    "p": 0.1,
    "policy": ["exact-median", "local"],
    "trials": 3,
    "seed": 42,
    "scale_tau": 0.5,
    "verify": true,
    "oracle": "adversarial",
    "adversary": "random-schedule"
  })");
  ExperimentSpec spec = load_spec(path.string());
  EXPECT_EQ(spec.graph.kind, GraphKind::grid);
  EXPECT_EQ(spec.graph.n, 16u);
  EXPECT_EQ(spec.graph.params.rows, std::size_t{4});
  EXPECT_DOUBLE_EQ(spec.resolved_epsilon(), 0.4);
  EXPECT_EQ(spec.policies, (std::vector<Policy>{Policy::exact_median, Policy::local_search}));
  EXPECT_EQ(spec.trials, 3u);
  EXPECT_EQ(spec.seed, 42u);
  EXPECT_DOUBLE_EQ(spec.scale.tau, 0.5);
  EXPECT_TRUE(spec.verify);
  EXPECT_EQ(spec.oracle, OracleKind::adversarial);
  EXPECT_EQ(spec.adversary, AdversaryPolicy::random_schedule);

  auto bad = temp_file("ngs_config_bad.json", "{\"graph\": ");
  EXPECT_THROW(load_spec(bad.string()), std::runtime_error);
  auto unknown = temp_file("ngs_config_unknown.json", R"({"policy": "median"})");
  EXPECT_THROW(load_spec(unknown.string()), std::invalid_argument);
}

TEST(Csv, EscapesAndEmptyOptionals) {
  ResultRow r;
  r.graph_kind = "path";
  r.policy = "exact-median";
  r.error = "bad, \"quoted\"";
  std::ostringstream out;
  write_csv_row(out, r);
  std::string line = out.str();
  EXPECT_NE(line.find(",,,\"bad, \"\"quoted\"\"\"\n"), std::string::npos) << line;
  std::size_t commas = 0;
  for (char c : std::string(kCsvHeader)) commas += c == ',';
  ResultRow plain;
  std::ostringstream o2;
  write_csv_row(o2, plain);
  const std::string empty = o2.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(empty.begin(), empty.end(), ',')), commas);
}

TEST(RunExperiment, NoiselessPathAllSucceed) {
  ExperimentSpec spec;
  spec.graph.kind = GraphKind::path;
  spec.graph.n = 16;
  spec.p = 0.0;
  spec.trials = 10;
  auto rows = run_experiment(spec);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_TRUE(rows[i].success);
    EXPECT_EQ(rows[i].trial, i);
    EXPECT_EQ(rows[i].errors, 0u);
    EXPECT_LE(rows[i].queries, rows[i].tau);
    EXPECT_TRUE(rows[i].error.empty());
    EXPECT_TRUE(rows[i].mean_query_seconds.has_value());
  }
}

TEST(RunExperiment, ByteIdenticalAcrossRunsAndWorkerCounts) {
  ExperimentSpec spec;
  spec.graph.n = 20;
  spec.epsilon = 0.2;
  spec.policies = {Policy::exact_median, Policy::global_sampled, Policy::local_search};
  spec.trials = 4;
  spec.seed = 11;
  spec.scale = {0.1, 0.05};
  spec.record_timing = false;
  spec.workers = 1;
  std::string a = csv_of(spec);
  std::string b = csv_of(spec);
  spec.workers = 3;
  std::string c = csv_of(spec);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 13);
  spec.seed = 12;
  EXPECT_NE(a, csv_of(spec));
}

TEST(RunExperiment, FailedCellsBecomeErrorRows) {
  ExperimentSpec spec;
  spec.graph.kind = GraphKind::random_regular;
  spec.graph.n = 7;
  spec.graph.params.degree = 3;  // n * d odd: no such graph
  spec.policies = {Policy::exact_median, Policy::local_search};
  spec.trials = 2;
  auto rows = run_experiment(spec);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.error.empty());
    EXPECT_FALSE(r.success);
  }
}

TEST(RunExperiment, EdgeListInputAndVerifyColumn) {
  Graph g = generate(GraphKind::random_tree, 12, {}, 5);
  std::ostringstream text;
  write_edge_list(text, g);
  auto path = temp_file("ngs_edges_test.txt", text.str());
  ExperimentSpec spec;
  spec.graph.edge_list = path.string();
  spec.policies = {Policy::local_search};
  spec.scale = {0.1, 0.1};
  spec.verify = true;
  auto rows = run_experiment(spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].graph_kind, "edge-list");
  EXPECT_EQ(rows[0].n, 12u);
  EXPECT_EQ(rows[0].m, 11u);
  ASSERT_TRUE(rows[0].violations.has_value());
  EXPECT_EQ(*rows[0].violations, 0u);
}

TEST(RunExperiment, AdversarialOracleRespectsBudget) {
  ExperimentSpec spec;
  spec.graph.kind = GraphKind::grid;
  spec.graph.n = 16;
  spec.oracle = OracleKind::adversarial;
  spec.trials = 3;
  for (const auto& r : run_experiment(spec)) {
    EXPECT_TRUE(r.success);
    EXPECT_LE(r.errors, static_cast<std::size_t>(std::floor(0.4 * static_cast<double>(r.tau))));
  }
}

TEST(RunExperiment, DumpWritesOneRecordPerStep) {
  ExperimentSpec spec;
  spec.graph.n = 10;
  spec.policies = {Policy::global_sampled};
  spec.scale = {0.05, 0.01};
  std::size_t records = 0;
  std::size_t tau = 0;
  run_experiment(
      spec, [&](const ResultRow& r) { tau = r.tau; },
      [&](const StepDump& d) {
        auto j = dump_to_json(d);
        EXPECT_EQ(j["omega"].size(), 10u);
        EXPECT_EQ(j["sample_counts"].size(), 10u);
        ++records;
      });
  EXPECT_EQ(records, tau);
}

TEST(Percentile, NearestRank) {
  EXPECT_DOUBLE_EQ(percentile({5, 1, 4, 2, 3}, 0.95), 5.0);
  EXPECT_DOUBLE_EQ(percentile({5, 1, 4, 2, 3}, 0.4), 2.0);
  std::vector<double> hundred(100);
  for (int i = 0; i < 100; ++i) hundred[i] = i + 1;
  EXPECT_DOUBLE_EQ(percentile(hundred, 0.95), 95.0);
}

TEST(Bench, LogLogSlope) {
  std::vector<double> x{256, 512, 1024, 2048}, y;
  for (double v : x) y.push_back(3e-7 * std::pow(v, 1.5));
  EXPECT_NEAR(loglog_slope(x, y), 1.5, 1e-12);
  BenchOptions o;
  o.ns = {64, 128};
  EXPECT_THROW(bench_scaling(o), std::invalid_argument);
}

TEST(Bench, SmallRun) {
  BenchOptions o;
  o.ns = {16, 32, 64};
  o.policies = {Policy::global_sampled, Policy::local_search};
  o.scale = {0.02, 0.02};
  auto r = bench_scaling(o);
  EXPECT_EQ(r.points.size(), 6u);
  EXPECT_EQ(r.slopes.size(), 2u);
  EXPECT_GT(r.at(64, Policy::local_search).mean_query_seconds, 0.0);
  auto j = to_json(r);
  EXPECT_TRUE(j["slopes"].contains("global-sampled"));
}

TEST(Verify, ExitCodeFollowsDeterministicSuites) {
  SuiteResult det;
  det.name = "d";
  SuiteResult stat;
  stat.name = "s";
  stat.kind = SuiteKind::statistical;
  stat.violations = 5;
  stat.passed = false;
  EXPECT_EQ(verification_exit_code({det, stat}), 0);
  det.violations = 1;
  EXPECT_EQ(verification_exit_code({det, stat}), 1);
  auto report = verification_report({det, stat});
  EXPECT_EQ(report["exit_code"], 1);
  EXPECT_EQ(report["deterministic_violations"], 1);
  EXPECT_EQ(report["suites"].size(), 2u);
}

TEST(Verify, SmallSuitesPass) {
  auto median = verify_median_bisection(5, 5);
  EXPECT_TRUE(median.passed) << median.detail;
  EXPECT_EQ(median.instances, (1u + 1 + 2 + 6 + 21) * 5);
  auto local = verify_local_min_lambda(100);
  EXPECT_TRUE(local.passed) << local.detail;
  auto marginal = verify_resample_marginal(20000, 0.03);
  EXPECT_TRUE(marginal.passed) << *marginal.empirical;
}

TEST(Verify, TranscriptSuitesReportViolations) {
  EndToEndStats st;
  st.trials = 10;
  st.successes = 10;
  st.local_search_calls = 50;
  st.iteration_bound_violations = 1;
  st.first_failure = "trial 3: injected";
  auto suites = transcript_suites(st, "local-search");
  EXPECT_EQ(verification_exit_code(suites), 1);
  st.iteration_bound_violations = 0;
  EXPECT_EQ(verification_exit_code(transcript_suites(st, "local-search")), 0);
}

}  // namespace
}  // namespace ngs
