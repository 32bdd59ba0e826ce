#include "ngs/strategy.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace ngs {
namespace {

Graph path(std::size_t n) { return generate(GraphKind::path, n, {}, 0); }

RunOptions quiet() {
  RunOptions o;
  o.keep_steps = false;
  return o;
}

RunOptions verified() {
  RunOptions o;
  o.verify = true;
  return o;
}

TEST(DeriveConfig, EpsilonPointTwoAt1024) {
  auto c = derive_config(0.2, 1024, Policy::global_sampled, 0);
  EXPECT_DOUBLE_EQ(c.eta, 0.1);
  EXPECT_DOUBLE_EQ(c.r, 0.4);
  EXPECT_DOUBLE_EQ(c.delta, 0.025);
  EXPECT_NEAR(c.gamma, 1.0 / 0.6, 1e-12);
  EXPECT_EQ(c.tau, 10000u);
  EXPECT_EQ(c.s, 88723u);
  EXPECT_NEAR(c.p, 0.3, 1e-15);
  EXPECT_EQ(c.lie_budget(), 4000u);
}

TEST(DeriveConfig, LargeEpsilonClampsEta) {
  auto c = derive_config(0.5, 64, Policy::exact_median, 0);
  EXPECT_DOUBLE_EQ(c.eta, 0.124);
  EXPECT_NEAR(c.gamma, 1.0 / (1.0 - 0.496), 1e-12);
  EXPECT_DOUBLE_EQ(c.p, 0.0);
}

TEST(DeriveConfig, SmallEpsilon) {
  auto c = derive_config(0.01, 16, Policy::exact_median, 0);
  EXPECT_DOUBLE_EQ(c.delta, 0.00125);
  EXPECT_NEAR(c.gamma, 1.0 / 0.98, 1e-12);
  // Independent evaluation: 10 * 4 / 0.005^2 and 8 ln 16 / 0.00125^2.
  EXPECT_EQ(c.tau, 1600000u);
  EXPECT_EQ(c.s, static_cast<std::size_t>(std::ceil(8.0 * std::log(16.0) / (0.00125 * 0.00125))));
}

TEST(DeriveConfig, RejectionsAndScaling) {
  EXPECT_THROW(derive_config(0.0, 10, Policy::exact_median, 0), std::invalid_argument);
  EXPECT_THROW(derive_config(0.6, 10, Policy::exact_median, 0), std::invalid_argument);
  EXPECT_THROW(derive_config(0.2, 0, Policy::exact_median, 0), std::invalid_argument);
  auto c = derive_config(0.2, 1024, Policy::exact_median, 0, {0.1, 0.5});
  EXPECT_EQ(c.tau, 1000u);
  EXPECT_EQ(c.s, 44362u);
  auto single = derive_config(0.2, 1, Policy::exact_median, 0);
  EXPECT_EQ(single.tau, 0u);
  EXPECT_EQ(single.s, 1u);
}

TEST(Policy, ParseAndPrint) {
  for (auto p : {Policy::exact_median, Policy::global_sampled, Policy::local_search})
    EXPECT_EQ(parse_policy(to_string(p)), p);
  EXPECT_THROW(parse_policy("median"), std::invalid_argument);
}

TEST(SelectQueryExact, Examples) {
  Graph p5 = path(5);
  EXPECT_EQ(select_query_exact(WeightState::uniform(5), p5.distances(), 0.05), 2u);
  auto heavy = WeightState::from_weights(std::vector<double>{0.02, 0.02, 0.02, 0.04, 0.9});
  EXPECT_EQ(select_query_exact(heavy, p5.distances(), 0.05), 4u);
  Graph k2 = path(2);
  EXPECT_EQ(select_query_exact(WeightState::uniform(2), k2.distances(), 0.05), 0u);
}

TEST(SelectQueryGlobal, Examples) {
  Graph p3 = path(3);
  Sample point(p3.distances(), std::vector<Vertex>(7, 2), PhiStarMode::cached);
  EXPECT_EQ(select_query_global(point), 2u);
  Sample s(p3.distances(), {0, 0, 2}, PhiStarMode::cached);
  EXPECT_EQ(select_query_global(s), 0u);
}

TEST(LocalSearch, StartAtLocalMinimum) {
  Graph p5 = path(5);
  Sample s(p5.distances(), std::vector<Vertex>(10, 2), PhiStarMode::on_demand);
  auto r = local_search(s, p5, 2, 0.025, 10);
  EXPECT_EQ(r.vertex, 2u);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.phi_start, r.phi_end);
}

TEST(LocalSearch, WalksDownThePath) {
  Graph p5 = path(5);
  Sample s(p5.distances(), std::vector<Vertex>(10, 4), PhiStarMode::on_demand);
  // Phi* along the path is 40, 30, 20, 10, 0; every move gains 10 > delta s.
  auto r = local_search(s, p5, 0, 0.05, 10);
  EXPECT_EQ(r.vertex, 4u);
  EXPECT_EQ(r.iterations, 5u);
  EXPECT_EQ(r.phi_start, 40);
  EXPECT_EQ(r.phi_end, 0);
  EXPECT_TRUE(iteration_bound_holds(r, 0.5));
}

TEST(LocalSearch, StopsWhenGainBelowThreshold) {
  Graph p3 = path(3);
  Sample s(p3.distances(), {0, 1, 1, 2, 2}, PhiStarMode::cached);
  // Phi*: 0 -> 6, 1 -> 3, 2 -> 4. From 1 no neighbor improves.
  auto r = local_search(s, p3, 0, 2.5);
  EXPECT_EQ(r.vertex, 1u);
  EXPECT_EQ(r.iterations, 2u);
  auto blocked = local_search(s, p3, 0, 3.5);
  EXPECT_EQ(blocked.vertex, 0u);
}

// The returned vertex is a delta-s local minimum, and any such vertex has
// Lambda* <= s (1 + delta) / 2.
TEST(LocalSearch, ResultSatisfiesLambdaBound) {
  Rng rng(3);
  std::mt19937_64 wr(4);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Graph g = testing::random_connected_graph(15, 0.2, seed);
    auto w = WeightState::from_weights(testing::integer_weights(15, wr));
    const double delta = 0.02 + 0.001 * static_cast<double>(seed % 50);
    const std::size_t s = 50 + seed % 200;
    Sample sample = draw_sample(w, s, g.distances(), PhiStarMode::on_demand, rng);
    auto r = local_search(sample, g, static_cast<Vertex>(seed % 15), delta, s);
    ASSERT_TRUE(is_phi_star_local_min(sample, g, r.vertex, delta * static_cast<double>(s)));
    EXPECT_TRUE(local_min_lambda_bound_holds(sample, g, r.vertex, delta)) << "seed " << seed;
    EXPECT_TRUE(iteration_bound_holds(r, delta * static_cast<double>(s)));
  }
}

struct ScriptedOracle {
  Vertex reply_with;
  Vertex target() const { return 0; }
  Reply respond(Vertex, const WeightState&) { return {reply_with, false}; }
};

TEST(LbSearch, RejectsReplyOutsideClosedNeighborhood) {
  Graph p4 = path(4);
  auto cfg = derive_config(0.2, 4, Policy::exact_median, 0);
  ScriptedOracle bad{3};
  EXPECT_THROW(lb_search(p4, p4.distances(), bad, cfg), OracleProtocolError);
}

TEST(LbSearch, SingleVertexAsksNothing) {
  Graph one(1, {});
  auto cfg = derive_config(0.2, 1, Policy::local_search, 0);
  NoisyOracle oracle(one, 0, {0.3}, Rng(0));
  auto tr = lb_search(one, one.distances(), oracle, cfg);
  EXPECT_EQ(tr.queries, 0u);
  EXPECT_EQ(tr.answer, 0u);
  EXPECT_TRUE(tr.success);
}

TEST(LbSearch, NoiselessFindsTargetForEveryPolicy) {
  const std::vector<Graph> graphs{path(12), generate(GraphKind::grid, 16, {}, 0),
                                  generate(GraphKind::random_tree, 20, {}, 3),
                                  testing::random_connected_graph(24, 0.15, 8)};
  for (const Graph& g : graphs) {
    for (auto policy : {Policy::exact_median, Policy::global_sampled, Policy::local_search}) {
      for (std::uint64_t seed = 0; seed < 2; ++seed) {
        auto cfg = derive_config(0.5, g.order(), policy, seed);
        const Vertex target = static_cast<Vertex>((seed * 7 + 5) % g.order());
        NoisyOracle oracle(g, target, {0.0}, make_stream(seed, 0, stream_tag::oracle));
        auto tr = lb_search(g, g.distances(), oracle, cfg, quiet());
        EXPECT_TRUE(tr.success) << to_string(policy) << " n=" << g.order();
        EXPECT_EQ(tr.queries, cfg.tau);
        EXPECT_EQ(tr.errors, 0u);
      }
    }
  }
}

TEST(LbSearch, ExactPolicySurvivesBudgetedAdversaries) {
  const std::vector<Graph> graphs{path(16), generate(GraphKind::grid, 16, {}, 0),
                                  testing::random_connected_graph(16, 0.2, 2)};
  for (const Graph& g : graphs) {
    for (auto policy : {AdversaryPolicy::greedy_heavy, AdversaryPolicy::random_schedule,
                        AdversaryPolicy::fixed_schedule}) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto cfg = derive_config(0.2, g.order(), Policy::exact_median, seed);
        AdversarialOracle::Options opts;
        opts.policy = policy;
        opts.budget = cfg.lie_budget();
        opts.horizon = cfg.tau;
        const Vertex target = static_cast<Vertex>((seed * 5 + 3) % g.order());
        AdversarialOracle oracle(g, target, opts, make_stream(seed, 0, stream_tag::adversary));
        auto tr = lb_search(g, g.distances(), oracle, cfg, quiet());
        EXPECT_TRUE(tr.success);
        EXPECT_LE(oracle.lies_spent(), cfg.lie_budget());
      }
    }
  }
}

TEST(LbSearch, RenormalizationDoesNotChangeDecisions) {
  Graph g = testing::random_connected_graph(20, 0.2, 5);
  auto cfg = derive_config(0.2, 20, Policy::exact_median, 1, {0.02, 1.0});
  ASSERT_GT(cfg.tau, 50u);
  auto run = [&](bool renormalize) {
    NoisyOracle oracle(g, 11, {cfg.p}, make_stream(1, 0, stream_tag::oracle));
    RunOptions opts;
    opts.renormalize = renormalize;
    return lb_search(g, g.distances(), oracle, cfg, opts);
  };
  auto a = run(true), b = run(false);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    EXPECT_EQ(a.steps[t].query, b.steps[t].query) << "step " << t;
    EXPECT_EQ(a.steps[t].reply, b.steps[t].reply) << "step " << t;
  }
  EXPECT_EQ(a.answer, b.answer);
}

TEST(LbSearch, DeterministicPerSeed) {
  Graph g = testing::random_connected_graph(16, 0.25, 6);
  auto cfg = derive_config(0.2, 16, Policy::local_search, 9, {0.05, 0.05});
  auto run = [&] {
    NoisyOracle oracle(g, 4, {cfg.p}, make_stream(9, 0, stream_tag::oracle));
    return lb_search(g, g.distances(), oracle, cfg);
  };
  auto a = run(), b = run();
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    EXPECT_EQ(a.steps[t].query, b.steps[t].query);
    EXPECT_EQ(a.steps[t].resampled, b.steps[t].resampled);
  }
}

TEST(LbSearch, VerifiedNoisyRunsAreClean) {
  Graph g = testing::random_connected_graph(24, 0.2, 7);
  for (auto policy : {Policy::global_sampled, Policy::local_search}) {
    auto cfg = derive_config(0.2, 24, policy, 3, {0.2, 0.2});
    NoisyOracle oracle(g, 9, {cfg.p}, make_stream(3, 0, stream_tag::oracle));
    auto tr = lb_search(g, g.distances(), oracle, cfg, verified());
    EXPECT_EQ(tr.checks.violations(), 0u) << tr.checks.first_failure;
    EXPECT_EQ(tr.checks.phi_star_checks, cfg.tau);
    if (policy == Policy::local_search) {
      EXPECT_EQ(tr.checks.local_search_calls, cfg.tau);
      EXPECT_TRUE(iteration_accounting_holds(tr, cfg, g.diameter()));
    }
    auto drop = check_potential_drop(tr, cfg);
    EXPECT_EQ(drop.violations(), 0u) << drop.first_failure;
  }
}

TEST(PotentialDrop, ExactPolicyTranscriptsPass) {
  // Higher noise on small graphs makes heavy vertices come and go, so
  // complete heavy segments show up.
  std::size_t steps = 0, segments = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = testing::random_connected_graph(12, 0.25, seed);
    auto cfg = derive_config(0.1, 12, Policy::exact_median, seed, {0.2, 1.0});
    NoisyOracle oracle(g, static_cast<Vertex>(seed), {cfg.p}, make_stream(seed, 0, stream_tag::oracle));
    RunOptions opts;
    opts.verify = true;
    auto tr = lb_search(g, g.distances(), oracle, cfg, opts);
    auto drop = check_potential_drop(tr, cfg);
    EXPECT_EQ(drop.not_delta_close, 0u);
    EXPECT_EQ(drop.violations(), 0u) << drop.first_failure;
    steps += drop.steps_checked;
    segments += drop.segments_checked;
  }
  EXPECT_GT(steps, 0u);
  EXPECT_GT(segments, 0u);
}

// Negative controls: a doctored transcript must be caught.
TEST(PotentialDrop, DetectsViolations) {
  auto cfg = derive_config(0.2, 30, Policy::exact_median, 0);
  SearchTranscript tr;
  StepRecord flat;
  flat.total_before = 1.0;
  flat.total_after = 0.9;  // (1 - eta)^2 = 0.81 is required
  tr.steps.push_back(flat);
  EXPECT_EQ(check_potential_drop(tr, cfg).step_violations, 1u);

  SearchTranscript seg;
  for (std::size_t t = 0; t < 3; ++t) {
    StepRecord r;
    r.step = t;
    r.heavy = 2;
    r.query = 2;
    r.total_before = 1.0;
    r.total_after = 0.99;
    seg.steps.push_back(r);
  }
  StepRecord end;
  end.step = 3;
  end.total_before = 1.0;
  end.total_after = 0.5;
  seg.steps.push_back(end);
  auto check = check_potential_drop(seg, cfg);
  EXPECT_EQ(check.segments_checked, 1u);
  EXPECT_EQ(check.segment_violations, 1u);
}

TEST(IterationAccounting, DetectsExcess) {
  auto cfg = derive_config(0.2, 16, Policy::local_search, 0);
  SearchTranscript tr;
  StepRecord r;
  r.local_iterations = 1000000;
  tr.steps.push_back(r);
  EXPECT_FALSE(iteration_accounting_holds(tr, cfg, 3));
  tr.steps[0].local_iterations = 1;
  EXPECT_TRUE(iteration_accounting_holds(tr, cfg, 3));
}

}  // namespace
}  // namespace ngs
