#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ngs/enumerate.hpp"
#include "ngs/graph.hpp"
#include "ngs/harness.hpp"
#include "ngs/oracle.hpp"
#include "ngs/potential.hpp"
#include "ngs/sampling.hpp"
#include "ngs/strategy.hpp"
#include "ngs/weights.hpp"

namespace ngs {

enum class SuiteKind { deterministic, statistical };

struct SuiteResult {
  std::string name;
  SuiteKind kind = SuiteKind::deterministic;
  bool passed = true;
  std::size_t instances = 0;
  std::size_t violations = 0;
  std::optional<double> empirical;  // rate or distance, suite-specific
  std::optional<double> target;     // threshold the empirical value is held to
  std::string detail;
  double seconds = 0.0;
};

inline nlohmann::json to_json(const SuiteResult& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["kind"] = r.kind == SuiteKind::deterministic ? "deterministic" : "statistical";
  j["passed"] = r.passed;
  j["instances"] = r.instances;
  j["violations"] = r.violations;
  j["empirical"] = r.empirical ? nlohmann::json(*r.empirical) : nlohmann::json();
  j["target"] = r.target ? nlohmann::json(*r.target) : nlohmann::json();
  j["detail"] = r.detail;
  j["seconds"] = r.seconds;
  return j;
}

/// Nonzero iff some deterministic suite recorded a violation.
inline int verification_exit_code(const std::vector<SuiteResult>& suites) {
  for (const auto& s : suites)
    if (s.kind == SuiteKind::deterministic && s.violations > 0) return 1;
  return 0;
}

inline nlohmann::json verification_report(const std::vector<SuiteResult>& suites) {
  nlohmann::json j;
  j["suites"] = nlohmann::json::array();
  bool all = true;
  std::size_t deterministic_violations = 0;
  for (const auto& s : suites) {
    j["suites"].push_back(to_json(s));
    all = all && s.passed;
    if (s.kind == SuiteKind::deterministic) deterministic_violations += s.violations;
  }
  j["all_passed"] = all;
  j["deterministic_violations"] = deterministic_violations;
  j["exit_code"] = verification_exit_code(suites);
  return j;
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Weights shaped like a search in progress: uniform, then `steps` updates
/// from replies that are truthful for a hidden vertex 70% of the time.
inline WeightState search_like_weights(const Graph& g, std::size_t steps, double gamma, Rng& rng) {
  const std::size_t n = g.order();
  WeightState w = WeightState::uniform(n);
  if (n == 1) return w;
  std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(n - 1));
  const Vertex hidden = pick(rng);
  std::vector<std::uint8_t> mask;
  for (std::size_t t = 0; t < steps; ++t) {
    Vertex q = pick(rng);
    Vertex reply;
    if (uniform01(rng) < 0.7) {
      auto ok = truthful_replies(g, g.distances(), hidden, q);
      reply = ok[rng() % ok.size()];
    } else {
      auto nb = g.neighbors(q);
      std::size_t k = rng() % (nb.size() + 1);
      reply = k == nb.size() ? q : nb[k];
    }
    mark_consistent(g.distances(), q, reply, mask);
    w.apply_reply(mask, gamma);
    w.renormalize();
  }
  return w;
}

inline Graph random_instance_graph(std::size_t n, Rng& rng) {
  static constexpr GraphKind kinds[] = {GraphKind::erdos_renyi, GraphKind::random_tree,
                                        GraphKind::path, GraphKind::grid, GraphKind::cycle};
  GraphKind kind = kinds[rng() % 5];
  if (kind == GraphKind::cycle && n < 3) kind = GraphKind::path;
  GeneratorParams params;
  if (kind == GraphKind::grid) {
    std::size_t rows = 1 + rng() % 6;
    n = rows * std::max<std::size_t>(1, n / rows);
    params.rows = rows;
  }
  if (kind == GraphKind::erdos_renyi) params.edge_probability = 0.1 + uniform01(rng) * 0.3;
  return generate(kind, n, params, rng());
}

}  // namespace detail

/// Every connected graph up to `max_n` vertices, `weights_per_graph` random
/// integer weight vectors each: the exact median has Lambda <= omega / 2.
inline SuiteResult verify_median_bisection(std::size_t max_n = 7, std::size_t weights_per_graph = 50,
                                           std::uint64_t seed = 1) {
  detail::Stopwatch clock;
  SuiteResult r;
  r.name = "median-bisection";
  Rng rng = make_stream(seed, 0, stream_tag::weights);
  std::uniform_int_distribution<int> pick(1, 1000);
  std::vector<double> w;
  std::size_t graphs = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (const Graph& g : enumerate_connected_graphs(n)) {
      ++graphs;
      w.resize(n);
      for (std::size_t k = 0; k < weights_per_graph; ++k) {
        for (double& x : w) x = pick(rng);
        ++r.instances;
        const Vertex m = exact_median(w, g.distances());
        if (2.0 * lambda(w, g, g.distances(), m) > total_weight(w)) {
          if (r.violations++ == 0)
            r.detail = "n=" + std::to_string(n) + ": median " + std::to_string(m) + " does not bisect";
        }
      }
    }
  }
  if (r.detail.empty()) r.detail = std::to_string(graphs) + " graphs";
  r.passed = r.violations == 0;
  r.seconds = clock.seconds();
  return r;
}

/// Random (graph, weights, sample, start) instances: local search ends at a
/// delta-s local minimum of Phi*, and there Lambda* <= s (1 + delta) / 2.
inline SuiteResult verify_local_min_lambda(std::size_t instances = 1000, std::uint64_t seed = 2) {
  detail::Stopwatch clock;
  SuiteResult r;
  r.name = "local-min-lambda-star";
  Rng rng = make_stream(seed, 0, stream_tag::sample);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = 2 + rng() % 59;
    Graph g = detail::random_instance_graph(n, rng);
    WeightState w = detail::search_like_weights(g, rng() % 80, 1.2 + uniform01(rng), rng);
    const double delta = 0.01 + 0.14 * uniform01(rng);
    const std::size_t s = 1 + rng() % 3000;
    Sample sample = draw_sample(w, s, g.distances(), PhiStarMode::on_demand, rng);
    const Vertex start = static_cast<Vertex>(rng() % g.order());
    auto ls = local_search(sample, g, start, delta, s);
    ++r.instances;
    const double ds = delta * static_cast<double>(s);
    bool ok = is_phi_star_local_min(sample, g, ls.vertex, ds) &&
              local_min_lambda_bound_holds(sample, g, ls.vertex, delta) &&
              iteration_bound_holds(ls, ds);
    if (!ok && r.violations++ == 0)
      r.detail = "instance " + std::to_string(i) + " (n=" + std::to_string(g.order()) + ", s=" +
                 std::to_string(s) + ")";
  }
  r.passed = r.violations == 0;
  r.seconds = clock.seconds();
  return r;
}

struct ClosenessResult {
  SuiteResult global;
  SuiteResult local;
};

/// Sampled query selection on ER graphs: the global Phi*-minimizer and the
/// local-search output are delta-close to the median.
inline ClosenessResult verify_sampled_closeness(std::size_t n = 128, double delta = 0.05,
                                                std::size_t trials = 200,
                                                double required_rate = 199.0 / 200.0,
                                                std::uint64_t seed = 3) {
  detail::Stopwatch clock;
  ClosenessResult out;
  out.global.name = "global-sampled-delta-close";
  out.local.name = "local-search-delta-close";
  const std::size_t s = sample_size(n, delta);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_stream(seed, t, stream_tag::sample);
    Graph g = generate(GraphKind::erdos_renyi, n, {}, trial_seed(seed, t));
    WeightState w = detail::search_like_weights(g, rng() % 40, 1.5, rng);
    Sample cached = draw_sample(w, s, g.distances(), PhiStarMode::cached, rng);
    Vertex global = select_query_global(cached);
    auto ls = local_search(cached, g, 0, delta, s);
    for (auto [res, q] : {std::pair{&out.global, global}, std::pair{&out.local, ls.vertex}}) {
      ++res->instances;
      if (!is_delta_close(w.omega(), g, g.distances(), q, delta) && res->violations++ == 0)
        res->detail = "first miss at trial " + std::to_string(t);
    }
  }
  for (SuiteResult* res : {&out.global, &out.local}) {
    res->kind = SuiteKind::statistical;
    res->empirical = 1.0 - static_cast<double>(res->violations) / static_cast<double>(res->instances);
    res->target = required_rate;
    res->passed = *res->empirical >= required_rate;
    if (res->detail.empty()) res->detail = "s=" + std::to_string(s);
    res->seconds = clock.seconds();
  }
  return out;
}

/// One MWU step on a fixed 8-vertex graph; the histogram of `members`
/// resampled members against omega_{t+1} / total.
inline SuiteResult verify_resample_marginal(std::size_t members = 100000, double max_tv = 0.01,
                                            std::uint64_t seed = 4) {
  detail::Stopwatch clock;
  SuiteResult r;
  r.name = "resample-marginal";
  r.kind = SuiteKind::statistical;
  GeneratorParams params;
  params.edge_probability = 0.4;
  Graph g = generate(GraphKind::erdos_renyi, 8, params, 21);
  std::vector<double> w_t{0.05, 0.3, 0.1, 0.02, 0.2, 0.08, 0.15, 0.1};
  const double gamma = 1.0 / 0.6;
  const Vertex q = 1;
  std::vector<std::uint8_t> mask;
  mark_consistent(g.distances(), q, g.neighbors(q).front(), mask);
  WeightState before = WeightState::from_weights(w_t);
  WeightState after = before;
  after.apply_reply(mask, gamma);

  Rng rng = make_stream(seed, 0, stream_tag::sample);
  Sample sample = draw_sample(before, members, g.distances(), PhiStarMode::on_demand, rng);
  std::size_t redrawn = sample.resample(mask, after, gamma, rng);
  double tv = 0.0;
  for (Vertex v = 0; v < 8; ++v)
    tv += std::abs(static_cast<double>(sample.count(v)) / static_cast<double>(members) -
                   after[v] / after.total());
  tv /= 2.0;
  r.instances = members;
  r.empirical = tv;
  r.target = max_tv;
  r.passed = tv <= max_tv;
  r.detail = std::to_string(redrawn) + " members redrawn";
  r.seconds = clock.seconds();
  return r;
}

struct EndToEndOptions {
  GraphKind kind = GraphKind::erdos_renyi;
  std::size_t n = 64;
  double epsilon = 0.2;
  Policy policy = Policy::global_sampled;
  std::size_t trials = 100;
  std::uint64_t seed = 5;
  bool verify = true;
  ConstantScale scale;
};

/// Aggregates over noisy end-to-end runs of one policy.
struct EndToEndStats {
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::size_t steps = 0;
  std::size_t drop_steps_checked = 0;
  std::size_t drop_step_violations = 0;
  std::size_t segments_checked = 0;
  std::size_t segment_violations = 0;
  std::size_t not_delta_close = 0;
  std::size_t local_search_calls = 0;
  std::size_t local_min_violations = 0;
  std::size_t iteration_bound_violations = 0;
  std::size_t accounting_violations = 0;
  std::size_t phi_star_checks = 0;
  std::size_t phi_star_mismatches = 0;
  std::size_t resample_steps = 0;
  std::size_t resample_within_bound = 0;  // steps with K_t <= 4 s eps
  double seconds = 0.0;
  double query_seconds = 0.0;
  std::string first_failure;
};

inline EndToEndStats run_end_to_end(const EndToEndOptions& o) {
  detail::Stopwatch clock;
  EndToEndStats st;
  RunOptions opts;
  opts.verify = o.verify;
  opts.keep_steps = true;
  for (std::size_t t = 0; t < o.trials; ++t) {
    const std::uint64_t seed = trial_seed(o.seed, t);
    Graph g = generate(o.kind, o.n, {}, seed);
    Rng target_rng = make_stream(seed, 0, stream_tag::target);
    const Vertex target = static_cast<Vertex>(
        std::uniform_int_distribution<std::size_t>(0, g.order() - 1)(target_rng));
    StrategyConfig cfg = derive_config(o.epsilon, g.order(), o.policy, seed, o.scale);
    NoisyOracle oracle(g, target, {cfg.p}, make_stream(seed, 0, stream_tag::oracle));
    SearchTranscript tr = lb_search(g, g.distances(), oracle, cfg, opts);
    auto note = [&](const std::string& what) {
      if (st.first_failure.empty()) st.first_failure = "trial " + std::to_string(t) + ": " + what;
    };

    ++st.trials;
    st.successes += tr.success;
    st.steps += tr.steps.size();
    st.query_seconds += tr.total_seconds;
    if (!tr.checks.first_failure.empty()) note(tr.checks.first_failure);
    st.local_search_calls += tr.checks.local_search_calls;
    st.local_min_violations += tr.checks.local_min_violations;
    st.iteration_bound_violations += tr.checks.iteration_bound_violations;
    st.phi_star_checks += tr.checks.phi_star_checks;
    st.phi_star_mismatches += tr.checks.phi_star_mismatches;
    if (o.verify) {
      auto drop = check_potential_drop(tr, cfg);
      st.drop_steps_checked += drop.steps_checked;
      st.drop_step_violations += drop.step_violations;
      st.segments_checked += drop.segments_checked;
      st.segment_violations += drop.segment_violations;
      st.not_delta_close += drop.not_delta_close;
      if (!drop.first_failure.empty()) note(drop.first_failure);
    }
    if (o.policy == Policy::local_search && !iteration_accounting_holds(tr, cfg, g.diameter())) {
      ++st.accounting_violations;
      note("total local-search iterations exceed the accounting bound");
    }
    if (o.policy != Policy::exact_median) {
      const double bound = 4.0 * static_cast<double>(cfg.s) * cfg.epsilon;
      for (const auto& s : tr.steps) {
        ++st.resample_steps;
        st.resample_within_bound += static_cast<double>(s.resampled) <= bound;
      }
    }
  }
  st.seconds = clock.seconds();
  return st;
}

struct AdversarialOptions {
  std::vector<GraphKind> kinds{GraphKind::path, GraphKind::grid, GraphKind::erdos_renyi};
  std::vector<AdversaryPolicy> adversaries{AdversaryPolicy::greedy_heavy, AdversaryPolicy::random_schedule};
  std::size_t n = 64;
  double epsilon = 0.2;
  std::size_t trials = 100;
  std::uint64_t seed = 6;
};

/// Exact-median policy against budgeted adversaries: every run must succeed.
inline SuiteResult verify_adversarial(const AdversarialOptions& o = {}) {
  detail::Stopwatch clock;
  SuiteResult r;
  r.name = "adversarial-exact-median";
  std::size_t lies = 0;
  for (GraphKind kind : o.kinds) {
    for (AdversaryPolicy adv : o.adversaries) {
      for (std::size_t t = 0; t < o.trials; ++t) {
        const std::uint64_t seed = trial_seed(o.seed, t);
        Graph g = generate(kind, o.n, {}, seed);
        Rng target_rng = make_stream(seed, 0, stream_tag::target);
        const Vertex target = static_cast<Vertex>(
            std::uniform_int_distribution<std::size_t>(0, g.order() - 1)(target_rng));
        StrategyConfig cfg = derive_config(o.epsilon, g.order(), Policy::exact_median, seed);
        AdversarialOracle::Options ao;
        ao.policy = adv;
        ao.budget = cfg.lie_budget();
        ao.horizon = cfg.tau;
        AdversarialOracle oracle(g, target, ao, make_stream(seed, 0, stream_tag::adversary));
        RunOptions opts;
        opts.keep_steps = false;
        auto tr = lb_search(g, g.distances(), oracle, cfg, opts);
        ++r.instances;
        lies += oracle.lies_spent();
        const bool ok = tr.success && oracle.lies_spent() <= cfg.lie_budget();
        if (!ok && r.violations++ == 0)
          r.detail = std::string(to_string(kind)) + " trial " + std::to_string(t) + " answered " +
                     std::to_string(tr.answer) + " for target " + std::to_string(target);
      }
    }
  }
  if (r.detail.empty()) r.detail = std::to_string(lies) + " lies told in total";
  r.passed = r.violations == 0;
  r.seconds = clock.seconds();
  return r;
}

/// Transcript suites from verified end-to-end runs.
inline std::vector<SuiteResult> transcript_suites(const EndToEndStats& st, const std::string& tag) {
  std::vector<SuiteResult> out;
  auto add = [&](std::string name, std::size_t instances, std::size_t violations) {
    SuiteResult r;
    r.name = std::move(name) + "[" + tag + "]";
    r.instances = instances;
    r.violations = violations;
    r.passed = violations == 0;
    r.detail = st.first_failure;
    r.seconds = st.seconds;
    out.push_back(std::move(r));
  };
  add("potential-drop", st.drop_steps_checked + st.segments_checked,
      st.drop_step_violations + st.segment_violations);
  if (st.local_search_calls > 0) {
    add("local-search-iterations", st.local_search_calls, st.iteration_bound_violations);
    add("local-search-lambda-star", st.local_search_calls, st.local_min_violations);
    add("iteration-accounting", st.trials, st.accounting_violations);
  }
  if (st.phi_star_checks > 0) add("phi-star-bookkeeping", st.phi_star_checks, st.phi_star_mismatches);

  SuiteResult success;
  success.name = "noisy-success[" + tag + "]";
  success.kind = SuiteKind::statistical;
  success.instances = st.trials;
  success.violations = st.trials - st.successes;
  success.empirical = static_cast<double>(st.successes) / static_cast<double>(st.trials);
  success.target = 0.99;
  success.passed = *success.empirical >= 0.99;
  success.seconds = st.seconds;
  out.push_back(success);

  if (st.resample_steps > 0) {
    SuiteResult rs;
    rs.name = "resample-count-bound[" + tag + "]";
    rs.kind = SuiteKind::statistical;
    rs.instances = st.resample_steps;
    rs.violations = st.resample_steps - st.resample_within_bound;
    rs.empirical = static_cast<double>(st.resample_within_bound) / static_cast<double>(st.resample_steps);
    rs.target = 0.99;
    rs.passed = *rs.empirical >= 0.99;
    out.push_back(rs);
  }
  return out;
}

}  // namespace ngs
