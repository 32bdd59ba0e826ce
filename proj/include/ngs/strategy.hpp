#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ngs/graph.hpp"
#include "ngs/oracle.hpp"
#include "ngs/potential.hpp"
#include "ngs/rng.hpp"
#include "ngs/sampling.hpp"
#include "ngs/weights.hpp"

namespace ngs {

enum class Policy { exact_median, global_sampled, local_search };

inline std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::exact_median: return "exact-median";
    case Policy::global_sampled: return "global-sampled";
    case Policy::local_search: return "local-search";
  }
  return "?";
}

inline Policy parse_policy(std::string_view s) {
  if (s == "exact-median" || s == "exact") return Policy::exact_median;
  if (s == "global-sampled" || s == "global") return Policy::global_sampled;
  if (s == "local-search" || s == "local") return Policy::local_search;
  throw std::invalid_argument("unknown policy '" + std::string(s) + "'");
}

/// Multipliers on the derived query budget and sample size. Experiments only.
struct ConstantScale {
  double tau = 1.0;
  double s = 1.0;
};

// Upper clamp on eta; the analysis assumes eta < 1/8.
inline constexpr double kMaxEta = 0.124;

struct StrategyConfig {
  double epsilon = 0.0;
  double p = 0.0;
  double eta = 0.0;
  double r = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  std::size_t tau = 0;
  std::size_t s = 0;
  Policy policy = Policy::exact_median;
  ConstantScale scale;
  std::uint64_t seed = 0;

  double delta_s() const { return delta * static_cast<double>(s); }
  /// Linearly bounded adversary budget floor(r * tau).
  std::size_t lie_budget() const {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(tau)));
  }
};

namespace detail {
// ceil that forgives the last few ulps of a product meant to be integral.
inline std::size_t stable_ceil(double x) {
  return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
}
}  // namespace detail

inline StrategyConfig derive_config(double epsilon, std::size_t n, Policy policy,
                                    std::uint64_t seed, ConstantScale scale = {}) {
  if (!(epsilon > 0.0 && epsilon <= 0.5))
    throw std::invalid_argument("epsilon must lie in (0, 1/2]");
  if (n == 0) throw std::invalid_argument("graph must have at least one vertex");
  if (!(scale.tau > 0.0 && scale.s > 0.0))
    throw std::invalid_argument("constant scales must be positive");
  StrategyConfig c;
  c.epsilon = epsilon;
  c.p = 0.5 - epsilon;
  c.eta = std::min(epsilon / 2.0, kMaxEta);
  c.r = 0.5 - c.eta;
  c.delta = c.eta / 4.0;
  c.gamma = 1.0 / (1.0 - 4.0 * c.eta);
  const double log2n = std::log2(static_cast<double>(n));
  c.tau = detail::stable_ceil(10.0 * log2n / (c.eta * c.eta) * scale.tau);
  c.s = std::max<std::size_t>(
      1, detail::stable_ceil(8.0 * std::log(static_cast<double>(n)) / (c.delta * c.delta) * scale.s));
  c.policy = policy;
  c.scale = scale;
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------------------
// Query selection

/// Heavy vertex if one exists (it is the only delta-close vertex), else the
/// exact median.
inline Vertex select_query_exact(const WeightState& w, const DistanceMatrix& d, double delta) {
  if (auto heavy = heavy_vertex(w.omega(), delta)) return *heavy;
  return exact_median(w.omega(), d);
}

inline Vertex select_query_global(const Sample& sample) { return sample.argmin_phi_star(); }

struct LocalSearchResult {
  Vertex vertex = 0;
  std::size_t iterations = 0;
  std::int64_t phi_start = 0;
  std::int64_t phi_end = 0;
};

/// Walks to the best neighbor while it improves Phi* by at least delta*s.
inline LocalSearchResult local_search(const Sample& sample, const Graph& g, Vertex start,
                                      double delta_s) {
  LocalSearchResult r;
  Vertex v = start;
  std::int64_t phi_v = sample.phi_star(v);
  r.phi_start = phi_v;
  for (;;) {
    ++r.iterations;
    auto nbrs = g.neighbors(v);
    if (nbrs.empty()) break;
    Vertex best = nbrs.front();
    std::int64_t best_phi = sample.phi_star(best);
    for (Vertex u : nbrs.subspan(1)) {
      std::int64_t x = sample.phi_star(u);
      if (x < best_phi) {
        best_phi = x;
        best = u;
      }
    }
    if (static_cast<double>(best_phi) > static_cast<double>(phi_v) - delta_s) break;
    v = best;
    phi_v = best_phi;
  }
  r.vertex = v;
  r.phi_end = phi_v;
  return r;
}

inline LocalSearchResult local_search(const Sample& sample, const Graph& g, Vertex start,
                                      double delta, std::size_t s) {
  return local_search(sample, g, start, delta * static_cast<double>(s));
}

inline LocalSearchResult select_query_local(const Sample& sample, const Graph& g,
                                            Vertex prev_query, double delta, std::size_t s) {
  return local_search(sample, g, prev_query, delta, s);
}

/// iterations <= 1 + (Phi*(start) - Phi*(end)) / (delta s), with a few ulps of slack.
inline bool iteration_bound_holds(const LocalSearchResult& r, double delta_s) {
  const double moves = static_cast<double>(r.iterations - 1);
  const double gained = static_cast<double>(r.phi_start - r.phi_end);
  return moves * delta_s <= gained + 1e-9 * std::max(1.0, gained);
}

/// Lambda*(q) <= s (1 + delta) / 2.
inline bool local_min_lambda_bound_holds(const Sample& sample, const Graph& g, Vertex q,
                                         double delta) {
  const double lhs = 2.0 * static_cast<double>(lambda_star(sample, g, q));
  return lhs <= static_cast<double>(sample.size()) * (1.0 + delta);
}

/// True when every neighbor u satisfies Phi*(q) <= Phi*(u) + delta s.
inline bool is_phi_star_local_min(const Sample& sample, const Graph& g, Vertex q,
                                  double delta_s) {
  const double here = static_cast<double>(sample.phi_star(q));
  for (Vertex u : g.neighbors(q))
    if (here > static_cast<double>(sample.phi_star(u)) + delta_s) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Search run

class OracleProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepRecord {
  std::size_t step = 0;
  Vertex query = 0;
  Vertex reply = 0;
  bool reply_error = false;
  std::size_t resampled = 0;
  std::size_t local_iterations = 0;
  // Total weight around the multiplicative update, before renormalization.
  double total_before = 0.0;
  double total_after = 0.0;
  std::optional<Vertex> heavy;
  std::optional<bool> query_delta_close;  // set when exact Lambda was evaluated
  double seconds = 0.0;
};

struct RunChecks {
  std::size_t phi_star_checks = 0;
  std::size_t phi_star_mismatches = 0;
  std::size_t local_search_calls = 0;
  std::size_t local_min_violations = 0;
  std::size_t iteration_bound_violations = 0;
  std::string first_failure;

  std::size_t violations() const {
    return phi_star_mismatches + local_min_violations + iteration_bound_violations;
  }
};

struct SearchTranscript {
  std::vector<StepRecord> steps;
  Vertex target = 0;
  Vertex answer = 0;
  bool success = false;
  std::size_t queries = 0;
  std::size_t errors = 0;
  std::size_t total_resampled = 0;
  std::size_t total_local_iterations = 0;
  double total_seconds = 0.0;  // summed per-step wall time
  RunChecks checks;
};

using StepObserver =
    std::function<void(const StepRecord&, const WeightState&, const Sample* sample)>;

struct RunOptions {
  bool verify = false;  // per-step bookkeeping and invariant checks
  bool renormalize = true;
  bool keep_steps = true;
  StepObserver observer;
};

/// Multiplicative-weights search for the oracle's hidden target.
///
/// Runs exactly cfg.tau queries (zero when the graph has a single vertex) and
/// reports the vertex with the fewest recorded lies.
template <Responder Oracle>
SearchTranscript lb_search(const Graph& g, const DistanceMatrix& d, Oracle& oracle,
                           const StrategyConfig& cfg, const RunOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  SearchTranscript tr;
  tr.target = oracle.target();
  const std::size_t n = g.order();
  if (n == 1) {
    tr.answer = 0;
    tr.success = tr.target == 0;
    return tr;
  }
  if (opts.keep_steps) tr.steps.reserve(cfg.tau);

  WeightState w = WeightState::uniform(n);
  Rng sample_rng = make_stream(cfg.seed, 0, stream_tag::sample);
  std::optional<Sample> sample;
  if (cfg.policy != Policy::exact_median) {
    auto mode = cfg.policy == Policy::global_sampled ? PhiStarMode::cached : PhiStarMode::on_demand;
    sample.emplace(draw_sample(w, cfg.s, d, mode, sample_rng));
  }
  const double delta_s = cfg.delta_s();
  auto fail = [&](std::string what) {
    if (tr.checks.first_failure.empty()) tr.checks.first_failure = std::move(what);
  };

  std::vector<std::uint8_t> mask;
  Vertex prev_query = 0;
  for (std::size_t t = 0; t < cfg.tau; ++t) {
    auto started = clock::now();
    StepRecord rec;
    rec.step = t;
    rec.heavy = heavy_vertex(w.omega(), cfg.delta);

    switch (cfg.policy) {
      case Policy::exact_median:
        rec.query = select_query_exact(w, d, cfg.delta);
        break;
      case Policy::global_sampled:
        rec.query = select_query_global(*sample);
        break;
      case Policy::local_search: {
        auto ls = local_search(*sample, g, prev_query, delta_s);
        rec.query = ls.vertex;
        rec.local_iterations = ls.iterations;
        if (opts.verify) {
          ++tr.checks.local_search_calls;
          if (!iteration_bound_holds(ls, delta_s)) {
            ++tr.checks.iteration_bound_violations;
            fail("step " + std::to_string(t) + ": local search took " +
                 std::to_string(ls.iterations) + " iterations");
          }
          if (!local_min_lambda_bound_holds(*sample, g, ls.vertex, cfg.delta)) {
            ++tr.checks.local_min_violations;
            fail("step " + std::to_string(t) + ": Lambda* bound fails at vertex " +
                 std::to_string(ls.vertex));
          }
        }
        break;
      }
    }
    prev_query = rec.query;
    if (opts.verify) rec.query_delta_close = is_delta_close(w.omega(), g, d, rec.query, cfg.delta);

    Reply reply = oracle.respond(rec.query, w);
    if (!is_valid_reply(g, rec.query, reply.vertex)) {
      throw OracleProtocolError("step " + std::to_string(t) + ": reply " +
                                std::to_string(reply.vertex) + " to query " +
                                std::to_string(rec.query) + " is neither the query nor a neighbor");
    }
    rec.reply = reply.vertex;
    rec.reply_error = reply.erroneous;

    mark_consistent(d, rec.query, rec.reply, mask);
    rec.total_before = w.total();
    w.apply_reply(mask, cfg.gamma);
    rec.total_after = w.total();
    if (opts.renormalize) w.renormalize();

    if (sample) {
      rec.resampled = sample->resample(mask, w, cfg.gamma, sample_rng);
      if (opts.verify) {
        ++tr.checks.phi_star_checks;
        if (auto check = sample->recompute_check(); !check) {
          ++tr.checks.phi_star_mismatches;
          fail("step " + std::to_string(t) + ": " + check.diagnostic);
        }
      }
    }
    rec.seconds = std::chrono::duration<double>(clock::now() - started).count();

    ++tr.queries;
    tr.errors += rec.reply_error;
    tr.total_resampled += rec.resampled;
    tr.total_local_iterations += rec.local_iterations;
    tr.total_seconds += rec.seconds;
    if (opts.observer) opts.observer(rec, w, sample ? &*sample : nullptr);
    if (opts.keep_steps) tr.steps.push_back(rec);
  }
  tr.answer = w.report_answer();
  tr.success = tr.answer == tr.target;
  return tr;
}

// ---------------------------------------------------------------------------
// Transcript checks

struct PotentialDropCheck {
  std::size_t steps_checked = 0;       // steps with no heavy vertex and a delta-close query
  std::size_t step_violations = 0;
  std::size_t segments_checked = 0;    // complete maximal heavy segments
  std::size_t segment_violations = 0;
  std::size_t not_delta_close = 0;     // queries outside the premise, skipped
  std::string first_failure;

  std::size_t violations() const { return step_violations + segment_violations; }
};

/// Per-step drop (1 - eta)^2 without a heavy vertex; ((G+1)/(2G))^len over
/// each complete maximal segment with the same heavy vertex queried throughout.
inline PotentialDropCheck check_potential_drop(const SearchTranscript& tr,
                                               const StrategyConfig& cfg) {
  PotentialDropCheck out;
  constexpr double kSlack = 1e-12;
  const double step_factor = (1.0 - cfg.eta) * (1.0 - cfg.eta);
  const double segment_factor = (cfg.gamma + 1.0) / (2.0 * cfg.gamma);
  const auto& steps = tr.steps;

  for (const auto& s : steps) {
    if (s.heavy) continue;
    bool close = s.query_delta_close.value_or(cfg.policy == Policy::exact_median);
    if (!close) {
      ++out.not_delta_close;
      continue;
    }
    ++out.steps_checked;
    if (s.total_after > step_factor * s.total_before * (1.0 + kSlack)) {
      ++out.step_violations;
      if (out.first_failure.empty())
        out.first_failure = "step " + std::to_string(s.step) + ": ratio " +
                            std::to_string(s.total_after / s.total_before);
    }
  }

  std::size_t i = 0;
  while (i < steps.size()) {
    if (!steps[i].heavy) {
      ++i;
      continue;
    }
    const Vertex q = *steps[i].heavy;
    std::size_t j = i;
    bool queried_throughout = true;
    double log_ratio = 0.0;
    while (j < steps.size() && steps[j].heavy == q) {
      queried_throughout = queried_throughout && steps[j].query == q;
      log_ratio += std::log(steps[j].total_after / steps[j].total_before);
      ++j;
    }
    // j == size means q is still heavy at the end: the segment is not maximal.
    if (j < steps.size() && queried_throughout) {
      ++out.segments_checked;
      const double bound = static_cast<double>(j - i) * std::log(segment_factor);
      if (log_ratio > bound + 1e-9) {
        ++out.segment_violations;
        if (out.first_failure.empty())
          out.first_failure = "heavy segment at steps " + std::to_string(i) + ".." +
                              std::to_string(j - 1) + " on vertex " + std::to_string(q);
      }
    }
    i = j;
  }
  return out;
}

/// Total local-search iterations against tau + (s D + D sum K_t) / (delta s),
/// with the measured resample counts K_t.
inline bool iteration_accounting_holds(const SearchTranscript& tr, const StrategyConfig& cfg,
                                       Distance diameter) {
  const double D = diameter;
  const double steps = static_cast<double>(tr.steps.size());
  double resampled = 0.0;
  double iterations = 0.0;
  for (const auto& s : tr.steps) {
    resampled += static_cast<double>(s.resampled);
    iterations += static_cast<double>(s.local_iterations);
  }
  const double bound =
      steps + (static_cast<double>(cfg.s) * D + D * resampled) / cfg.delta_s();
  return iterations <= bound;
}

}  // namespace ngs
