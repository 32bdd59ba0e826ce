#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ngs/graph.hpp"
#include "ngs/potential.hpp"
#include "ngs/rng.hpp"
#include "ngs/weights.hpp"

namespace ngs {

struct Reply {
  Vertex vertex = 0;
  bool erroneous = false;  // disclosed to the transcript only
};

/// Anything a search run can query.
template <class O>
concept Responder = requires(O& oracle, const O& view, Vertex q, const WeightState& w) {
  { oracle.respond(q, w) } -> std::same_as<Reply>;
  { view.target() } -> std::convertible_to<Vertex>;
};

enum class TieBreak { uniform_random, lowest_id, adversarial_weight };
enum class ErrorModel { uniform_wrong, adversarial_wrong };
enum class AdversaryPolicy { greedy_heavy, random_schedule, fixed_schedule };

inline TieBreak parse_tie_break(std::string_view s) {
  if (s == "uniform-random") return TieBreak::uniform_random;
  if (s == "lowest-id") return TieBreak::lowest_id;
  if (s == "adversarial-weight") return TieBreak::adversarial_weight;
  throw std::invalid_argument("unknown tie-break '" + std::string(s) + "'");
}

inline ErrorModel parse_error_model(std::string_view s) {
  if (s == "uniform-wrong") return ErrorModel::uniform_wrong;
  if (s == "adversarial-wrong") return ErrorModel::adversarial_wrong;
  throw std::invalid_argument("unknown error model '" + std::string(s) + "'");
}

inline AdversaryPolicy parse_adversary_policy(std::string_view s) {
  if (s == "greedy-heavy") return AdversaryPolicy::greedy_heavy;
  if (s == "random-schedule") return AdversaryPolicy::random_schedule;
  if (s == "fixed-schedule") return AdversaryPolicy::fixed_schedule;
  throw std::invalid_argument("unknown adversary policy '" + std::string(s) + "'");
}

/// Total weight that stays consistent if `v` is the reply to `q`.
inline double reply_weight(std::span<const double> omega, const DistanceMatrix& d, Vertex q,
                           Vertex v) {
  return v == q ? omega[q] : branch_weight(omega, d, q, v);
}

/// Replies a correct answerer may give: {q} at the target, otherwise every
/// neighbor of q on a shortest path to the target.
inline std::vector<Vertex> truthful_replies(const Graph& g, const DistanceMatrix& d, Vertex target,
                                            Vertex q) {
  if (q == target) return {q};
  std::vector<Vertex> out;
  const auto to_target = d(q, target);
  for (Vertex v : g.neighbors(q))
    if (d(v, target) + 1 == to_target) out.push_back(v);
  return out;
}

/// Replies under which the target is no longer consistent.
inline std::vector<Vertex> misleading_replies(const Graph& g, const DistanceMatrix& d,
                                              Vertex target, Vertex q) {
  std::vector<Vertex> out;
  if (q != target) out.push_back(q);
  const auto to_target = d(q, target);
  for (Vertex v : g.neighbors(q))
    if (q == target || d(v, target) + 1 != to_target) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline Vertex heaviest_reply(std::span<const Vertex> options, std::span<const double> omega,
                             const DistanceMatrix& d, Vertex q) {
  Vertex best = options.front();
  double best_weight = -1.0;
  for (Vertex v : options) {
    double x = reply_weight(omega, d, q, v);
    if (x > best_weight) {
      best_weight = x;
      best = v;
    }
  }
  return best;
}

inline Vertex pick_uniform(std::span<const Vertex> options, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
  return options[pick(rng)];
}

}  // namespace detail

inline Vertex truthful_reply(const Graph& g, const DistanceMatrix& d, Vertex target, Vertex q,
                             TieBreak tie_break, std::span<const double> omega, Rng& rng) {
  auto options = truthful_replies(g, d, target, q);
  switch (tie_break) {
    case TieBreak::lowest_id: return options.front();
    case TieBreak::uniform_random: return detail::pick_uniform(options, rng);
    case TieBreak::adversarial_weight: return detail::heaviest_reply(options, omega, d, q);
  }
  return options.front();
}

/// Replies wrongly with probability p, independently per query.
class NoisyOracle {
 public:
  struct Options {
    double p = 0.0;
    TieBreak tie_break = TieBreak::uniform_random;
    ErrorModel error_model = ErrorModel::uniform_wrong;
  };

  NoisyOracle(const Graph& g, Vertex target, Options options, Rng rng)
      : graph_(&g), target_(target), options_(options), rng_(std::move(rng)) {
    if (target >= g.order()) throw std::out_of_range("target outside the graph");
    if (!(options.p >= 0.0 && options.p < 0.5))
      throw std::invalid_argument("error probability must lie in [0, 1/2)");
  }

  Vertex target() const { return target_; }
  double error_probability() const { return options_.p; }

  Reply respond(Vertex q, const WeightState& w) {
    const auto& d = graph_->distances();
    const bool lie = options_.p > 0.0 && uniform01(rng_) < options_.p;
    if (lie) {
      auto options = misleading_replies(*graph_, d, target_, q);
      if (!options.empty()) {
        Vertex v = options_.error_model == ErrorModel::uniform_wrong
                       ? detail::pick_uniform(options, rng_)
                       : detail::heaviest_reply(options, w.omega(), d, q);
        return {v, true};
      }
    }
    return {truthful_reply(*graph_, d, target_, q, options_.tie_break, w.omega(), rng_), false};
  }

 private:
  const Graph* graph_;
  Vertex target_;
  Options options_;
  Rng rng_;
};

/// Lies at most `budget` times over the whole run; placement per policy.
class AdversarialOracle {
 public:
  struct Options {
    AdversaryPolicy policy = AdversaryPolicy::greedy_heavy;
    std::size_t budget = 0;
    std::size_t horizon = 0;             // run length, for random-schedule
    std::vector<std::size_t> schedule;   // fixed-schedule lie steps; empty = first `budget`
    TieBreak tie_break = TieBreak::adversarial_weight;
  };

  AdversarialOracle(const Graph& g, Vertex target, Options options, Rng rng)
      : graph_(&g), target_(target), options_(std::move(options)), rng_(std::move(rng)) {
    if (target >= g.order()) throw std::out_of_range("target outside the graph");
    if (options_.policy == AdversaryPolicy::random_schedule) {
      std::size_t k = std::min(options_.budget, options_.horizon);
      std::vector<std::size_t> steps(options_.horizon);
      for (std::size_t i = 0; i < steps.size(); ++i) steps[i] = i;
      // Partial Fisher-Yates: first k entries are a uniform k-subset.
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, steps.size() - 1);
        std::swap(steps[i], steps[pick(rng_)]);
      }
      lie_steps_.assign(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(k));
    } else if (options_.policy == AdversaryPolicy::fixed_schedule) {
      lie_steps_ = options_.schedule;
      if (lie_steps_.empty())
        for (std::size_t i = 0; i < options_.budget; ++i) lie_steps_.push_back(i);
    }
    std::sort(lie_steps_.begin(), lie_steps_.end());
  }

  Vertex target() const { return target_; }
  std::size_t budget() const { return options_.budget; }
  std::size_t lies_spent() const { return lies_spent_; }

  Reply respond(Vertex q, const WeightState& w) {
    const auto& d = graph_->distances();
    const std::size_t step = step_++;
    Vertex truthful = truthful_reply(*graph_, d, target_, q, options_.tie_break, w.omega(), rng_);
    if (lies_spent_ >= options_.budget) return {truthful, false};

    auto options = misleading_replies(*graph_, d, target_, q);
    if (options.empty()) return {truthful, false};

    switch (options_.policy) {
      case AdversaryPolicy::greedy_heavy: {
        Vertex lie = detail::heaviest_reply(options, w.omega(), d, q);
        if (reply_weight(w.omega(), d, q, lie) > reply_weight(w.omega(), d, q, truthful)) {
          ++lies_spent_;
          return {lie, true};
        }
        return {truthful, false};
      }
      case AdversaryPolicy::random_schedule:
        if (std::binary_search(lie_steps_.begin(), lie_steps_.end(), step)) {
          ++lies_spent_;
          return {detail::pick_uniform(options, rng_), true};
        }
        return {truthful, false};
      case AdversaryPolicy::fixed_schedule:
        if (std::binary_search(lie_steps_.begin(), lie_steps_.end(), step)) {
          ++lies_spent_;
          return {detail::heaviest_reply(options, w.omega(), d, q), true};
        }
        return {truthful, false};
    }
    return {truthful, false};
  }

 private:
  const Graph* graph_;
  Vertex target_;
  Options options_;
  Rng rng_;
  std::vector<std::size_t> lie_steps_;
  std::size_t step_ = 0;
  std::size_t lies_spent_ = 0;
};

}  // namespace ngs
