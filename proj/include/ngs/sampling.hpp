#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngs/graph.hpp"
#include "ngs/rng.hpp"
#include "ngs/weights.hpp"

namespace ngs {

/// s = ceil(8 ln n / delta^2), at least 1.
inline std::size_t sample_size(std::size_t n, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  double s = std::ceil(8.0 * std::log(static_cast<double>(n)) / (delta * delta));
  return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

/// k sorted uniforms on [0, 1).
///
/// Bucket sort with k buckets: the inputs are uniform, so each bucket holds
/// O(1) points on average and the final insertion pass is expected linear.
inline std::vector<double> sorted_uniforms(std::size_t k, Rng& rng) {
  std::vector<double> points(k);
  for (double& p : points) p = uniform01(rng);
  if (k < 2) return points;
  auto bucket = [k](double u) { return std::min(k - 1, static_cast<std::size_t>(u * static_cast<double>(k))); };
  std::vector<std::uint32_t> start(k + 1, 0);
  for (double u : points) ++start[bucket(u) + 1];
  for (std::size_t b = 0; b < k; ++b) start[b + 1] += start[b];
  std::vector<double> sorted(k);
  for (double u : points) sorted[start[bucket(u)]++] = u;
  for (std::size_t i = 1; i < k; ++i) {
    double x = sorted[i];
    std::size_t j = i;
    for (; j > 0 && sorted[j - 1] > x; --j) sorted[j] = sorted[j - 1];
    sorted[j] = x;
  }
  return sorted;
}

/// k independent draws proportional to `omega`.
///
/// Walks the cumulative weights once against k sorted uniforms, so the cost
/// is O(n + k). The draws are shuffled afterwards so that every output
/// position carries the same marginal law.
inline std::vector<Vertex> draw_weighted(std::span<const double> omega, double total,
                                         std::size_t k, Rng& rng) {
  std::vector<Vertex> out;
  if (k == 0) return out;
  if (!(total > 0.0)) throw std::invalid_argument("cannot sample from zero total weight");
  out.reserve(k);
  std::size_t v = 0;
  Vertex last_positive = 0;
  double cumulative = 0.0;
  for (double u : sorted_uniforms(k, rng)) {
    const double p = u * total;
    while (v < omega.size() && cumulative + omega[v] <= p) {
      cumulative += omega[v];
      if (omega[v] > 0.0) last_positive = static_cast<Vertex>(v);
      ++v;
    }
    // Rounding can leave p at or beyond the final cumulative sum.
    out.push_back(v < omega.size() ? static_cast<Vertex>(v) : last_positive);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

enum class PhiStarMode {
  cached,     // Phi* kept for every vertex, updated incrementally on resampling
  on_demand,  // Phi*(v) summed over the occupied vertices when asked
};

struct PhiStarCheck {
  bool consistent = true;
  std::optional<Vertex> first_mismatch;
  std::string diagnostic;

  explicit operator bool() const { return consistent; }
};

/// Multiset of s vertex ids with stable positions, plus per-vertex counts and
/// Phi*(v) = sum over members m of d(m, v).
class Sample {
 public:
  Sample(const DistanceMatrix& d, std::vector<Vertex> members, PhiStarMode mode)
      : dist_(&d), mode_(mode), members_(std::move(members)), counts_(d.order(), 0),
        slot_(d.order(), kNoSlot) {
    if (members_.empty()) throw std::invalid_argument("sample must be non-empty");
    slots_of_.resize(d.order());
    for (std::size_t i = 0; i < members_.size(); ++i) {
      Vertex m = members_[i];
      if (m >= d.order()) throw std::out_of_range("sample member out of range");
      add_count(m);
      slots_of_[m].push_back(static_cast<std::uint32_t>(i));
    }
    if (mode_ == PhiStarMode::cached) {
      phi_star_.assign(d.order(), 0);
      for (Vertex u : occupied_) add_row(u, counts_[u]);
    }
  }

  std::size_t size() const { return members_.size(); }
  std::span<const Vertex> members() const { return members_; }
  std::uint32_t count(Vertex v) const { return counts_[v]; }
  std::span<const std::uint32_t> counts() const { return counts_; }
  /// Vertices holding at least one member, in no particular order.
  std::span<const Vertex> occupied() const { return occupied_; }
  PhiStarMode mode() const { return mode_; }
  const DistanceMatrix& distances() const { return *dist_; }

  std::int64_t phi_star(Vertex v) const {
    if (mode_ == PhiStarMode::cached) return phi_star_[v];
    auto row = dist_->row(v);
    std::int64_t acc = 0;
    for (Vertex u : occupied_) acc += std::int64_t{counts_[u]} * row[u];
    return acc;
  }

  /// Global Phi*-minimizer, lowest id on ties.
  Vertex argmin_phi_star() const {
    const std::size_t n = dist_->order();
    Vertex best = 0;
    std::int64_t best_value = phi_star(0);
    for (Vertex v = 1; v < n; ++v) {
      std::int64_t value = phi_star(v);
      if (value < best_value) {
        best_value = value;
        best = v;
      }
    }
    return best;
  }

  /// One step of the maintenance rule: members consistent with the reply stay;
  /// an inconsistent member stays with probability 1/gamma and is otherwise
  /// redrawn proportionally to `w_next`. Returns the number of redrawn members.
  /// Cost O(n + redrawn), independent of the sample size.
  std::size_t resample(std::span<const std::uint8_t> consistent, const WeightState& w_next,
                       double gamma, Rng& rng) {
    if (consistent.size() != counts_.size())
      throw std::invalid_argument("consistency mask has the wrong length");
    const double keep = 1.0 / gamma;
    redraw_.clear();
    if (keep >= 1.0) return 0;
    // Members are independent coins, and members at the same vertex are
    // interchangeable: draw how many leave each inconsistent vertex and free
    // that many of its slots.
    for (Vertex v = 0; v < counts_.size(); ++v) {
      if (consistent[v] || counts_[v] == 0) continue;
      std::binomial_distribution<std::uint32_t> leaving(counts_[v], 1.0 - keep);
      auto& slots = slots_of_[v];
      for (std::uint32_t k = leaving(rng); k > 0; --k) {
        redraw_.push_back(slots.back());
        slots.pop_back();
      }
    }
    if (redraw_.empty()) return 0;

    auto fresh = draw_weighted(w_next.omega(), w_next.total(), redraw_.size(), rng);
    if (delta_.size() != counts_.size()) delta_.assign(counts_.size(), 0);
    touched_.clear();
    auto bump = [&](Vertex v, std::int64_t by) {
      if (delta_[v] == 0) touched_.push_back(v);
      delta_[v] += by;
    };
    for (std::size_t j = 0; j < redraw_.size(); ++j) {
      Vertex& slot = members_[redraw_[j]];
      Vertex old = slot;
      Vertex now = fresh[j];
      slots_of_[now].push_back(redraw_[j]);
      if (old == now) continue;
      slot = now;
      remove_count(old);
      add_count(now);
      bump(old, -1);
      bump(now, +1);
    }
    // Subtract rows of removed members, add rows of inserted ones.
    for (Vertex u : touched_) {
      if (delta_[u] != 0 && mode_ == PhiStarMode::cached) add_row(u, delta_[u]);
      delta_[u] = 0;
    }
    return redraw_.size();
  }

  /// Compares the maintained state against a from-scratch recomputation
  /// built only from the member array.
  PhiStarCheck recompute_check() const {
    const std::size_t n = dist_->order();
    // Four interleaved tallies: members pile up on few vertices, and a single
    // array would serialize on the same counter.
    std::vector<std::int64_t> tally(4 * n, 0);
    std::size_t i = 0;
    for (; i + 4 <= members_.size(); i += 4)
      for (std::size_t lane = 0; lane < 4; ++lane) ++tally[lane * n + members_[i + lane]];
    for (; i < members_.size(); ++i) ++tally[members_[i]];
    std::vector<std::int64_t> histogram(n, 0);
    for (Vertex v = 0; v < n; ++v)
      histogram[v] = tally[v] + tally[n + v] + tally[2 * n + v] + tally[3 * n + v];
    PhiStarCheck result;
    for (Vertex v = 0; v < n; ++v) {
      if (histogram[v] != counts_[v] || slots_of_[v].size() != counts_[v]) {
        result.consistent = false;
        result.first_mismatch = v;
        result.diagnostic = "member count at vertex " + std::to_string(v) + " is " +
                            std::to_string(counts_[v]) + ", expected " +
                            std::to_string(histogram[v]);
        return result;
      }
    }
    for (Vertex v = 0; v < n; ++v) {
      auto row = dist_->row(v);
      std::int64_t expected = 0;
      for (Vertex u = 0; u < n; ++u) expected += histogram[u] * row[u];
      std::int64_t got = phi_star(v);
      if (got != expected) {
        result.consistent = false;
        result.first_mismatch = v;
        result.diagnostic = "Phi* at vertex " + std::to_string(v) + " is " + std::to_string(got) +
                            ", recomputed " + std::to_string(expected);
        return result;
      }
    }
    return result;
  }

  /// Negative-control hook: perturbs one cached Phi* entry.
  void corrupt_cached_phi_star(Vertex v, std::int64_t by) {
    if (mode_ != PhiStarMode::cached) throw std::logic_error("no cache in on-demand mode");
    phi_star_[v] += by;
  }

 private:
  static constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();

  void add_count(Vertex v) {
    if (counts_[v]++ == 0) {
      slot_[v] = static_cast<std::uint32_t>(occupied_.size());
      occupied_.push_back(v);
    }
  }

  void remove_count(Vertex v) {
    if (--counts_[v] == 0) {
      Vertex moved = occupied_.back();
      occupied_[slot_[v]] = moved;
      slot_[moved] = slot_[v];
      occupied_.pop_back();
      slot_[v] = kNoSlot;
    }
  }

  void add_row(Vertex u, std::int64_t times) {
    auto row = dist_->row(u);
    for (std::size_t v = 0; v < phi_star_.size(); ++v) phi_star_[v] += times * row[v];
  }

  const DistanceMatrix* dist_;
  PhiStarMode mode_;
  std::vector<Vertex> members_;
  std::vector<std::uint32_t> counts_;
  std::vector<Vertex> occupied_;
  std::vector<std::uint32_t> slot_;
  std::vector<std::int64_t> phi_star_;
  std::vector<std::vector<std::uint32_t>> slots_of_;  // member positions per vertex

  // Scratch buffers reused across resample calls.
  std::vector<std::uint32_t> redraw_;
  std::vector<std::int64_t> delta_;
  std::vector<Vertex> touched_;
};

inline Sample draw_sample(const WeightState& w, std::size_t s, const DistanceMatrix& d,
                          PhiStarMode mode, Rng& rng) {
  if (s == 0) throw std::invalid_argument("sample size must be positive");
  return Sample(d, draw_weighted(w.omega(), w.total(), s, rng), mode);
}

inline std::size_t resample(Sample& sample, std::span<const std::uint8_t> consistent,
                            const WeightState& w_next, double gamma, Rng& rng) {
  return sample.resample(consistent, w_next, gamma, rng);
}

/// Members of the sample that lie in N(v, u).
inline std::int64_t branch_count(const Sample& sample, Vertex v, Vertex u) {
  const auto& d = sample.distances();
  auto from_v = d.row(v);
  auto from_u = d.row(u);
  std::int64_t acc = 0;
  for (Vertex x : sample.occupied())
    if (from_v[x] == from_u[x] + 1) acc += sample.count(x);
  return acc;
}

/// Lambda*(v) = max over neighbors u of |S ∩ N(v, u)|, counted with multiplicity.
inline std::int64_t lambda_star(const Sample& sample, const Graph& g, Vertex v) {
  std::int64_t best = 0;
  for (Vertex u : g.neighbors(v)) best = std::max(best, branch_count(sample, v, u));
  return best;
}

inline PhiStarCheck phi_star_recompute_check(const Sample& sample) {
  return sample.recompute_check();
}

}  // namespace ngs
