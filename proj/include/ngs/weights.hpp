#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngs/graph.hpp"

namespace ngs {

/// Multiplicative-weight state: per-vertex weight and lie counter.
///
/// Weights stay positive in exact arithmetic. In double precision a weight
/// whose ratio to the heaviest one drops below the subnormal range flushes to
/// zero; the lie counters remain the exact record and decide the answer.
class WeightState {
 public:
  static WeightState uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("weight state needs n >= 1");
    WeightState w;
    w.omega_.assign(n, 1.0 / static_cast<double>(n));
    w.lies_.assign(n, 0);
    w.total_ = 1.0;
    return w;
  }

  /// Arbitrary positive weights with zero lie counters (verifiers and tests).
  static WeightState from_weights(std::vector<double> omega) {
    if (omega.empty()) throw std::invalid_argument("weight state needs n >= 1");
    for (double x : omega)
      if (!(x > 0.0)) throw std::invalid_argument("weights must be positive");
    WeightState w;
    w.lies_.assign(omega.size(), 0);
    w.omega_ = std::move(omega);
    w.total_ = std::accumulate(w.omega_.begin(), w.omega_.end(), 0.0);
    return w;
  }

  std::size_t size() const { return omega_.size(); }
  std::span<const double> omega() const { return omega_; }
  std::span<const std::uint32_t> lies() const { return lies_; }
  double operator[](Vertex v) const { return omega_[v]; }
  std::uint32_t lies(Vertex v) const { return lies_[v]; }
  double total() const { return total_; }

  /// Divides every vertex outside `consistent` by gamma and bumps its lie counter.
  void apply_reply(std::span<const std::uint8_t> consistent, double gamma) {
    if (!(gamma > 1.0)) throw std::invalid_argument("update factor must exceed 1");
    if (consistent.size() != omega_.size())
      throw std::invalid_argument("consistency mask has the wrong length");
    if (std::none_of(consistent.begin(), consistent.end(), [](auto b) { return b != 0; }))
      throw std::invalid_argument("empty consistent set");
    double sum = 0.0;
    for (std::size_t v = 0; v < omega_.size(); ++v) {
      if (!consistent[v]) {
        omega_[v] /= gamma;
        ++lies_[v];
      }
      sum += omega_[v];
    }
    total_ = sum;
  }

  void renormalize() {
    double sum = std::accumulate(omega_.begin(), omega_.end(), 0.0);
    if (!(sum > 0.0)) throw std::logic_error("cannot renormalize zero total weight");
    const double scale = 1.0 / sum;
    for (double& x : omega_) x *= scale;
    total_ = std::accumulate(omega_.begin(), omega_.end(), 0.0);
  }

  /// Vertex with the fewest recorded lies, lowest id on ties.
  Vertex report_answer() const {
    return static_cast<Vertex>(std::min_element(lies_.begin(), lies_.end()) - lies_.begin());
  }

 private:
  std::vector<double> omega_;
  std::vector<std::uint32_t> lies_;
  double total_ = 0.0;
};

/// Value-returning form of WeightState::apply_reply over an explicit vertex set.
inline WeightState mwu_update(WeightState w, std::span<const Vertex> consistent, double gamma) {
  if (consistent.empty()) throw std::invalid_argument("empty consistent set");
  std::vector<std::uint8_t> mask(w.size(), 0);
  for (Vertex v : consistent) {
    if (v >= w.size()) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    mask[v] = 1;
  }
  w.apply_reply(mask, gamma);
  return w;
}

inline WeightState renormalize(WeightState w) {
  w.renormalize();
  return w;
}

}  // namespace ngs
