#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ngs/harness.hpp"

namespace ngs {

struct BenchOptions {
  GraphKind kind = GraphKind::erdos_renyi;
  std::vector<std::size_t> ns{256, 512, 1024, 2048, 4096};
  std::vector<Policy> policies{Policy::global_sampled};
  double epsilon = 0.2;
  std::size_t trials = 1;
  std::uint64_t seed = 7;
  ConstantScale scale;
};

struct BenchPoint {
  std::size_t n = 0;
  Policy policy = Policy::global_sampled;
  double mean_query_seconds = 0.0;
  double p95_query_seconds = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;  // cells that errored or missed the target
};

struct BenchResult {
  std::vector<BenchPoint> points;
  std::vector<std::pair<Policy, double>> slopes;  // log-log fit of mean time against n

  double slope(Policy p) const {
    for (auto [policy, s] : slopes)
      if (policy == p) return s;
    throw std::out_of_range("no slope for policy");
  }
  const BenchPoint& at(std::size_t n, Policy p) const {
    for (const auto& pt : points)
      if (pt.n == n && pt.policy == p) return pt;
    throw std::out_of_range("no bench point");
  }
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Per-query wall time against n. Always runs on one worker so that cells do
/// not compete for cores.
inline BenchResult bench_scaling(const BenchOptions& o) {
  if (o.ns.size() < 3) throw std::invalid_argument("bench needs at least 3 values of n");
  BenchResult out;
  for (std::size_t n : o.ns) {
    ExperimentSpec spec;
    spec.graph.kind = o.kind;
    spec.graph.n = n;
    spec.epsilon = o.epsilon;
    spec.policies = o.policies;
    spec.trials = o.trials;
    spec.seed = o.seed;
    spec.scale = o.scale;
    spec.workers = 1;
    std::vector<BenchPoint> pts;
    for (Policy p : o.policies) pts.push_back({n, p});
    run_experiment(spec, [&](const ResultRow& r) {
      for (auto& pt : pts) {
        if (to_string(pt.policy) != r.policy) continue;
        if (!r.error.empty() || !r.mean_query_seconds) {
          ++pt.failures;
          continue;
        }
        pt.failures += !r.success;
        pt.mean_query_seconds += *r.mean_query_seconds;
        pt.p95_query_seconds += *r.p95_query_seconds;
        ++pt.runs;
      }
    });
    for (auto& pt : pts) {
      if (pt.runs) {
        pt.mean_query_seconds /= static_cast<double>(pt.runs);
        pt.p95_query_seconds /= static_cast<double>(pt.runs);
      }
      out.points.push_back(pt);
    }
  }
  for (Policy p : o.policies) {
    std::vector<double> x, y;
    for (const auto& pt : out.points)
      if (pt.policy == p && pt.runs) {
        x.push_back(static_cast<double>(pt.n));
        y.push_back(pt.mean_query_seconds);
      }
    if (x.size() >= 2) out.slopes.emplace_back(p, loglog_slope(x, y));
  }
  return out;
}

inline nlohmann::json to_json(const BenchResult& r) {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& pt : r.points)
    j["points"].push_back({{"n", pt.n},
                           {"policy", to_string(pt.policy)},
                           {"mean_query_seconds", pt.mean_query_seconds},
                           {"p95_query_seconds", pt.p95_query_seconds},
                           {"runs", pt.runs},
                           {"failures", pt.failures}});
  j["slopes"] = nlohmann::json::object();
  for (auto [p, s] : r.slopes) j["slopes"][std::string(to_string(p))] = s;
  return j;
}

}  // namespace ngs
