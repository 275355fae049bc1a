#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zigzag/estimators.hpp"
#include "zigzag/pdmp.hpp"
#include "zigzag/theory.hpp"

namespace zigzag {

/// Declarative description of a replicate study. Replicate r runs on
/// RngStream(seed, r), so no two replicates share a stream and the whole
/// study is reproducible from the seed alone.
struct ExperimentConfig {
  std::string target_tag = "cauchy";
  std::string refresh_tag = "zero";
  ZigZagState initial{-5.0, +1};
  double horizon = 1e4;
  std::size_t replicates = 1000;
  std::vector<double> checkpoints;  // sorted, within (0, horizon]
  std::uint64_t seed = 0;
  IndicatorQuery query{5.0};
  /// Worker threads; 0 means the ZIGZAG_THREADS environment variable or,
  /// failing that, the hardware concurrency.
  unsigned threads = 0;
};

/// n log-spaced checkpoints spanning [t_lo, t_hi].
std::vector<double> log_checkpoints(double t_lo, double t_hi, std::size_t n);

struct MseCurve {
  std::vector<double> checkpoints;
  std::vector<double> mse;   // mean over replicates of (estimate - truth)^2
  std::vector<double> se;    // sd of the squared errors / sqrt(replicates)
  double truth = 0.0;
};

/// Runs `replicates` independent paths, evaluates the occupation estimator
/// against the query at every checkpoint and aggregates the squared error
/// against the exact tail probability. Aggregation uses a fixed pairwise
/// summation tree over replicate index, so the result is bit-identical for
/// any thread count. All-or-nothing: any replicate failure propagates and
/// no partial curve is returned.
MseCurve run_mse(const ExperimentConfig& config);

struct RateOptions {
  /// Thresholds of the discrepancy family; empty picks a symmetric
  /// log-spaced default.
  std::vector<double> thresholds;
  /// Least-squares window on the time axis; zeros mean [sqrt(T), T].
  double fit_t_lo = 0.0;
  double fit_t_hi = 0.0;
};

struct RateReport {
  std::vector<double> times;
  std::vector<double> discrepancy;  // D(t), a lower bound on the TV distance
  double noise_floor = 0.0;         // 2/sqrt(replicates)
  double slope = 0.0;               // log-log least squares over usable points
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% CI for the slope
  std::size_t points_used = 0;
  bool inconclusive = false;        // fewer than 4 usable points
};

/// Empirical convergence-rate probe: at each checkpoint t computes
///   D(t) = max over thresholds a of |P_hat(X_t >= a) - pi([a, inf))|,
/// a lower bound on the total-variation distance of the time-t law, then
/// fits the slope of log D against log t over the tail window, ignoring
/// points below the Monte Carlo noise floor.
RateReport rate_slope(const ExperimentConfig& config, const RateOptions& options = {});

/// Smallest B such that B (V(state)/t^{1+k} + 1/t^k) dominates the series
/// pointwise: the sup over checkpoints of series/envelope. The params
/// should come from a successful drift certificate.
double fit_B(std::span<const double> times, std::span<const double> series,
             const DriftParams& params, ZigZagState state, const Target& target);

/// Deterministic pairwise-tree sum (order-fixed, parallelism-proof).
double pairwise_sum(std::span<const double> values);

/// Thread-count resolution used by the replicate farms.
unsigned resolve_threads(unsigned requested);

}  // namespace zigzag
