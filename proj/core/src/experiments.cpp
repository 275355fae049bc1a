#include "zigzag/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "zigzag/targets.hpp"

namespace zigzag {
namespace {

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.replicates < 1)
    throw std::invalid_argument("experiment: replicates must be >= 1");
  if (cfg.checkpoints.empty())
    throw std::invalid_argument("experiment: no checkpoints");
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    const double t = cfg.checkpoints[i];
    if (!(t > 0.0) || !(t <= cfg.horizon) ||
        (i > 0 && t < cfg.checkpoints[i - 1]))
      throw std::invalid_argument(
          "experiment: checkpoints must be sorted and within (0, horizon]");
  }
}

// Runs body(r) for r in [0, n) on the resolved worker count. The first
// exception wins and is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::min<unsigned>(std::max(threads, 1u),
                               static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double pairwise_sum_impl(const double* data, std::size_t n) {
  if (n <= 16) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

}  // namespace

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ZIGZAG_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::vector<double> log_checkpoints(double t_lo, double t_hi, std::size_t n) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || n < 2)
    throw std::invalid_argument("log_checkpoints: need 0 < t_lo < t_hi, n >= 2");
  std::vector<double> out(n);
  const double ratio = std::log(t_hi / t_lo);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = t_lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
  out.back() = t_hi;
  return out;
}

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values.data(), values.size());
}

MseCurve run_mse(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Target target = make_target(cfg.target_tag);
  const RefreshPolicy refresh = make_refresh(cfg.refresh_tag);
  const double truth = tail_probability_truth(target, cfg.query.threshold);

  const std::size_t R = cfg.replicates;
  const std::size_t C = cfg.checkpoints.size();
  std::vector<double> sqerr(R * C);

  parallel_for(R, resolve_threads(cfg.threads), [&](std::size_t r) {
    RngStream rng(cfg.seed, r);
    const Skeleton skel = simulate(cfg.initial, cfg.horizon, target, refresh, rng);
    const auto est = occupation_curve(skel, cfg.query, cfg.checkpoints);
    for (std::size_t j = 0; j < C; ++j) {
      const double e = est[j] - truth;
      sqerr[r * C + j] = e * e;
    }
  });

  MseCurve curve;
  curve.checkpoints = cfg.checkpoints;
  curve.truth = truth;
  curve.mse.resize(C);
  curve.se.resize(C);
  std::vector<double> column(R);
  for (std::size_t j = 0; j < C; ++j) {
    for (std::size_t r = 0; r < R; ++r) column[r] = sqerr[r * C + j];
    const double mean = pairwise_sum(column) / static_cast<double>(R);
    curve.mse[j] = mean;
    if (R > 1) {
      std::vector<double> dev(R);
      for (std::size_t r = 0; r < R; ++r) {
        const double d = column[r] - mean;
        dev[r] = d * d;
      }
      const double var = pairwise_sum(dev) / static_cast<double>(R - 1);
      curve.se[j] = std::sqrt(var / static_cast<double>(R));
    } else {
      curve.se[j] = 0.0;
    }
  }
  return curve;
}

RateReport rate_slope(const ExperimentConfig& cfg, const RateOptions& options) {
  validate_config(cfg);
  const Target target = make_target(cfg.target_tag);
  const RefreshPolicy refresh = make_refresh(cfg.refresh_tag);

  std::vector<double> thresholds = options.thresholds;
  if (thresholds.empty()) {
    thresholds = {0.0};
    for (double a : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0}) {
      thresholds.push_back(a);
      thresholds.push_back(-a);
    }
  }
  std::vector<double> truths(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    truths[i] = tail_probability_truth(target, thresholds[i]);

  const std::size_t R = cfg.replicates;
  const std::size_t C = cfg.checkpoints.size();
  std::vector<double> positions(R * C);
  parallel_for(R, resolve_threads(cfg.threads), [&](std::size_t r) {
    RngStream rng(cfg.seed, r);
    const Skeleton skel = simulate(cfg.initial, cfg.horizon, target, refresh, rng);
    for (std::size_t j = 0; j < C; ++j)
      positions[r * C + j] = skel.position_at(cfg.checkpoints[j]);
  });

  RateReport report;
  report.times = cfg.checkpoints;
  report.discrepancy.resize(C);
  report.noise_floor = 2.0 / std::sqrt(static_cast<double>(R));
  for (std::size_t j = 0; j < C; ++j) {
    double worst = 0.0;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      std::size_t count = 0;  // integer tally: order-independent
      for (std::size_t r = 0; r < R; ++r)
        if (positions[r * C + j] >= thresholds[i]) ++count;
      const double frac = static_cast<double>(count) / static_cast<double>(R);
      worst = std::max(worst, std::abs(frac - truths[i]));
    }
    report.discrepancy[j] = worst;
  }

  const double t_lo = options.fit_t_lo > 0.0 ? options.fit_t_lo : std::sqrt(cfg.horizon);
  const double t_hi = options.fit_t_hi > 0.0 ? options.fit_t_hi : cfg.horizon;
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < C; ++j) {
    const double t = cfg.checkpoints[j];
    const double d = report.discrepancy[j];
    if (t >= t_lo && t <= t_hi && d > report.noise_floor) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(d));
    }
  }
  report.points_used = lx.size();
  if (lx.size() < 4) {
    report.inconclusive = true;
    return report;
  }

  const std::size_t n = lx.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) {
    report.inconclusive = true;
    return report;
  }
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = ly[i] - my - slope * (lx[i] - mx);
    rss += resid * resid;
  }
  const double se = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
  report.slope = slope;
  report.ci_lo = slope - 1.96 * se;
  report.ci_hi = slope + 1.96 * se;
  return report;
}

double fit_B(std::span<const double> times, std::span<const double> series,
             const DriftParams& params, ZigZagState state, const Target& target) {
  if (times.size() != series.size())
    throw std::invalid_argument("fit_B: times and series sizes differ");
  const double v = lyapunov(state.x, state.theta, params, target);
  double best = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (!(t > 0.0)) throw std::invalid_argument("fit_B: times must be > 0");
    const double envelope = v / std::pow(t, 1.0 + params.k) + std::pow(t, -params.k);
    best = std::max(best, series[i] / envelope);
  }
  return best;
}

}  // namespace zigzag
