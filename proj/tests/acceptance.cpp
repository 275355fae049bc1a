// Acceptance suite: end-to-end checks of the sampler, the estimators and
// the ergodicity machinery at pinned tolerances. Each criterion prints one
// PASS/FAIL line; the exit code is the number of failures.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dynkin_helpers.hpp"
#include "zigzag/estimators.hpp"
#include "zigzag/experiments.hpp"
#include "zigzag/pdmp.hpp"
#include "zigzag/rng.hpp"
#include "zigzag/targets.hpp"
#include "zigzag/theory.hpp"

using namespace zigzag;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<void(std::ostringstream&)> run;  // throws on failure
};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

double ks_statistic(std::vector<double> draws,
                    const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

double batch_se(const Skeleton& skel, double threshold, int batches) {
  const double len = skel.horizon / batches;
  std::vector<double> means(batches);
  double prev = 0.0;
  for (int b = 0; b < batches; ++b) {
    const double cum = occupation_time(skel, {threshold}, len * (b + 1)).time_in_set;
    means[b] = (cum - prev) / len;
    prev = cum;
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= batches;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (batches - 1);
  return std::sqrt(var / batches);
}

// --- 1. Figure-style MSE ordering across refresh policies ---------------
void criterion_fig1(std::ostringstream& info) {
  const Target cauchy = make_cauchy();
  const double closed = 0.5 - std::atan(5.0) / M_PI;
  require(std::abs(closed - 0.0628) < 5e-5, "closed form drifted from 0.0628");
  require(std::abs(tail_probability_quadrature(cauchy, 5.0) - closed) < 1e-10,
          "quadrature and closed form disagree beyond 1e-10");

  ExperimentConfig base;
  base.target_tag = "cauchy";
  base.initial = {-5.0, +1};
  base.horizon = 1e4;
  base.replicates = 1000;
  base.checkpoints = log_checkpoints(1.0, 1e4, 200);
  base.seed = 20240601;
  base.query.threshold = 5.0;

  const std::vector<std::string> policies = {"zero", "grad:1", "const:1"};
  std::vector<double> final_mse, final_se;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    ExperimentConfig cfg = base;
    cfg.refresh_tag = policies[i];
    cfg.seed = base.seed + 1000003ULL * i;
    const MseCurve curve = run_mse(cfg);
    final_mse.push_back(curve.mse.back());
    final_se.push_back(curve.se.back());
  }
  info << "final MSE: zero=" << final_mse[0] << " grad=" << final_mse[1]
       << " const=" << final_mse[2];
  require(final_mse[0] < final_mse[1] && final_mse[1] < final_mse[2],
          "MSE ordering MSE(0) < MSE(|U'|) < MSE(1) violated");
  const double pooled =
      std::sqrt(final_se[0] * final_se[0] + final_se[2] * final_se[2]);
  info << " gap/(pooled se)=" << (final_mse[2] - final_mse[0]) / pooled;
  require(final_mse[2] - final_mse[0] > 3.0 * pooled,
          "gamma=0 vs gamma=1 gap below 3 pooled standard errors");
}

// --- 2. Stationarity of a single long run -------------------------------
void criterion_stationarity(std::ostringstream& info) {
  const Target cauchy = make_cauchy();
  RngStream rng(4242424242ULL, 0);
  const Skeleton skel = simulate({0.0, +1}, 1e6, cauchy, RefreshPolicy::zero(), rng);

  struct Interval {
    double lo, hi, truth;
  };
  const std::vector<Interval> intervals = {
      {5.0, 1e308, 0.5 - std::atan(5.0) / M_PI},
      {1.0, 5.0, (std::atan(5.0) - std::atan(1.0)) / M_PI},
      {0.0, 1.0, std::atan(1.0) / M_PI}};
  for (const auto& iv : intervals) {
    const double above_lo = occupation_time(skel, {iv.lo}, skel.horizon).time_in_set;
    const double above_hi =
        iv.hi > 1e307 ? 0.0
                      : occupation_time(skel, {iv.hi}, skel.horizon).time_in_set;
    const double est = (above_lo - above_hi) / skel.horizon;
    const double se =
        std::max({batch_se(skel, iv.lo, 100),
                  iv.hi > 1e307 ? 0.0 : batch_se(skel, iv.hi, 100), 1e-5});
    info << " [" << iv.lo << "," << (iv.hi > 1e307 ? std::string("inf") : std::to_string(iv.hi))
         << "): est=" << est << " truth=" << iv.truth << " se=" << se << ";";
    require(std::abs(est - iv.truth) <= 3.0 * se,
            "occupation estimate beyond 3 standard errors of the invariant law");
  }
}

// --- 3. Exactness of the first-event law --------------------------------
void criterion_event_law(std::ostringstream& info) {
  const Target gauss = make_gaussian();
  const RefreshPolicy zero = RefreshPolicy::zero();
  const int n = 100000;
  std::vector<double> draws;
  draws.reserve(n);
  for (int i = 0; i < n; ++i) {
    RngStream rng(55501, static_cast<std::uint64_t>(i));
    const auto ev = first_event_time({0.0, +1}, gauss, zero, 1e9, rng);
    require(ev.has_value(), "gaussian first event must exist");
    draws.push_back(ev->time);
  }
  const double d =
      ks_statistic(std::move(draws), [](double s) { return -std::expm1(-0.5 * s * s); });
  info << "KS statistic=" << d << " (n=1e5)";
  require(d < 0.006, "KS statistic of the first-event law exceeds 0.006");
}

// --- 4. Drift certificates mirror the theorem hypotheses ----------------
void criterion_drift(std::ostringstream& info) {
  const Target cauchy = make_cauchy();
  const auto c1 = certify_drift(cauchy, RefreshPolicy::zero(), 0.5);
  require(c1.certified, "Cauchy gamma=0 k=0.5 must certify");
  const auto c2 = certify_drift(make_student(2.0), RefreshPolicy::zero(), 1.0);
  require(c2.certified, "Student nu=2 gamma=0 k=1 must certify");
  info << "cauchy: beta=" << c1.params.beta << " delta=" << c1.params.delta
       << " radius=" << c1.compact_radius << " c'=" << c1.c_margin << ";";
  for (double k : {0.25, 0.5, 0.9}) {
    const auto bad = certify_drift(cauchy, RefreshPolicy::constant(1.0), k);
    require(!bad.certified, "Cauchy with constant refresh must not certify");
  }
  info << " const-refresh rejected for k in {0.25, 0.5, 0.9}";
}

// --- 5. Consistency of the certifier with the M(k) threshold ------------
void criterion_remark_threshold(std::ostringstream& info) {
  const struct {
    double nu, k;
  } cases[] = {{1.0, 0.5}, {2.0, 1.0}};
  for (const auto& c : cases) {
    const double M = refresh_threshold_M(c.k, c.nu, 0.1);
    const Target target = make_student(c.nu);
    const auto report =
        certify_drift(target, RefreshPolicy::grad_proportional(M), c.k);
    info << " M(k=" << c.k << ",nu=" << c.nu << ")=" << M
         << " certified=" << (report.certified ? "yes" : "no") << ";";
    require(report.certified,
            "largest certified refresh ratio fell below M(k)");
  }
  const double m_limit = refresh_threshold_M(1.0 - 1e-6, 1.0, 1e-3);
  info << " M(nu-1e-6)=" << m_limit;
  require(m_limit < 1e-3, "limit property M(k) -> 0 as k -> nu violated");
}

// --- 6. Hairer transforms ------------------------------------------------
void criterion_hairer(std::ostringstream& info) {
  RngStream rng(606060, 0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double c = 0.01 * std::pow(1000.0, rng.uniform());
    const double a = 0.05 + 0.9 * rng.uniform();
    const HairerTransforms h(c, a);
    for (double t = 0.0; t <= 1e6; t = t == 0.0 ? 1e-6 : t * 3.7) {
      const double r = h.H(h.H_inv(t));
      worst = std::max(worst, std::abs(r - t) / std::max(t, 1.0));
    }
  }
  info << "worst H(H_inv(t)) relative error=" << worst << ";";
  require(worst <= 1e-12, "Hairer inverse-pair identity beyond 1e-12");

  const Target cauchy = make_cauchy();
  const DriftParams p = DriftParams::from_k(0.5, 0.99, 0.82, 0.95);
  double prev = 2.0;
  bool monotone = true;
  for (double t = 1.0; t <= 1e9; t *= 1.3) {
    const double b = tv_upper_bound(t, {-5.0, +1}, p, 2.5, cauchy);
    monotone = monotone && b <= prev + 1e-15;
    prev = b;
  }
  info << " tv bound monotone for t>=1";
  require(monotone, "tv_upper_bound must be nonincreasing for t >= 1");
}

// --- 7. Finite-speed lower bound coherence -------------------------------
void criterion_lower_bound(std::ostringstream& info) {
  const Target cauchy = make_cauchy();
  const RefreshPolicy zero = RefreshPolicy::zero();
  const auto checkpoints = log_checkpoints(1.0, 100.0, 25);
  std::size_t beyond = 0;
  for (int r = 0; r < 10000; ++r) {
    RngStream rng(777001, static_cast<std::uint64_t>(r));
    const Skeleton skel = simulate({0.0, +1}, 100.0, cauchy, zero, rng);
    for (double t : checkpoints)
      if (std::abs(skel.position_at(t)) > t + 1e-9) ++beyond;
  }
  info << "replicates beyond |x|>t: " << beyond << ";";
  require(beyond == 0, "unit-speed law violated: |X_t| > t observed");

  const auto lb = StudentTailLowerBound::compute(1.0);
  double margin = 1e300;
  for (double t = lb.K * 1.0001; t <= 1e4; t *= 1.23) {
    const double exact = 2.0 * tail_probability_quadrature(cauchy, t);
    margin = std::min(margin, exact - lb.value(t));
    require(lb.value(t) <= exact,
            "lower-bound curve exceeds the exact tail mass");
  }
  info << " K=" << lb.K << " C0=" << lb.C0 << " min slack=" << margin;
}

// --- 8. Empirical rate probe + envelope fit ------------------------------
void criterion_rate(std::ostringstream& info) {
  ExperimentConfig cfg;
  cfg.target_tag = "cauchy";
  cfg.refresh_tag = "zero";
  // A distant start keeps the discrepancy above the Monte Carlo noise
  // floor across the pinned window [1e2, 1e4].
  cfg.initial = {-100.0, +1};
  cfg.horizon = 1e4;
  cfg.replicates = 10000;
  cfg.checkpoints = log_checkpoints(1e2, 1e4, 200);
  cfg.seed = 880088;

  RateOptions opts;
  opts.fit_t_lo = 1e2;
  opts.fit_t_hi = 1e4;
  const RateReport report = rate_slope(cfg, opts);
  info << "slope=" << report.slope << " CI=[" << report.ci_lo << ","
       << report.ci_hi << "] points=" << report.points_used << ";";
  require(!report.inconclusive, "rate fit inconclusive");
  require(report.slope < 0.0, "fitted slope must be negative");
  require(report.ci_hi < 0.0, "slope confidence interval must exclude 0");

  const auto cert = certify_drift(make_cauchy(), RefreshPolicy::zero(), 0.5);
  require(cert.certified, "needed certificate for fit_B");
  const double B = fit_B(report.times, report.discrepancy, cert.params,
                         cfg.initial, make_cauchy());
  require(B > 0.0 && std::isfinite(B), "fitted B must be finite and positive");
  const double v = lyapunov(cfg.initial.x, cfg.initial.theta, cert.params, make_cauchy());
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    const double t = report.times[i];
    const double envelope =
        B * (v / std::pow(t, 1.0 + cert.params.k) + std::pow(t, -cert.params.k));
    require(report.discrepancy[i] <= envelope * (1.0 + 1e-12),
            "fitted envelope fails to dominate D(t)");
  }
  info << " B=" << B << " envelope dominates all " << report.times.size()
       << " checkpoints";
}

// --- 9. Generator cross-check + Dynkin martingale ------------------------
void criterion_generator(std::ostringstream& info) {
  const Target cauchy = make_cauchy();
  RngStream rng(990099, 0);
  const std::vector<RefreshPolicy> policies = {
      RefreshPolicy::zero(), RefreshPolicy::constant(0.5),
      RefreshPolicy::grad_proportional(0.7)};
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = std::copysign(
        std::exp(std::log(1e-3) + rng.uniform() * std::log(1e6)),
        rng.uniform() - 0.5);
    const int theta = rng.uniform() < 0.5 ? +1 : -1;
    const DriftParams p = DriftParams::from_k(
        0.1 + 2.9 * rng.uniform(), 4.0, 0.1 + 0.85 * rng.uniform(),
        0.05 + 1.95 * rng.uniform());
    const RefreshPolicy& pol = policies[i % policies.size()];
    const double v = lyapunov(x, theta, p, cauchy);
    const double generic =
        generator_apply(v, lyapunov(x, -theta, p, cauchy),
                        p.beta * cauchy.grad_potential(x) * v, {x, theta}, cauchy, pol);
    const double closed =
        drift_ratio(x, theta, p, cauchy, pol).value() * std::pow(v, p.a);
    worst = std::max(worst,
                     std::abs(generic - closed) / std::max(std::abs(generic), 1e-300));
  }
  info << "worst LV relative disagreement=" << worst << ";";
  require(worst <= 1e-10, "two generator routes disagree beyond 1e-10");

  const dynkin::BumpTestFunction fn{4.0};
  const auto res = dynkin::run(cauchy, RefreshPolicy::zero(), {0.5, +1}, 5.0,
                               10000, 515151, fn);
  info << " dynkin mean=" << res.mean << " se=" << res.se;
  require(std::abs(res.mean) <= 3.0 * res.se,
          "Dynkin martingale residual beyond 3 standard errors");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "Figure-1 MSE ordering across refresh policies", criterion_fig1},
      {2, "stationarity of a long Cauchy run", criterion_stationarity},
      {3, "first-event law exactness (KS)", criterion_event_law},
      {4, "drift certificates", criterion_drift},
      {5, "refresh threshold M(k) consistency", criterion_remark_threshold},
      {6, "Hairer transforms and TV envelope", criterion_hairer},
      {7, "finite-speed lower bound coherence", criterion_lower_bound},
      {8, "empirical rate probe and envelope fit", criterion_rate},
      {9, "generator cross-check and Dynkin test", criterion_generator},
  };

  // Optional criterion ids on the command line restrict the run.
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    std::ostringstream info;
    try {
      c.run(info);
      std::printf("[PASS] %d. %s  (%s)\n", c.id, c.name.c_str(), info.str().c_str());
    } catch (const std::exception& ex) {
      ++failures;
      std::printf("[FAIL] %d. %s  (%s) -- %s\n", c.id, c.name.c_str(),
                  info.str().c_str(), ex.what());
    }
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
