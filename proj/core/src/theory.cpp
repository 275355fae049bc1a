#include "zigzag/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace zigzag {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SignedLogValue signed_log(double log_scale, double factor) {
  if (factor == 0.0) return {0, -kInf};
  return {factor > 0.0 ? +1 : -1, log_scale + std::log(std::abs(factor))};
}

bool signed_less(const SignedLogValue& a, const SignedLogValue& b) {
  if (a.sign != b.sign) return a.sign < b.sign;
  if (a.sign == 0) return false;
  return a.sign > 0 ? a.log_abs < b.log_abs : a.log_abs > b.log_abs;
}

}  // namespace

double SignedLogValue::value() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_abs);
}

DriftParams DriftParams::from_k(double k, double nu, double beta, double delta) {
  if (!(k > 0.0)) throw std::domain_error("DriftParams: k must be > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("DriftParams: beta must be in (0,1)");
  if (!(delta > 0.0)) throw std::domain_error("DriftParams: delta must be > 0");
  DriftParams p;
  p.k = k;
  p.a = k / (1.0 + k);
  p.nu = nu;
  p.beta = beta;
  p.delta = delta;
  return p;
}

double log_lyapunov(double x, int theta, const DriftParams& params,
                    const Target& target) {
  return params.beta * target.potential(x) + params.delta * sign0(x) * theta;
}

double lyapunov(double x, int theta, const DriftParams& params,
                const Target& target) {
  return std::exp(log_lyapunov(x, theta, params, target));
}

double generator_apply(double f_value, double f_value_flipped, double f_deriv,
                       ZigZagState state, const Target& target,
                       const RefreshPolicy& refresh) {
  return state.theta * f_deriv +
         switching_rate(state, target, refresh) * (f_value_flipped - f_value);
}

SignedLogValue drift_ratio(double x, int theta, const DriftParams& params,
                           const Target& target, const RefreshPolicy& refresh) {
  const double du = target.grad_potential(x);
  const double lambda = std::max(theta * du, 0.0) + refresh.rate(x, target);
  // LV = V (theta beta U' + lambda (e^{-2 theta sgn(x) delta} - 1)), so
  // LV/V^a = V^{1-a} * that factor.
  const double factor =
      theta * params.beta * du +
      lambda * std::expm1(-2.0 * theta * sign0(x) * params.delta);
  const double log_scale = (1.0 - params.a) * log_lyapunov(x, theta, params, target);
  return signed_log(log_scale, factor);
}

SignedLogValue drift_ratio_bound(double x, int theta, const DriftParams& params,
                                 const Target& target,
                                 const RefreshPolicy& refresh) {
  const double adu = std::abs(target.grad_potential(x));
  const double gamma = refresh.rate(x, target);
  const double rho = adu > 0.0 ? gamma / adu : kInf;
  const double uphill = params.beta + (rho + 1.0) * std::expm1(-2.0 * params.delta);
  const double downhill = -params.beta + rho * std::expm1(2.0 * params.delta);
  const double bracket = std::max(uphill, downhill);
  if (adu == 0.0) return {+1, kInf};
  const double log_scale =
      (1.0 - params.a) * log_lyapunov(x, theta, params, target) + std::log(adu);
  return signed_log(log_scale, bracket);
}

std::vector<double> GridSpec::radii() const {
  if (!(r_min > 0.0) || !(r_max > r_min) || points_per_decade < 1)
    throw std::domain_error("GridSpec: need 0 < r_min < r_max, points_per_decade >= 1");
  std::vector<double> out;
  const double decades = std::log10(r_max / r_min);
  const auto n = static_cast<std::size_t>(std::ceil(decades * points_per_decade));
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    out.push_back(r_min * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(n)));
  }
  return out;
}

namespace {

struct Candidate {
  double beta;
  double delta;
};

// Evaluates one (beta, delta) candidate over the grid. Returns a certified
// report or nullopt.
std::optional<DriftReport> try_candidate(const Target& target,
                                         const RefreshPolicy& refresh, double k,
                                         double nu, Candidate cand,
                                         const std::vector<double>& radii) {
  DriftParams params = DriftParams::from_k(k, nu, cand.beta, cand.delta);
  const double a = params.a;
  const double growth_floor = std::log(0.5);

  const std::size_t n = radii.size();
  std::vector<char> pass(n, 0);
  std::vector<SignedLogValue> worst_ratio(n);
  std::vector<SignedLogValue> worst_bracket(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double r = radii[i];
    bool ok = true;
    SignedLogValue ratio_max{-1, -kInf};
    SignedLogValue bracket_max{-1, -kInf};
    for (double x : {r, -r}) {
      const double du = target.grad_potential(x);
      // Tail growth and sign agreement define the usable tail region.
      if (!(std::abs(du) * r >= 1.0 + nu) || sign0(du) != sign0(x)) ok = false;
      const double gamma = refresh.rate(x, target);
      const double rho = std::abs(du) > 0.0 ? gamma / std::abs(du) : kInf;
      const double uphill = params.beta + (rho + 1.0) * std::expm1(-2.0 * params.delta);
      const double downhill = -params.beta + rho * std::expm1(2.0 * params.delta);
      for (int theta : {+1, -1}) {
        const double logv = log_lyapunov(x, theta, params, target);
        // Growth condition V^{1-a} |U'| >= 1/2: the slack that turns the
        // bracket margin c' into the drift constant c = c'/2.
        if (!((1.0 - a) * logv + std::log(std::abs(du)) >= growth_floor)) ok = false;
        const SignedLogValue ratio = drift_ratio(x, theta, params, target, refresh);
        if (!ratio.negative()) ok = false;
        if (signed_less(ratio_max, ratio)) ratio_max = ratio;
        const double bracket = std::max(uphill, downhill);
        const SignedLogValue br = signed_log(0.0, bracket);
        if (!br.negative()) ok = false;
        if (signed_less(bracket_max, br)) bracket_max = br;
      }
    }
    pass[i] = ok ? 1 : 0;
    worst_ratio[i] = ratio_max;
    worst_bracket[i] = bracket_max;
  }

  // The certificate needs an all-pass suffix of the radius grid.
  std::size_t first_good = n;
  for (std::size_t i = n; i-- > 0;) {
    if (pass[i])
      first_good = i;
    else
      break;
  }
  if (first_good == n) return std::nullopt;

  SignedLogValue sup_ratio{-1, -kInf};
  SignedLogValue sup_bracket{-1, -kInf};
  for (std::size_t i = first_good; i < n; ++i) {
    if (signed_less(sup_ratio, worst_ratio[i])) sup_ratio = worst_ratio[i];
    if (signed_less(sup_bracket, worst_bracket[i])) sup_bracket = worst_bracket[i];
  }
  if (!sup_ratio.negative() || !sup_bracket.negative()) return std::nullopt;

  DriftReport report;
  report.params = params;
  report.compact_radius = radii[first_good];
  report.sup_ratio_outside = sup_ratio.value();
  report.c_margin = -sup_bracket.value();
  report.certified = true;

  // K bounds LV + (c'/2) V^a on the inside region (plus the origin, which
  // the grid itself never samples).
  double K = -kInf;
  auto eval_inside = [&](double x) {
    for (int theta : {+1, -1}) {
      const double logv = log_lyapunov(x, theta, params, target);
      const double du = target.grad_potential(x);
      const double lambda = std::max(theta * du, 0.0) + refresh.rate(x, target);
      const double factor =
          theta * params.beta * du + lambda * std::expm1(-2.0 * theta * sign0(x) * params.delta);
      const double lv = factor * std::exp(logv);
      const double fv = 0.5 * report.c_margin * std::exp(a * logv);
      K = std::max(K, lv + fv);
    }
  };
  eval_inside(0.0);
  for (std::size_t i = 0; i < first_good; ++i) {
    eval_inside(radii[i]);
    eval_inside(-radii[i]);
  }
  report.K_inside = K;
  return report;
}

}  // namespace

DriftReport certify_drift(const Target& target, const RefreshPolicy& refresh,
                          double k, const CertifyOptions& options) {
  if (!(k > 0.0)) throw std::domain_error("certify_drift: k must be > 0");
  double nu;
  if (options.nu) {
    nu = *options.nu;
  } else if (target.tail_index) {
    nu = *target.tail_index - options.delta_prime;
  } else {
    throw std::domain_error(
        "certify_drift: target has no tail index; pass CertifyOptions::nu");
  }
  if (!(nu > 0.0)) throw std::domain_error("certify_drift: nu must be > 0");
  if (!(k < nu))
    throw std::domain_error("certify_drift: requires k < nu for a certificate attempt");

  const std::vector<double> radii = options.grid.radii();

  DriftReport failure;
  failure.params.k = k;
  failure.params.a = k / (1.0 + k);
  failure.params.nu = nu;

  const auto assumption = verify_tail_assumption(target, nu, radii);
  if (!assumption.min_radius) {
    failure.diagnostic =
        "target does not satisfy the tail growth inequality at nu=" +
        std::to_string(nu) + " anywhere on the grid";
    return failure;
  }

  const double a = k / (1.0 + k);
  std::vector<Candidate> candidates;
  if (options.pinned_beta_delta) {
    candidates.push_back({options.pinned_beta_delta->first,
                          options.pinned_beta_delta->second});
  } else {
    // Remark-style pair: beta carries the growth condition with margin eta
    // by construction, and delta has the matching (1+eta) slack.
    const double beta_r = (1.0 + options.eta) * (1.0 + k) / (1.0 + nu);
    if (beta_r > 0.0 && beta_r < 1.0) {
      candidates.push_back({beta_r, -0.5 * (1.0 + options.eta) * std::log1p(-beta_r)});
    }
    for (int j = 1; j <= 20; ++j) {
      const double beta = 1.0 - std::ldexp(1.0, -j);
      if (!(beta * (1.0 - a) * (1.0 + nu) > 1.0)) continue;
      candidates.push_back(
          {beta, (1.0 + options.delta_margin) * (-0.5) * std::log1p(-beta)});
    }
  }
  if (candidates.empty()) {
    failure.diagnostic = "no admissible (beta, delta) candidate: beta(1-a)(1+nu) > 1 "
                         "cannot be met on the lattice";
    return failure;
  }

  for (const auto& cand : candidates) {
    if (auto report = try_candidate(target, refresh, k, nu, cand, radii))
      return *report;
  }

  std::ostringstream os;
  os << "no (beta, delta) in the search lattice certifies the drift for k=" << k
     << ", nu=" << nu << ", refresh=" << refresh.name()
     << "; the refresh rate may exceed the admissible ratio M(k)";
  failure.diagnostic = os.str();
  return failure;
}

double refresh_threshold_M(double k, double nu, double eta) {
  if (!(k > 0.0) || !(nu > 0.0))
    throw std::domain_error("refresh_threshold_M: k and nu must be > 0");
  if (!(k < nu)) throw std::domain_error("refresh_threshold_M: requires k < nu");
  if (!(eta > 0.0)) throw std::domain_error("refresh_threshold_M: eta must be > 0");
  const double beta = (1.0 + k) * (1.0 + eta) / (1.0 + nu);
  const double q = 1.0 - beta;
  // As k -> nu at fixed eta the base q leaves (0,1): no positive refresh
  // ratio remains admissible and the threshold collapses to 0.
  if (!(q > 0.0)) return 0.0;
  const double qp = std::pow(q, 1.0 + eta);
  const double m = (beta - eta) * qp / (1.0 - qp);
  return std::max(m, 0.0);
}

HairerTransforms::HairerTransforms(double c, double a) : c(c), a(a) {
  if (!(c > 0.0)) throw std::domain_error("HairerTransforms: c must be > 0");
  if (!(a > 0.0 && a < 1.0)) throw std::domain_error("HairerTransforms: a must be in (0,1)");
}

double HairerTransforms::H(double u) const {
  if (!(u >= 1.0)) throw std::domain_error("HairerTransforms::H: u must be >= 1");
  // (u^{1-a} - 1)/(c(1-a)) evaluated cancellation-free near u = 1.
  return std::expm1((1.0 - a) * std::log(u)) / (c * (1.0 - a));
}

double HairerTransforms::H_inv(double t) const {
  if (!(t >= 0.0)) throw std::domain_error("HairerTransforms::H_inv: t must be >= 0");
  return std::exp(std::log1p(c * (1.0 - a) * t) / (1.0 - a));
}

double HairerTransforms::f_of_H_inv(double t) const {
  if (!(t >= 0.0)) throw std::domain_error("HairerTransforms::f_of_H_inv: t must be >= 0");
  return c * std::exp(std::log1p(c * (1.0 - a) * t) * a / (1.0 - a));
}

double tv_upper_bound(double t, ZigZagState state, const DriftParams& params,
                      double B, const Target& target) {
  if (!(t > 0.0)) throw std::domain_error("tv_upper_bound: t must be > 0");
  if (!(B >= 0.0)) throw std::domain_error("tv_upper_bound: B must be >= 0");
  if (B == 0.0) return 0.0;
  const double logv = log_lyapunov(state.x, state.theta, params, target);
  const double log_t = std::log(t);
  const double term1 = std::log(B) + logv - (1.0 + params.k) * log_t;
  const double term2 = std::log(B) - params.k * log_t;
  if (term1 >= 0.0 || term2 >= 0.0) return 1.0;  // cap dominates
  return std::min(1.0, std::exp(term1) + std::exp(term2));
}

StudentTailLowerBound StudentTailLowerBound::compute(double nu, double epsilon) {
  if (!(nu > 0.0)) throw std::domain_error("StudentTailLowerBound: nu must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("StudentTailLowerBound: epsilon must be in (0,1)");
  // pi(x) |x|^{nu+1} = (1/Z) (nu x^2/(nu+x^2))^{(nu+1)/2} increases to
  // L = nu^{(nu+1)/2}/Z; scan for the first radius within (1-eps) of L.
  const double Z = std::sqrt(nu) * boost::math::beta(0.5 * nu, 0.5);
  const double L = std::pow(nu, 0.5 * (nu + 1.0)) / Z;
  auto ratio = [&](double x) {
    return std::pow(nu * x * x / (nu + x * x), 0.5 * (nu + 1.0)) / Z;
  };
  const double want = (1.0 - epsilon) * L;
  double K = 1.0;
  while (ratio(K) < want) {
    K *= 1.01;
    if (K > 1e12)
      throw std::runtime_error("StudentTailLowerBound: tail ratio scan did not converge");
  }
  StudentTailLowerBound out;
  out.nu = nu;
  out.K = K;
  out.C0 = ratio(K);
  return out;
}

double StudentTailLowerBound::value(double t) const {
  if (!(t > K))
    throw std::domain_error("StudentTailLowerBound: t must exceed the threshold K");
  return (2.0 * C0 / nu) * std::pow(t, -nu);
}

double tv_lower_bound_student(double t, double nu) {
  return StudentTailLowerBound::compute(nu).value(t);
}

}  // namespace zigzag
