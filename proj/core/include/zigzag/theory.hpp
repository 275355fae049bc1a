#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zigzag/pdmp.hpp"
#include "zigzag/targets.hpp"

namespace zigzag {

/// sign with sgn(0) = 0; the convention that makes the Lyapunov function
/// well defined at the origin.
inline int sign0(double x) { return (x > 0.0) - (x < 0.0); }

/// Parameters of the Lyapunov function V(x,theta) = exp(beta U(x) +
/// delta sgn(x) theta) together with the polynomial order k they certify.
/// The exponent a is tied to k by k = a/(1-a); build instances through
/// from_k so the identity holds exactly. A certificate attempt additionally
/// needs k < nu.
struct DriftParams {
  double beta = 0.0;   // in (0, 1)
  double delta = 0.0;  // > 0
  double a = 0.0;      // = k/(1+k)
  double k = 0.0;      // target polynomial order
  double nu = 0.0;     // tail index the certificate is run against

  static DriftParams from_k(double k, double nu, double beta, double delta);
};

/// log V(x, theta); exposed separately so callers can stay in log space
/// when V itself would overflow.
double log_lyapunov(double x, int theta, const DriftParams& params,
                    const Target& target);
double lyapunov(double x, int theta, const DriftParams& params,
                const Target& target);

/// Generator applied to a caller-supplied test function:
///   L f(x,theta) = theta f'(x,theta) + lambda(x,theta) (f(x,-theta) - f(x,theta)).
double generator_apply(double f_value, double f_value_flipped, double f_deriv,
                       ZigZagState state, const Target& target,
                       const RefreshPolicy& refresh);

/// A real carried as sign * exp(log_abs); keeps drift-ratio evaluations
/// finite on grids where V alone overflows.
struct SignedLogValue {
  int sign = 0;         // -1, 0, +1
  double log_abs = 0.0; // meaningful only when sign != 0
  double value() const;
  bool negative() const { return sign < 0; }
};

/// Exact L V / V^a at (x, theta), valid everywhere except x = 0.
SignedLogValue drift_ratio(double x, int theta, const DriftParams& params,
                           const Target& target, const RefreshPolicy& refresh);

/// The certificate's upper bound for the same quantity:
///   V^{1-a} |U'| max{ beta + (rho+1)(e^{-2 delta} - 1),
///                    -beta + rho (e^{2 delta} - 1) },  rho = gamma/|U'|.
/// Valid outside the compact set where sgn(U') = sgn(x); the max makes it
/// an upper bound for both velocity directions.
SignedLogValue drift_ratio_bound(double x, int theta, const DriftParams& params,
                                 const Target& target, const RefreshPolicy& refresh);

struct GridSpec {
  double r_min = 1e-2;
  double r_max = 1e6;
  int points_per_decade = 512;

  std::vector<double> radii() const;
};

struct CertifyOptions {
  /// Margin used by the Remark-style candidate: beta = (1+eta)(1+k)/(1+nu).
  double eta = 0.1;
  /// Slack subtracted from the target's tail index when `nu` is not given
  /// (Student tails satisfy the growth inequality only at nu - delta_prime).
  double delta_prime = 0.01;
  /// Margin factor for the dyadic lattice: delta = (1+delta_margin) *
  /// (-log(1-beta)/2).
  double delta_margin = 0.05;
  std::optional<double> nu;  // overrides tail_index - delta_prime
  GridSpec grid;
  /// Skip the search and evaluate exactly this pair.
  std::optional<std::pair<double, double>> pinned_beta_delta;
};

/// Outcome of the numeric Foster-Lyapunov check L V <= K - c/2 V^a.
struct DriftReport {
  DriftParams params;
  /// Smallest grid radius beyond which the tail-growth inequality, the
  /// sign condition sgn(U') = sgn(x), negativity of the bound bracket, the
  /// growth V^{1-a}|U'| >= 1/2 and negativity of the exact ratio all hold.
  double compact_radius = 0.0;
  double sup_ratio_outside = 0.0;  // sup of LV/V^a outside the radius (< 0 iff certified)
  double c_margin = 0.0;           // c' = -sup of the bound bracket outside
  double K_inside = 0.0;           // max of LV + (c'/2) V^a on the inside grid
  bool certified = false;
  std::string diagnostic;          // populated when not certified
};

/// Sweeps a log-spaced grid for candidate (beta, delta) pairs and returns
/// the first certifying report. Candidates: the Remark-style pair
/// beta = (1+eta)(1+k)/(1+nu), delta = -(1+eta)/2 log(1-beta), followed by
/// the dyadic lattice beta in {1 - 2^-j}, j = 1..20, filtered by
/// beta(1-a)(1+nu) > 1. Throws std::domain_error when k >= nu or no tail
/// index is available; an exhausted search returns certified = false with
/// a diagnostic rather than throwing.
DriftReport certify_drift(const Target& target, const RefreshPolicy& refresh,
                          double k, const CertifyOptions& options = {});

/// The admissible asymptotic refresh ratio from the k-dependent threshold
///   M(k) = ((k+1)/(nu+1)(1+eta) - eta) * q^{1+eta} / (1 - q^{1+eta}),
///   q = 1 - (1+k)(1+eta)/(1+nu).
/// Requires 0 < k < nu and eta > 0. When eta is too large for the given k
/// (q <= 0, which always happens as k -> nu at fixed eta) the admissible
/// ratio collapses and 0 is returned; likewise the value is clamped below
/// at 0.
double refresh_threshold_M(double k, double nu, double eta);

/// The closed-form transforms of f(u) = c u^a used to turn the drift
/// condition into a polynomial rate:
///   H(u) = (u^{1-a} - 1)/(c(1-a)),  u >= 1
///   H_inv(t) = (1 + c(1-a) t)^{1/(1-a)},  t >= 0
///   f(H_inv(t)) = c (1 + c(1-a) t)^{a/(1-a)}.
struct HairerTransforms {
  double c = 1.0;
  double a = 0.5;

  HairerTransforms(double c, double a);
  double H(double u) const;         // domain error for u < 1
  double H_inv(double t) const;     // domain error for t < 0
  double f_of_H_inv(double t) const;
};

/// min(1, B V(x,theta)/t^{1+k} + B/t^k): the certified total-variation
/// envelope, capped at 1.
double tv_upper_bound(double t, ZigZagState state, const DriftParams& params,
                      double B, const Target& target);

/// Finite-speed lower bound for a Student target started at (0, +1):
/// the invariant mass beyond reach, (2 C0 / nu) t^{-nu} for t > K, where
/// C0 and K come from a numeric scan of the density tail ratio
/// pi(x) |x|^{nu+1}.
struct StudentTailLowerBound {
  double nu = 1.0;
  double C0 = 0.0;  // pi(x) >= C0 |x|^{-nu-1} for |x| >= K
  double K = 0.0;

  static StudentTailLowerBound compute(double nu, double epsilon = 0.01);
  /// Throws std::domain_error for t <= K.
  double value(double t) const;
};

/// Convenience wrapper: computes the constants for `nu` and evaluates at t.
double tv_lower_bound_student(double t, double nu);

}  // namespace zigzag
