#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace zigzag {

/// A one-dimensional target distribution described through its potential
/// U (negative log-density up to an additive constant) and its derivative.
/// The normalizing constant is never stored or needed: the event rates of
/// the process depend on U' only, and reference probabilities are obtained
/// by separately validated quadrature.
struct Target {
  std::function<double(double)> potential;       // U(x)
  std::function<double(double)> grad_potential;  // U'(x)

  /// Tail-growth index: largest nu known such that |U'(x)| >= (1+nu)/|x|
  /// outside a compact set. Unset for light-tailed targets (every nu works
  /// on bounded grids) and for targets where it is unknown.
  std::optional<double> tail_index;

  /// Finite global bound on |U'|, when one exists.
  std::optional<double> grad_bound;

  /// All stationary points of U, sorted. Between consecutive stationary
  /// points U is monotone, which is what the event simulation relies on to
  /// split a ray into exactly invertible pieces.
  std::vector<double> stationary_points;

  /// An interval containing every stationary point.
  std::pair<double, double> mode_interval{0.0, 0.0};

  /// Closed-form upper tail pi([a, infinity)) when available (Cauchy).
  std::function<double(double)> tail_closed_form;

  /// Optional sharp bound for |U'| restricted to [lo, hi]; enables event
  /// thinning for targets without a finite global bound.
  std::function<double(double, double)> interval_grad_bound;

  std::string name = "custom";

  /// Upper bound for |U'| on [lo, hi]: the interval callback if set, the
  /// global bound otherwise. Throws std::invalid_argument if neither is
  /// available (thinning would be unsound without a dominating rate).
  double grad_bound_on(double lo, double hi) const;
};

/// Student-t potential with `dof` degrees of freedom:
///   U(x)  = ((dof+1)/2) * log(1 + x^2/dof)
///   U'(x) = (dof+1) x / (dof + x^2),   |U'| <= (dof+1)/(2 sqrt(dof)).
/// Rejects dof <= 0.
Target make_student(double dof);

/// Standard Cauchy; alias for make_student(1).
Target make_cauchy();

/// Standard Gaussian potential U(x) = x^2/2. No finite global gradient
/// bound and no finite tail index (the tail-growth inequality holds for
/// every nu on bounded grids).
Target make_gaussian();

struct CustomTargetSpec {
  std::function<double(double)> potential;
  std::function<double(double)> grad_potential;
  std::vector<double> stationary_points;
  std::optional<double> tail_index;
  std::optional<double> grad_bound;
  std::function<double(double, double)> interval_grad_bound;
  std::string name = "custom";
};

/// Builds a custom target. Construction fails (std::invalid_argument) if
/// neither a global gradient bound nor a per-interval bound callback is
/// supplied, and when a quick finite-difference probe contradicts the
/// claimed derivative.
Target make_custom(CustomTargetSpec spec);

/// Loads a custom target from a key-value text file with keys
///   potential, grad (expressions in x), stationary_points (comma list),
///   grad_bound (required), tail_index (optional), name (optional).
Target load_custom_target(const std::string& path);

/// Resolves a target tag: "student:<dof>", "cauchy", "gaussian",
/// "custom:<path>".
Target make_target(const std::string& tag);

/// The extra velocity-flip rate gamma(x) added on top of the bounce rate.
class RefreshPolicy {
 public:
  enum class Kind { Zero, Constant, GradProportional, Custom };

  static RefreshPolicy zero();
  static RefreshPolicy constant(double gamma0);
  /// gamma(x) = c * |U'(x)|.
  static RefreshPolicy grad_proportional(double c);
  /// Arbitrary nonnegative rate; `bound` is the dominating constant used
  /// for event thinning (may be omitted only if the policy is never used
  /// to drive event simulation).
  static RefreshPolicy custom(std::function<double(double)> fn,
                              std::optional<double> bound,
                              std::string name = "custom");

  Kind kind() const { return kind_; }
  double rate(double x, const Target& target) const;
  /// Dominating bound for the rate on the position interval [lo, hi].
  double rate_bound_on(double lo, double hi, const Target& target) const;
  /// Constant coefficient (gamma0 for Constant, c for GradProportional).
  double coefficient() const { return coeff_; }
  const std::string& name() const { return name_; }

 private:
  RefreshPolicy(Kind kind, double coeff, std::function<double(double)> fn,
                std::optional<double> bound, std::string name)
      : kind_(kind), coeff_(coeff), fn_(std::move(fn)), bound_(bound),
        name_(std::move(name)) {}

  Kind kind_;
  double coeff_ = 0.0;
  std::function<double(double)> fn_;
  std::optional<double> bound_;
  std::string name_;
};

/// Resolves a refresh tag: "zero", "const:<gamma0>", "grad:<c>".
RefreshPolicy make_refresh(const std::string& tag);

/// pi([a, infinity)) for the normalized density exp(-U)/Z: closed form when
/// the target carries one, adaptive quadrature otherwise. Accurate to at
/// least ten significant digits; throws std::runtime_error if the
/// quadrature does not converge.
double tail_probability_truth(const Target& target, double a);

/// Always the quadrature route, bypassing any closed form. Kept public so
/// the two routes can be checked against each other.
double tail_probability_quadrature(const Target& target, double a);

struct TailAssumptionReport {
  /// Smallest grid radius R such that |U'(x)| |x| >= 1+nu for all sampled
  /// |x| >= R (both signs); unset if the largest radius already fails.
  std::optional<double> min_radius;
  /// Populated only when no radius works: every sampled x that violates
  /// the inequality.
  std::vector<double> violations;
};

/// Checks the tail-growth inequality |U'(x)| >= (1+nu)/|x| on a grid of
/// radii. The grid must be nonempty, positive and strictly increasing.
TailAssumptionReport verify_tail_assumption(const Target& target, double nu,
                                            std::span<const double> radius_grid);

}  // namespace zigzag
