#include "zigzag/targets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "zigzag/expression.hpp"

namespace zigzag {
namespace {

constexpr double kModeSlack = 1e-6;

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("could not parse " + what + " from '" + s + "'");
  }
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(parse_double(item.substr(b, e - b + 1), what));
  }
  return out;
}

// Cheap consistency probe: the claimed derivative must agree with central
// finite differences of the potential away from stationary points.
void check_gradient_consistency(const Target& t) {
  const double h = 1e-5;
  for (double x : {-37.3, -8.1, -2.7, -0.83, 0.61, 1.9, 7.3, 24.9, 66.1}) {
    bool near_stationary = false;
    for (double p : t.stationary_points)
      if (std::abs(x - p) < 0.05) near_stationary = true;
    if (near_stationary) continue;
    const double fd = (t.potential(x + h) - t.potential(x - h)) / (2 * h);
    const double an = t.grad_potential(x);
    if (std::abs(fd - an) > 1e-4 * std::max(1.0, std::abs(an))) {
      throw std::invalid_argument(
          "custom target: grad is not the derivative of potential near x=" +
          std::to_string(x));
    }
  }
}

}  // namespace

double Target::grad_bound_on(double lo, double hi) const {
  if (interval_grad_bound) return interval_grad_bound(lo, hi);
  if (grad_bound) return *grad_bound;
  throw std::invalid_argument("target '" + name +
                              "' provides no gradient bound for thinning");
}

Target make_student(double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("student target requires dof > 0");
  const double half_nup1 = 0.5 * (dof + 1.0);
  const double peak = std::sqrt(dof);

  Target t;
  t.potential = [dof, half_nup1](double x) {
    const double ax = std::abs(x);
    if (ax < 1e100) return half_nup1 * std::log1p(x * x / dof);
    // log(1 + x^2/nu) rewritten to avoid overflow of x^2
    return half_nup1 * (2.0 * std::log(ax) - std::log(dof) + std::log1p(dof / (ax * ax)));
  };
  t.grad_potential = [dof](double x) {
    if (x == 0.0) return 0.0;
    return (dof + 1.0) / (dof / x + x);
  };
  t.tail_index = dof;
  t.grad_bound = (dof + 1.0) / (2.0 * std::sqrt(dof));
  t.stationary_points = {0.0};
  t.mode_interval = {-kModeSlack, kModeSlack};
  // |U'| increases on [0, sqrt(dof)] and decreases beyond it.
  t.interval_grad_bound = [dof, peak](double lo, double hi) {
    double alo, ahi;
    if (lo <= 0.0 && hi >= 0.0) {
      alo = 0.0;
      ahi = std::max(-lo, hi);
    } else {
      alo = std::min(std::abs(lo), std::abs(hi));
      ahi = std::max(std::abs(lo), std::abs(hi));
    }
    auto g = [dof](double r) { return r == 0.0 ? 0.0 : (dof + 1.0) / (dof / r + r); };
    if (alo <= peak && peak <= ahi) return g(peak);
    return std::max(g(alo), g(ahi));
  };
  {
    std::ostringstream os;
    os << "student:" << dof;
    t.name = os.str();
  }
  if (dof == 1.0) {
    t.name = "cauchy";
    t.tail_closed_form = [](double a) { return 0.5 - std::atan(a) / M_PI; };
  }
  return t;
}

Target make_cauchy() { return make_student(1.0); }

Target make_gaussian() {
  Target t;
  t.potential = [](double x) { return 0.5 * x * x; };
  t.grad_potential = [](double x) { return x; };
  t.stationary_points = {0.0};
  t.mode_interval = {-kModeSlack, kModeSlack};
  t.interval_grad_bound = [](double lo, double hi) {
    return std::max(std::abs(lo), std::abs(hi));
  };
  t.name = "gaussian";
  return t;
}

Target make_custom(CustomTargetSpec spec) {
  if (!spec.potential || !spec.grad_potential)
    throw std::invalid_argument("custom target requires potential and grad");
  if (!spec.grad_bound && !spec.interval_grad_bound)
    throw std::invalid_argument(
        "custom target requires grad_bound or a per-interval bound callback");
  Target t;
  t.potential = std::move(spec.potential);
  t.grad_potential = std::move(spec.grad_potential);
  t.tail_index = spec.tail_index;
  t.grad_bound = spec.grad_bound;
  t.interval_grad_bound = std::move(spec.interval_grad_bound);
  std::sort(spec.stationary_points.begin(), spec.stationary_points.end());
  t.stationary_points = std::move(spec.stationary_points);
  if (!t.stationary_points.empty()) {
    t.mode_interval = {t.stationary_points.front() - kModeSlack,
                       t.stationary_points.back() + kModeSlack};
  }
  t.name = std::move(spec.name);
  check_gradient_consistency(t);
  return t;
}

Target load_custom_target(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open custom target file: " + path);

  CustomTargetSpec spec;
  spec.name = "custom:" + path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                    ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "potential") {
      spec.potential = compile_expression(value);
    } else if (key == "grad") {
      spec.grad_potential = compile_expression(value);
    } else if (key == "stationary_points") {
      spec.stationary_points = parse_double_list(value, "stationary_points");
    } else if (key == "grad_bound") {
      spec.grad_bound = parse_double(value, "grad_bound");
    } else if (key == "tail_index") {
      spec.tail_index = parse_double(value, "tail_index");
    } else if (key == "name") {
      spec.name = value;
    } else {
      throw std::invalid_argument(path + ": unknown key '" + key + "'");
    }
  }
  if (!spec.potential || !spec.grad_potential)
    throw std::invalid_argument(path + ": missing potential or grad");
  if (!spec.grad_bound)
    throw std::invalid_argument(path +
                                ": custom target file requires grad_bound");
  return make_custom(std::move(spec));
}

Target make_target(const std::string& tag) {
  if (tag == "cauchy") return make_cauchy();
  if (tag == "gaussian") return make_gaussian();
  if (tag.rfind("student:", 0) == 0)
    return make_student(parse_double(tag.substr(8), "student dof"));
  if (tag.rfind("custom:", 0) == 0) return load_custom_target(tag.substr(7));
  throw std::invalid_argument("unknown target tag: '" + tag + "'");
}

RefreshPolicy RefreshPolicy::zero() {
  return RefreshPolicy(Kind::Zero, 0.0, nullptr, 0.0, "zero");
}

RefreshPolicy RefreshPolicy::constant(double gamma0) {
  if (!(gamma0 >= 0.0))
    throw std::invalid_argument("constant refresh rate must be >= 0");
  std::ostringstream os;
  os << "const:" << gamma0;
  return RefreshPolicy(Kind::Constant, gamma0, nullptr, gamma0, os.str());
}

RefreshPolicy RefreshPolicy::grad_proportional(double c) {
  if (!(c >= 0.0))
    throw std::invalid_argument("grad-proportional refresh coefficient must be >= 0");
  std::ostringstream os;
  os << "grad:" << c;
  return RefreshPolicy(Kind::GradProportional, c, nullptr, std::nullopt, os.str());
}

RefreshPolicy RefreshPolicy::custom(std::function<double(double)> fn,
                                    std::optional<double> bound,
                                    std::string name) {
  if (!fn) throw std::invalid_argument("custom refresh requires a rate function");
  return RefreshPolicy(Kind::Custom, 0.0, std::move(fn), bound, std::move(name));
}

double RefreshPolicy::rate(double x, const Target& target) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return coeff_;
    case Kind::GradProportional:
      return coeff_ * std::abs(target.grad_potential(x));
    case Kind::Custom: {
      const double g = fn_(x);
      if (!(g >= 0.0))
        throw std::runtime_error("custom refresh rate is negative at x=" +
                                 std::to_string(x));
      return g;
    }
  }
  return 0.0;
}

double RefreshPolicy::rate_bound_on(double lo, double hi, const Target& target) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return coeff_;
    case Kind::GradProportional:
      return coeff_ == 0.0 ? 0.0 : coeff_ * target.grad_bound_on(lo, hi);
    case Kind::Custom:
      if (!bound_)
        throw std::invalid_argument(
            "custom refresh policy '" + name_ +
            "' has no declared bound; cannot drive event thinning");
      return *bound_;
  }
  return 0.0;
}

RefreshPolicy make_refresh(const std::string& tag) {
  if (tag == "zero") return RefreshPolicy::zero();
  if (tag.rfind("const:", 0) == 0)
    return RefreshPolicy::constant(parse_double(tag.substr(6), "refresh rate"));
  if (tag.rfind("grad:", 0) == 0)
    return RefreshPolicy::grad_proportional(parse_double(tag.substr(5), "refresh coefficient"));
  throw std::invalid_argument("unknown refresh tag: '" + tag + "'");
}

double tail_probability_quadrature(const Target& target, double a) {
  boost::math::quadrature::tanh_sinh<double> integrator(15);
  const double inf = std::numeric_limits<double>::infinity();
  auto density = [&](double x) { return std::exp(-target.potential(x)); };
  const double tol = 1e-13;

  double err_tail = 0.0, err_z = 0.0, l1 = 0.0;
  double tail, z;
  try {
    tail = integrator.integrate(density, a, inf, tol, &err_tail, &l1);
    // Split the normalization at the mode hull and at `a` so each piece is
    // smooth and one-signed for the integrator.
    const double lo = std::min(target.mode_interval.first, a);
    const double hi = std::max(target.mode_interval.second, a);
    z = integrator.integrate(density, -inf, lo, tol, &err_z, &l1);
    double e = 0.0;
    z += integrator.integrate(density, lo, hi, tol, &e, &l1);
    err_z += e;
    z += integrator.integrate(density, hi, inf, tol, &e, &l1);
    err_z += e;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("tail probability quadrature failed: ") +
                             ex.what());
  }
  if (!std::isfinite(z) || !(z > 0.0) || err_z > 1e-9 * z || err_tail > 1e-9 * std::max(tail, 1e-300))
    throw std::runtime_error("tail probability quadrature did not converge for target '" +
                             target.name + "'");
  return std::min(1.0, std::max(0.0, tail / z));
}

double tail_probability_truth(const Target& target, double a) {
  if (target.tail_closed_form) return target.tail_closed_form(a);
  return tail_probability_quadrature(target, a);
}

TailAssumptionReport verify_tail_assumption(const Target& target, double nu,
                                            std::span<const double> radius_grid) {
  if (radius_grid.empty())
    throw std::invalid_argument("verify_tail_assumption: empty radius grid");
  for (std::size_t i = 0; i < radius_grid.size(); ++i) {
    if (!(radius_grid[i] > 0.0) ||
        (i > 0 && !(radius_grid[i] > radius_grid[i - 1])))
      throw std::invalid_argument(
          "verify_tail_assumption: radius grid must be positive and increasing");
  }

  auto holds_at = [&](double x) {
    return std::abs(target.grad_potential(x)) * std::abs(x) >= 1.0 + nu;
  };

  TailAssumptionReport report;
  // Walk down from the largest radius; the first failure terminates the
  // all-pass suffix.
  std::size_t first_good = radius_grid.size();
  for (std::size_t i = radius_grid.size(); i-- > 0;) {
    const double r = radius_grid[i];
    if (holds_at(r) && holds_at(-r)) {
      first_good = i;
    } else {
      break;
    }
  }
  if (first_good < radius_grid.size()) {
    report.min_radius = radius_grid[first_good];
  } else {
    for (double r : radius_grid) {
      if (!holds_at(r)) report.violations.push_back(r);
      if (!holds_at(-r)) report.violations.push_back(-r);
    }
  }
  return report;
}

}  // namespace zigzag
