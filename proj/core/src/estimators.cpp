#include "zigzag/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace zigzag {
namespace {

// Time a unit-speed segment starting at (x0, theta) of length `len`
// spends in {x >= a}.
double segment_time_above(double x0, int theta, double len, double a) {
  if (len <= 0.0) return 0.0;
  const double x1 = x0 + theta * len;
  const bool in0 = x0 >= a;
  const bool in1 = x1 >= a;
  if (in0 && in1) return len;
  if (!in0 && !in1) return 0.0;
  // One crossing: |x(s) - a| is linear with unit slope.
  const double s_cross = theta > 0 ? a - x0 : x0 - a;
  return in0 ? s_cross : len - s_cross;
}

// Calls fn(t0, x0, theta, len) for each linear piece of the path up to
// `upto` (the final piece is trimmed).
template <typename Fn>
void for_each_segment(const Skeleton& skel, double upto, Fn&& fn) {
  double t0 = 0.0;
  double x0 = skel.initial.x;
  int theta = skel.initial.theta;
  for (const auto& e : skel.events) {
    if (e.time >= upto) break;
    fn(t0, x0, theta, e.time - t0);
    t0 = e.time;
    x0 = e.position;
    theta = -theta;
  }
  if (upto > t0) fn(t0, x0, theta, upto - t0);
}

}  // namespace

OccupationResult occupation_time(const Skeleton& skeleton, IndicatorQuery query,
                                 double upto) {
  if (!(upto > 0.0) || !(upto <= skeleton.horizon))
    throw std::out_of_range("occupation_time: upto outside (0, horizon]");
  double total = 0.0;
  for_each_segment(skeleton, upto, [&](double, double x0, int theta, double len) {
    total += segment_time_above(x0, theta, len, query.threshold);
  });
  return {total, upto, total / upto};
}

std::vector<double> occupation_curve(const Skeleton& skeleton,
                                     IndicatorQuery query,
                                     std::span<const double> checkpoints) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > 0.0) || !(checkpoints[i] <= skeleton.horizon) ||
        (i > 0 && checkpoints[i] < checkpoints[i - 1]))
      throw std::invalid_argument(
          "occupation_curve: checkpoints must be sorted and within (0, horizon]");
  }
  std::vector<double> out(checkpoints.size());
  if (checkpoints.empty()) return out;

  const double a = query.threshold;
  std::size_t next = 0;
  double cumulative = 0.0;
  for_each_segment(skeleton, checkpoints.back(), [&](double t0, double x0, int theta, double len) {
    const double t1 = t0 + len;
    while (next < checkpoints.size() && checkpoints[next] <= t1) {
      const double partial = segment_time_above(x0, theta, checkpoints[next] - t0, a);
      out[next] = (cumulative + partial) / checkpoints[next];
      ++next;
    }
    cumulative += segment_time_above(x0, theta, len, a);
  });
  return out;
}

double time_average(const Skeleton& skeleton,
                    const std::function<double(double)>& f, double upto) {
  if (!(upto > 0.0) || !(upto <= skeleton.horizon))
    throw std::out_of_range("time_average: upto outside (0, horizon]");

  // 5-point Gauss-Legendre on [0, 1].
  static constexpr std::array<double, 5> nodes = {
      0.046910077030668004, 0.23076534494715845, 0.5,
      0.76923465505284155, 0.953089922969332};
  static constexpr std::array<double, 5> weights = {
      0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
      0.23931433524968324, 0.11846344252809454};

  double integral = 0.0;
  for_each_segment(skeleton, upto, [&](double, double x0, int theta, double len) {
    if (len <= 0.0) return;
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      acc += weights[i] * f(x0 + theta * (nodes[i] * len));
    integral += acc * len;
  });
  return integral / upto;
}

}  // namespace zigzag
