#pragma once

#include <functional>
#include <span>
#include <vector>

#include "zigzag/pdmp.hpp"

namespace zigzag {

/// The half-line event [threshold, +infinity).
struct IndicatorQuery {
  double threshold = 0.0;
};

struct OccupationResult {
  double time_in_set = 0.0;  // Lebesgue time the path spends in the set
  double window = 0.0;       // averaging window (the `upto` argument)
  double estimate = 0.0;     // time_in_set / window, in [0, 1]
};

/// Exact occupation time of {x >= a} over [0, upto]: every linear segment
/// contributes a closed-form interval intersection, with threshold
/// crossings solved exactly from the segment endpoints. No quadrature, no
/// discretization. Requires 0 < upto <= skeleton.horizon.
OccupationResult occupation_time(const Skeleton& skeleton, IndicatorQuery query,
                                 double upto);

/// Occupation estimates at each checkpoint in one pass over the skeleton
/// (amortized O(events + checkpoints)). Checkpoints must be sorted and lie
/// within (0, horizon].
std::vector<double> occupation_curve(const Skeleton& skeleton,
                                     IndicatorQuery query,
                                     std::span<const double> checkpoints);

/// (1/upto) * integral of f(X_s) ds over [0, upto], by 5-point
/// Gauss-Legendre quadrature on each linear segment (exact for segmentwise
/// polynomials of degree <= 9 in position). f must be bounded on the range
/// the path visits.
double time_average(const Skeleton& skeleton,
                    const std::function<double(double)>& f, double upto);

}  // namespace zigzag
