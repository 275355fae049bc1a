#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "zigzag/rng.hpp"
#include "zigzag/targets.hpp"

namespace zigzag {

/// State of the process: position and velocity, velocity exactly +-1.
struct ZigZagState {
  double x = 0.0;
  int theta = +1;
};

enum class EventKind : std::uint8_t { Bounce, Refresh };

struct SkeletonEvent {
  double time;      // absolute, strictly increasing, <= horizon
  EventKind kind;   // diagnostic only: both kinds flip the velocity in 1-D
  double position;  // absolute position at the event
};

/// The full trajectory record: between events the path is linear with unit
/// speed, so any path functional can be reconstructed exactly from this.
/// Positions are stored absolutely (not re-derived from times) so that
/// downstream estimators do not accumulate floating-point drift.
struct Skeleton {
  ZigZagState initial;
  std::vector<SkeletonEvent> events;
  double horizon = 0.0;

  /// Velocity right after the i-th recorded event (right-continuous).
  int theta_after(std::size_t n_events) const {
    return (n_events % 2 == 0) ? initial.theta : -initial.theta;
  }

  /// Exact position at time t in [0, horizon] by piecewise-linear
  /// reconstruction. Throws std::out_of_range outside the window.
  double position_at(double t) const;

  /// Position and (right-continuous) velocity at time t.
  ZigZagState state_at(double t) const;

  /// Checks the structural invariants: strictly increasing times within
  /// [0, horizon], velocity alternation, unit speed between events to
  /// within `tol`. Throws std::runtime_error on violation.
  void validate(double tol = 1e-9) const;
};

/// lambda(x, theta) = [theta U'(x)]^+ + gamma(x).
double switching_rate(ZigZagState state, const Target& target,
                      const RefreshPolicy& refresh);

struct PendingEvent {
  double time;  // relative to the current state
  EventKind kind;
};

/// First arrival of the inhomogeneous Poisson clock with rate
/// m(s) = lambda(x + s theta, theta) on (0, horizon], or nullopt if the
/// clock stays silent over the whole window.
///
/// The bounce component [theta U'(x+s theta)]^+ is simulated by exact
/// inversion: along an uphill stretch the integrated rate equals the
/// potential increment, so the event time solves
///   U(x + s theta) = U(start of stretch) + Exp(1)
/// by monotone root-finding (doubling bracket, bisection to 1e-12 in time
/// units, one Newton polish). Downhill stretches carry zero rate and are
/// skipped to the next stationary point of the target. The refresh
/// component is an exact exponential for constant rates and is thinned
/// against the declared dominating bound otherwise.
///
/// Hard errors (std::runtime_error): root-finder failure to converge, and
/// an observed refresh rate exceeding its declared bound (the message
/// names the violating position).
std::optional<PendingEvent> first_event_time(ZigZagState state,
                                             const Target& target,
                                             const RefreshPolicy& refresh,
                                             double horizon, RngStream& rng);

struct SimulateOptions {
  /// Abort threshold guarding against rate blow-ups.
  std::size_t max_events = 100'000'000;
};

/// Runs the process from `initial` for exactly `horizon` time units.
/// Deterministic in (initial, horizon, target, refresh, rng): equal inputs
/// give bit-identical skeletons. A skeleton simulated to horizon T
/// restricted to [0, t] is identical to one simulated to horizon t with
/// the same stream (the two clocks consume randomness in a fixed
/// interleaving order per excursion).
Skeleton simulate(ZigZagState initial, double horizon, const Target& target,
                  const RefreshPolicy& refresh, RngStream rng,
                  const SimulateOptions& options = {});

namespace detail {
/// Exposed for testing: the bounce-clock inversion alone. Returns the time
/// s in (0, horizon] at which the integrated uphill rate along the ray
/// reaches `level` (an Exp(1) draw), or nullopt if it never does.
std::optional<double> invert_bounce_time(const Target& target, double x,
                                         int theta, double horizon,
                                         double level);
}  // namespace detail

}  // namespace zigzag
