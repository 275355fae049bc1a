#include "zigzag/pdmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace zigzag {
namespace {

constexpr double kRootTolTime = 1e-12;
constexpr int kMaxRootIter = 200;

double ray(double x, int theta, double s) { return x + theta * s; }

// Solves U(x + s theta) == target_level for s in [lo, hi], where the
// potential is increasing along the ray on that stretch and
// U(ray(lo)) < target_level <= U(ray(hi)). hi may be +infinity (the last
// monotone stretch of the ray); everything here is a function of the
// stretch alone, independent of any horizon, so identical streams yield
// bit-identical event times regardless of the run length.
double solve_on_stretch(const Target& target, double x, int theta, double lo,
                        double hi, double target_level) {
  auto g = [&](double s) { return target.potential(ray(x, theta, s)) - target_level; };

  // Bracket by doubling steps from the low end.
  const double span = std::isfinite(hi) ? hi - lo : std::max(1.0, std::abs(lo));
  double step = std::max(span * 0x1p-16, kRootTolTime);
  double blo = lo, bhi = hi;
  int iter = 0;
  for (double s = lo + step;; s = blo + step) {
    if (++iter > kMaxRootIter)
      throw std::runtime_error("event inversion: bracketing did not converge");
    if (std::isfinite(hi) && s >= hi) break;  // g(hi) >= 0 closes the bracket
    if (g(s) < 0.0) {
      blo = s;
      step *= 2.0;
    } else {
      bhi = s;
      break;
    }
  }
  if (!std::isfinite(bhi))
    throw std::runtime_error("event inversion: bracketing did not converge");

  // Bisection to width 1e-12 (or to the ulp floor at large |s|).
  iter = 0;
  const double eps = std::numeric_limits<double>::epsilon();
  while (bhi - blo > std::max(kRootTolTime, 8.0 * eps * std::max(std::abs(blo), std::abs(bhi)))) {
    if (++iter > kMaxRootIter)
      throw std::runtime_error(
          "event inversion: bisection did not converge to tolerance 1e-12");
    const double mid = 0.5 * (blo + bhi);
    if (mid <= blo || mid >= bhi) break;  // ulp-limited
    if (g(mid) < 0.0)
      blo = mid;
    else
      bhi = mid;
  }

  // One Newton polish; the derivative of g is theta U' >= 0 on the stretch.
  double s = 0.5 * (blo + bhi);
  const double slope = theta * target.grad_potential(ray(x, theta, s));
  if (slope > 0.0) {
    const double candidate = s - g(s) / slope;
    if (candidate >= blo && candidate <= bhi) s = candidate;
  }
  return s;
}

// Refresh-clock arrival strictly before s_lim, by exact exponential for a
// constant rate and by thinning against the declared dominating bound
// otherwise. Consumes a deterministic draw sequence given s_lim.
std::optional<double> draw_refresh_time(const RefreshPolicy& refresh,
                                        const Target& target, double x,
                                        int theta, double s_lim,
                                        RngStream& rng) {
  switch (refresh.kind()) {
    case RefreshPolicy::Kind::Zero:
      return std::nullopt;
    case RefreshPolicy::Kind::Constant: {
      const double gamma0 = refresh.coefficient();
      if (gamma0 <= 0.0) return std::nullopt;
      const double t = rng.exponential() / gamma0;
      if (t < s_lim) return t;
      return std::nullopt;
    }
    case RefreshPolicy::Kind::GradProportional:
    case RefreshPolicy::Kind::Custom: {
      // Thinning against a piecewise-constant dominating rate. Chunk
      // boundaries depend only on the chunk's start position, never on the
      // horizon or the bounce time, so a longer run consumes the identical
      // draw sequence over the shared window (the prefix contract).
      double chunk_start = 0.0;
      while (chunk_start < s_lim) {
        const double x0 = ray(x, theta, chunk_start);
        const double len = std::max(1.0, 0.5 * std::abs(x0));
        const double chunk_end = chunk_start + len;
        const double x1 = ray(x, theta, chunk_end);
        const double bound =
            refresh.rate_bound_on(std::min(x0, x1), std::max(x0, x1), target);
        double p = chunk_start;
        while (bound > 0.0) {
          p += rng.exponential() / bound;
          if (p >= chunk_end || p >= s_lim) break;
          const double xp = ray(x, theta, p);
          const double g = refresh.rate(xp, target);
          if (g > bound * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "refresh thinning bound violated: rate " << g << " > bound "
               << bound << " at x=" << xp;
            throw std::runtime_error(os.str());
          }
          if (rng.uniform() * bound <= g) return p;
        }
        if (p >= s_lim && p < chunk_end) return std::nullopt;
        chunk_start = chunk_end;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

double Skeleton::position_at(double t) const {
  if (!(t >= 0.0) || !(t <= horizon))
    throw std::out_of_range("position_at: time outside [0, horizon]");
  // Last event with time <= t.
  auto it = std::upper_bound(events.begin(), events.end(), t,
                             [](double v, const SkeletonEvent& e) { return v < e.time; });
  if (it == events.begin()) return initial.x + initial.theta * t;
  const auto& e = *(it - 1);
  const std::size_t n = static_cast<std::size_t>(it - events.begin());
  return e.position + theta_after(n) * (t - e.time);
}

ZigZagState Skeleton::state_at(double t) const {
  if (!(t >= 0.0) || !(t <= horizon))
    throw std::out_of_range("state_at: time outside [0, horizon]");
  auto it = std::upper_bound(events.begin(), events.end(), t,
                             [](double v, const SkeletonEvent& e) { return v < e.time; });
  const std::size_t n = static_cast<std::size_t>(it - events.begin());
  return {position_at(t), theta_after(n)};
}

void Skeleton::validate(double tol) const {
  double prev_t = 0.0;
  double prev_x = initial.x;
  int theta = initial.theta;
  if (theta != 1 && theta != -1)
    throw std::runtime_error("skeleton: velocity must be exactly +-1");
  for (const auto& e : events) {
    if (!(e.time > prev_t))
      throw std::runtime_error("skeleton: event times must be strictly increasing");
    if (!(e.time <= horizon))
      throw std::runtime_error("skeleton: event time beyond horizon");
    const double dt = e.time - prev_t;
    const double dx = e.position - prev_x;
    if (std::abs(std::abs(dx) - dt) > tol * std::max(1.0, dt))
      throw std::runtime_error("skeleton: unit-speed invariant violated");
    if (dx * theta < 0.0)
      throw std::runtime_error("skeleton: segment direction disagrees with velocity");
    prev_t = e.time;
    prev_x = e.position;
    theta = -theta;
  }
}

double switching_rate(ZigZagState state, const Target& target,
                      const RefreshPolicy& refresh) {
  const double drift = state.theta * target.grad_potential(state.x);
  return std::max(drift, 0.0) + refresh.rate(state.x, target);
}

namespace detail {

std::optional<double> invert_bounce_time(const Target& target, double x,
                                         int theta, double horizon,
                                         double level) {
  // Stretch boundaries are the crossings of the target's stationary points
  // that lie strictly ahead on the ray; between consecutive boundaries the
  // potential is monotone, and past the last crossing it is monotone all
  // the way out. The crossing found is a function of the ray and the level
  // only; the horizon merely filters the result, which keeps a longer run
  // bit-identical to a shorter one over the shared window.
  const auto& pts = target.stationary_points;
  std::ptrdiff_t idx;
  if (theta > 0) {
    idx = std::upper_bound(pts.begin(), pts.end(), x) - pts.begin();
  } else {
    idx = (std::lower_bound(pts.begin(), pts.end(), x) - pts.begin()) - 1;
  }
  auto next_crossing = [&]() -> double {
    while (idx >= 0 && idx < static_cast<std::ptrdiff_t>(pts.size())) {
      const double s = theta > 0 ? pts[idx] - x : x - pts[idx];
      idx += theta;
      if (s > 0.0) return s;
    }
    return std::numeric_limits<double>::infinity();
  };

  double s0 = 0.0;
  double u0 = target.potential(x);
  double remaining = level;
  for (;;) {
    if (s0 >= horizon) return std::nullopt;  // every later piece is out of reach
    const double s1 = next_crossing();
    if (!(s1 > s0)) continue;
    const bool unbounded = !std::isfinite(s1);
    const double probe =
        unbounded ? s0 + std::max(1.0, 1e-3 * std::abs(ray(x, theta, s0)))
                  : 0.5 * (s0 + s1);
    const double slope = theta * target.grad_potential(ray(x, theta, probe));
    if (slope > 0.0) {
      // Uphill: the integrated rate over the piece is the potential
      // increment; an unbounded uphill piece absorbs any level.
      if (unbounded) {
        const double s = solve_on_stretch(target, x, theta, s0, s1, u0 + remaining);
        return s <= horizon ? std::optional<double>(s) : std::nullopt;
      }
      const double u1 = target.potential(ray(x, theta, s1));
      const double dlam = std::max(u1 - u0, 0.0);
      if (dlam >= remaining) {
        const double s = solve_on_stretch(target, x, theta, s0, s1, u0 + remaining);
        return s <= horizon ? std::optional<double>(s) : std::nullopt;
      }
      remaining -= dlam;
      u0 = u1;
    } else {
      if (unbounded) return std::nullopt;  // zero rate forever
      u0 = target.potential(ray(x, theta, s1));
    }
    s0 = s1;
  }
}

}  // namespace detail

std::optional<PendingEvent> first_event_time(ZigZagState state,
                                             const Target& target,
                                             const RefreshPolicy& refresh,
                                             double horizon, RngStream& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("first_event_time: horizon must be > 0");
  if (state.theta != 1 && state.theta != -1)
    throw std::invalid_argument("first_event_time: velocity must be exactly +-1");

  // Fixed draw order per excursion: the bounce level first, then the
  // refresh clock. The order must not depend on the horizon, so that a
  // longer run extends a shorter one event-for-event.
  const double level = rng.exponential();

  const bool refresh_is_simple = refresh.kind() == RefreshPolicy::Kind::Zero ||
                                 refresh.kind() == RefreshPolicy::Kind::Constant;
  if (refresh_is_simple) {
    // The refresh arrival does not depend on the bounce time; inverting the
    // bounce clock only up to the earlier of the two saves root-finding.
    auto refresh_time = draw_refresh_time(refresh, target, state.x, state.theta,
                                          horizon, rng);
    const double window = refresh_time ? *refresh_time : horizon;
    auto bounce = detail::invert_bounce_time(target, state.x, state.theta,
                                             window, level);
    if (bounce) return PendingEvent{*bounce, EventKind::Bounce};
    if (refresh_time) return PendingEvent{*refresh_time, EventKind::Refresh};
    return std::nullopt;
  }

  auto bounce = detail::invert_bounce_time(target, state.x, state.theta,
                                           horizon, level);
  const double s_lim = bounce ? *bounce : horizon;
  auto refresh_time =
      draw_refresh_time(refresh, target, state.x, state.theta, s_lim, rng);
  if (refresh_time) return PendingEvent{*refresh_time, EventKind::Refresh};
  if (bounce) return PendingEvent{*bounce, EventKind::Bounce};
  return std::nullopt;
}

Skeleton simulate(ZigZagState initial, double horizon, const Target& target,
                  const RefreshPolicy& refresh, RngStream rng,
                  const SimulateOptions& options) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");
  if (initial.theta != 1 && initial.theta != -1)
    throw std::invalid_argument("simulate: velocity must be exactly +-1");

  Skeleton skel;
  skel.initial = initial;
  skel.horizon = horizon;

  ZigZagState cur = initial;
  double now = 0.0;
  for (;;) {
    const double remaining = horizon - now;
    if (!(remaining > 0.0)) break;
    auto ev = first_event_time(cur, target, refresh, remaining, rng);
    if (!ev) break;
    now += ev->time;
    cur.x += cur.theta * ev->time;
    cur.theta = -cur.theta;
    skel.events.push_back({now, ev->kind, cur.x});
    if (skel.events.size() > options.max_events) {
      std::ostringstream os;
      os << "simulate: event count exceeded cap " << options.max_events
         << " (t=" << now << ", x=" << cur.x
         << "); suspected rate blow-up, raise SimulateOptions::max_events if intended";
      throw std::runtime_error(os.str());
    }
  }
  return skel;
}

}  // namespace zigzag
