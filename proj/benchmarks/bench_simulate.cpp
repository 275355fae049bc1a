#include <benchmark/benchmark.h>

#include "zigzag/estimators.hpp"
#include "zigzag/experiments.hpp"
#include "zigzag/pdmp.hpp"
#include "zigzag/targets.hpp"

namespace {

using namespace zigzag;

void BM_SimulateCauchyZero(benchmark::State& state) {
  const Target target = make_cauchy();
  const RefreshPolicy refresh = RefreshPolicy::zero();
  const double horizon = static_cast<double>(state.range(0));
  std::uint64_t stream = 0;
  std::size_t events = 0;
  for (auto _ : state) {
    RngStream rng(1, stream++);
    const Skeleton s = simulate({0.0, +1}, horizon, target, refresh, rng);
    events += s.events.size();
    benchmark::DoNotOptimize(s.events.data());
  }
  state.counters["events/s"] = benchmark::Counter(
      static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateCauchyZero)->Arg(1000)->Arg(10000);

void BM_SimulateCauchyConstRefresh(benchmark::State& state) {
  const Target target = make_cauchy();
  const RefreshPolicy refresh = RefreshPolicy::constant(1.0);
  std::uint64_t stream = 0;
  std::size_t events = 0;
  for (auto _ : state) {
    RngStream rng(2, stream++);
    const Skeleton s = simulate({0.0, +1}, 1000.0, target, refresh, rng);
    events += s.events.size();
    benchmark::DoNotOptimize(s.events.data());
  }
  state.counters["events/s"] = benchmark::Counter(
      static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateCauchyConstRefresh);

void BM_SimulateCauchyGradRefresh(benchmark::State& state) {
  const Target target = make_cauchy();
  const RefreshPolicy refresh = RefreshPolicy::grad_proportional(1.0);
  std::uint64_t stream = 0;
  std::size_t events = 0;
  for (auto _ : state) {
    RngStream rng(3, stream++);
    const Skeleton s = simulate({0.0, +1}, 1000.0, target, refresh, rng);
    events += s.events.size();
    benchmark::DoNotOptimize(s.events.data());
  }
  state.counters["events/s"] = benchmark::Counter(
      static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateCauchyGradRefresh);

void BM_SimulateGaussian(benchmark::State& state) {
  const Target target = make_gaussian();
  const RefreshPolicy refresh = RefreshPolicy::zero();
  std::uint64_t stream = 0;
  std::size_t events = 0;
  for (auto _ : state) {
    RngStream rng(4, stream++);
    const Skeleton s = simulate({0.0, +1}, 1000.0, target, refresh, rng);
    events += s.events.size();
    benchmark::DoNotOptimize(s.events.data());
  }
  state.counters["events/s"] = benchmark::Counter(
      static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateGaussian);

void BM_OccupationCurve(benchmark::State& state) {
  const Target target = make_cauchy();
  RngStream rng(5, 0);
  const Skeleton skel = simulate({0.0, +1}, 10000.0, target,
                                 RefreshPolicy::constant(1.0), rng);
  const auto checkpoints = log_checkpoints(1.0, 10000.0, 200);
  for (auto _ : state) {
    auto curve = occupation_curve(skel, {5.0}, checkpoints);
    benchmark::DoNotOptimize(curve.data());
  }
  state.counters["segments"] = static_cast<double>(skel.events.size());
}
BENCHMARK(BM_OccupationCurve);

void BM_FirstEventDraw(benchmark::State& state) {
  const Target target = make_cauchy();
  const RefreshPolicy refresh = RefreshPolicy::zero();
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RngStream rng(6, stream++);
    auto ev = first_event_time({0.0, +1}, target, refresh, 1e12, rng);
    benchmark::DoNotOptimize(ev);
  }
}
BENCHMARK(BM_FirstEventDraw);

}  // namespace

BENCHMARK_MAIN();
