#include <benchmark/benchmark.h>

#include "mmw/multiuser.hpp"
#include "mmw/state_space.hpp"

namespace {

mmw::MultiUserModel model(int ues) {
  return mmw::MultiUserModel(mmw::enumerate(3, 3, ues), mmw::channel_preset("urban-nlos-dominant"),
                             mmw::RateTable::defaults(), 0.1);
}

void BM_Enumerate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mmw::enumerate(3, 3, n).size());
}
BENCHMARK(BM_Enumerate)->DenseRange(1, 6);

void BM_BuildKernel(benchmark::State& state) {
  auto m = model(static_cast<int>(state.range(0)));
  auto profile = mmw::random_profile(m.space, 1);
  for (auto _ : state) benchmark::DoNotOptimize(mmw::build_kernel(0, profile, m).kernel.nonzeros());
  state.counters["states"] = static_cast<double>(m.space.size());
}
BENCHMARK(BM_BuildKernel)->DenseRange(2, 6)->Unit(benchmark::kMillisecond);

void BM_ValueIteration(benchmark::State& state) {
  auto m = model(static_cast<int>(state.range(0)));
  auto built = mmw::build_kernel(0, mmw::random_profile(m.space, 1), m);
  for (auto _ : state) {
    auto res = mmw::value_iteration(built.kernel, built.rewards, m.solver);
    benchmark::DoNotOptimize(res.sweeps);
  }
}
BENCHMARK(BM_ValueIteration)->DenseRange(2, 6)->Unit(benchmark::kMillisecond);

void BM_Converge(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto m = model(n);
  for (auto _ : state) {
    auto res = mmw::converge(mmw::random_profile(m.space, 1), m, 50 * n);
    benchmark::DoNotOptimize(res.iterations);
  }
}
BENCHMARK(BM_Converge)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

}  // namespace
