#include <benchmark/benchmark.h>

#include "mmw/simulator.hpp"

namespace {

void BM_SimulateSeed(benchmark::State& state) {
  const auto scheme = static_cast<mmw::Scheme>(state.range(0));
  mmw::SimConfig cfg;
  cfg.slots = 20'000;
  cfg.warmup = 0;
  mmw::MultiUserModel model(mmw::enumerate(3, 3, 3), cfg.channel, cfg.rates, cfg.oh);
  auto res = mmw::converge(mmw::random_profile(model.space, 1), model, 150);
  mmw::MdpPolicySet mdp{model.space, res.profile};
  for (auto _ : state) benchmark::DoNotOptimize(mmw::run_seed(cfg, scheme, &mdp, 1).avg_se);
  state.SetItemsProcessed(state.iterations() * cfg.slots);
  state.SetLabel(std::string(mmw::scheme_name(scheme)));
}
BENCHMARK(BM_SimulateSeed)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace
