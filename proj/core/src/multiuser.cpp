#include "mmw/multiuser.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "mmw/error.hpp"
#include "mmw/rng.hpp"

namespace mmw {
namespace {

// Odometer over all K^L channel combinations.
bool next_combo(std::vector<ChannelState>& combo, int k) {
  for (auto& c : combo) {
    if (c.value + 1 < k) {
      ++c.value;
      return true;
    }
    c = ChannelState(0);
  }
  return false;
}

void check_profile(const PolicyProfile& profile, const MultiUserModel& model) {
  if (profile.ues() != static_cast<std::size_t>(model.ues()))
    throw ValidationError("policy profile has " + std::to_string(profile.ues()) +
                          " UEs, state space expects " + std::to_string(model.ues()));
  for (const auto& p : profile.policies) {
    if (p.size() != model.space.size())
      throw ValidationError("policy does not cover the state space");
    for (Action a : p.actions)
      if (a >= model.bss()) throw ValidationError("policy action out of range");
  }
}

using LoadVector = std::vector<std::uint16_t>;
using OccupancyDistribution = std::map<LoadVector, double>;

}  // namespace

MultiUserModel::MultiUserModel(StateSpace space_in, ChannelMatrix channel_in, RateTable rates_in,
                               double oh_in, SolverParams solver_in, RewardLoad reward_load_in)
    : space(std::move(space_in)),
      channel(std::move(channel_in)),
      stationary(steady_state(channel)),
      rates(std::move(rates_in)),
      oh(oh_in),
      solver(solver_in),
      reward_load(reward_load_in) {
  if (channel.states() != static_cast<std::size_t>(space.channel_states()))
    throw ValidationError("channel matrix size does not match the state space");
  if (rates.states() != channel.states())
    throw ValidationError("rate table size does not match the channel matrix");
  if (!(oh >= 0.0 && oh <= 1.0)) throw ValidationError("handover cost must be in [0,1]");
  solver.validate();
}

PolicyProfile random_profile(const StateSpace& space, std::uint64_t seed) {
  CounterRng rng(seed);
  PolicyProfile profile;
  profile.policies.resize(static_cast<std::size_t>(space.ues()));
  for (std::size_t ue = 0; ue < profile.policies.size(); ++ue) {
    auto& actions = profile.policies[ue].actions;
    actions.resize(space.size());
    for (std::size_t s = 0; s < space.size(); ++s)
      actions[s] = static_cast<Action>(rng.below(static_cast<std::uint64_t>(space.bss()), {ue, s}));
  }
  return profile;
}

PolicyProfile constant_profile(const StateSpace& space, Action action) {
  PolicyProfile profile;
  profile.policies.assign(static_cast<std::size_t>(space.ues()),
                          DeterministicPolicy{std::vector<Action>(space.size(), action)});
  return profile;
}

std::vector<double> selection_probabilities(const DeterministicPolicy& policy,
                                            std::span<const double> stationary,
                                            const StateSpace& space,
                                            std::span<const std::uint16_t> loads,
                                            std::size_t serving_bs) {
  const auto bss = static_cast<std::size_t>(space.bss());
  const int k = space.channel_states();
  if (loads.size() != bss) throw ValidationError("load vector must have one entry per BS");
  if (serving_bs >= bss || loads[serving_bs] < 1)
    throw ValidationError("serving BS must carry the selecting UE");
  int total = 0;
  for (auto u : loads) total += u;
  if (total != space.ues()) throw ValidationError("loads do not add up to the number of UEs");
  if (stationary.size() != static_cast<std::size_t>(k))
    throw ValidationError("stationary distribution size does not match the state space");
  if (policy.size() != space.size()) throw ValidationError("policy does not cover the state space");

  std::vector<double> out(bss, 0.0);
  std::vector<ChannelState> combo(bss);
  std::vector<Connection> by_bs(bss);
  std::vector<std::size_t> tied;
  do {
    double weight = 1.0;
    for (std::size_t b = 0; b < bss; ++b) {
      weight *= stationary[combo[b].index()];
      by_bs[b] = Connection{combo[b], loads[b]};
    }
    if (weight == 0.0) continue;
    const auto view = canonical_view(by_bs, serving_bs);
    const Action a = policy(space.index_of(view.state));
    if (a == 0) {
      out[serving_bs] += weight;
      continue;
    }
    tied.clear();
    for (std::size_t b = 0; b < bss; ++b)
      if (b != serving_bs && by_bs[b] == view.state[a]) tied.push_back(b);
    for (auto b : tied) out[b] += weight / static_cast<double>(tied.size());
  } while (next_combo(combo, k));
  return out;
}

KernelModel build_kernel(std::size_t ue, const PolicyProfile& profile,
                         const MultiUserModel& model) {
  check_profile(profile, model);
  if (ue >= profile.ues()) throw ValidationError("UE index out of range");

  const auto& space = model.space;
  const auto bss = static_cast<std::size_t>(space.bss());
  const int k = space.channel_states();
  const std::size_t others = profile.ues() - 1;

  // Per-slot re-selection distribution of an unidentified other UE sitting
  // on position `b` under occupancy `loads`.
  std::map<std::pair<LoadVector, std::size_t>, std::vector<double>> slot_cache;
  auto slot_distribution = [&](const LoadVector& loads, std::size_t b) -> const std::vector<double>& {
    auto key = std::make_pair(loads, b);
    auto it = slot_cache.find(key);
    if (it != slot_cache.end()) return it->second;
    std::vector<double> mix(bss, 0.0);
    for (std::size_t x = 0; x < profile.ues(); ++x) {
      if (x == ue) continue;
      auto sel = selection_probabilities(profile.policies[x], model.stationary, space, loads, b);
      for (std::size_t j = 0; j < bss; ++j) mix[j] += sel[j] / static_cast<double>(others);
    }
    return slot_cache.emplace(std::move(key), std::move(mix)).first->second;
  };

  Kernel kernel(space.size(), bss);
  std::vector<ChannelState> combo(bss);
  std::vector<Connection> by_bs(bss);
  std::vector<Transition> row;

  for (std::size_t si = 0; si < space.size(); ++si) {
    const SystemState& s = space.state_of(si);
    LoadVector loads(bss);
    for (std::size_t p = 0; p < bss; ++p) loads[p] = s[p].load;

    OccupancyDistribution occupancy{{LoadVector(bss, 0), 1.0}};
    for (std::size_t p = 0; p < bss; ++p) {
      const int count = loads[p] - (p == 0 ? 1 : 0);
      if (count == 0) continue;
      const auto& q = slot_distribution(loads, p);
      for (int c = 0; c < count; ++c) {
        OccupancyDistribution next;
        for (const auto& [occ, w] : occupancy) {
          for (std::size_t j = 0; j < bss; ++j) {
            if (q[j] == 0.0) continue;
            LoadVector moved = occ;
            ++moved[j];
            next[moved] += w * q[j];
          }
        }
        occupancy = std::move(next);
      }
    }

    for (std::size_t a = 0; a < bss; ++a) {
      row.clear();
      std::fill(combo.begin(), combo.end(), ChannelState(0));
      do {
        double pc = 1.0;
        for (std::size_t p = 0; p < bss; ++p) pc *= model.channel(s[p].channel.index(), combo[p].index());
        if (pc == 0.0) continue;
        for (const auto& [occ, w] : occupancy) {
          for (std::size_t p = 0; p < bss; ++p)
            by_bs[p] = Connection{combo[p], static_cast<std::uint16_t>(occ[p] + (p == a ? 1 : 0))};
          const auto view = canonical_view(by_bs, a);
          row.push_back({static_cast<std::uint32_t>(space.index_of(view.state)), pc * w});
        }
      } while (next_combo(combo, k));
      kernel.append_row(std::move(row));
      row = {};
    }
  }
  kernel.validate();

  auto rewards = expected_reward(kernel, [&](std::size_t from, Action a, std::size_t to) {
    return transition_reward(space.state_of(from), a, space.state_of(to), model.rates, model.oh,
                             model.reward_load);
  });
  return {std::move(kernel), std::move(rewards)};
}

BestResponse best_response(std::size_t ue, const PolicyProfile& profile,
                           const MultiUserModel& model) {
  auto built = build_kernel(ue, profile, model);
  auto vi = value_iteration(built.kernel, built.rewards, model.solver);
  return {std::move(vi.policy), vi.sweeps, vi.converged};
}

ConvergeResult converge(PolicyProfile initial, const MultiUserModel& model, int max_outer) {
  check_profile(initial, model);
  if (max_outer < 1) throw ValidationError("max_outer must be >= 1");

  const std::size_t n_ues = initial.ues();
  ConvergeResult result;
  result.profile = std::move(initial);
  std::size_t quiet_streak = 0;

  for (int n = 1; n <= max_outer; ++n) {
    const std::size_t k = static_cast<std::size_t>(n - 1) % n_ues;
    auto br = best_response(k, result.profile, model);
    auto& current = result.profile.policies[k].actions;
    std::size_t changes = 0;
    for (std::size_t s = 0; s < current.size(); ++s) changes += current[s] != br.policy.actions[s];
    current = std::move(br.policy.actions);
    result.log.push_back({n, k, changes, br.solver_converged});
    result.iterations = n;

    if (static_cast<std::size_t>(n) > n_ues && changes == 0)
      ++quiet_streak;
    else
      quiet_streak = 0;
    if (quiet_streak == n_ues) {
      result.converged = true;
      break;
    }
  }

  const std::size_t tail = std::min(n_ues, result.log.size());
  for (std::size_t i = result.log.size() - tail; i < result.log.size(); ++i)
    result.last_cycle_changes.push_back(result.log[i].changes);
  return result;
}

}  // namespace mmw
