#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmw/channel_model.hpp"
#include "mmw/mdp.hpp"
#include "mmw/rates.hpp"
#include "mmw/state_space.hpp"

namespace mmw {

// Everything a UE needs to build its kernel: the shared state space, the
// link statistics, the rate table, the handover cost and solver settings.
struct MultiUserModel {
  MultiUserModel(StateSpace space, ChannelMatrix channel, RateTable rates, double oh,
                 SolverParams solver = {}, RewardLoad reward_load = RewardLoad::kDestination);

  StateSpace space;
  ChannelMatrix channel;
  std::vector<double> stationary;  // steady_state(channel)
  RateTable rates;
  double oh;
  SolverParams solver;
  RewardLoad reward_load;

  int ues() const { return space.ues(); }
  int bss() const { return space.bss(); }
};

struct PolicyProfile {
  std::vector<DeterministicPolicy> policies;  // one per UE

  std::size_t ues() const { return policies.size(); }
  friend bool operator==(const PolicyProfile&, const PolicyProfile&) = default;
};

// Uniformly random actions for every (UE, state), reproducible from `seed`.
PolicyProfile random_profile(const StateSpace& space, std::uint64_t seed);
// Every UE plays `action` in every state.
PolicyProfile constant_profile(const StateSpace& space, Action action);

// Probability that a UE following `policy` ends up on each BS, averaged over
// the stationary distribution of its L links. `loads[b]` is the occupancy of
// BS b (the UE included on `serving_bs`). When the chosen connection ties
// with other neighbors the mass is split evenly between them.
std::vector<double> selection_probabilities(const DeterministicPolicy& policy,
                                            std::span<const double> stationary,
                                            const StateSpace& space,
                                            std::span<const std::uint16_t> loads,
                                            std::size_t serving_bs);

struct KernelModel {
  Kernel kernel;
  RewardTable rewards;
};

// Single-agent MDP for UE `ue` with every other UE frozen at its profile
// policy. The tagged UE's L links move independently per the channel matrix
// and it lands deterministically on the chosen BS. Each other UE occupying
// BS b in the current state re-selects independently per the selection
// distribution at the current occupancy, averaged over the identities of the
// other UEs. Rows are accumulated on canonical destination states.
KernelModel build_kernel(std::size_t ue, const PolicyProfile& profile,
                         const MultiUserModel& model);

struct BestResponse {
  DeterministicPolicy policy;
  int sweeps = 0;
  bool solver_converged = false;
};

BestResponse best_response(std::size_t ue, const PolicyProfile& profile,
                           const MultiUserModel& model);

struct IterationRecord {
  int iteration;  // 1-based outer iteration
  std::size_t ue;  // 0-based UE updated in this iteration
  std::size_t changes;  // policy entries that differ from the previous policy
  bool solver_converged;
};

struct ConvergeResult {
  PolicyProfile profile;
  std::vector<IterationRecord> log;
  bool converged = false;
  int iterations = 0;
  // Change counts of the last N iterations (the last full round).
  std::vector<std::size_t> last_cycle_changes;
};

// Round-robin best responses, UE (n-1) mod N at iteration n. The first round
// only seeds the profile; afterwards N consecutive iterations without a
// single policy change declare convergence.
ConvergeResult converge(PolicyProfile initial, const MultiUserModel& model, int max_outer);

}  // namespace mmw
