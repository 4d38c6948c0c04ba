#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "mmw/rates.hpp"
#include "mmw/state_space.hpp"

namespace mmw {

// Action = canonical position of the BS to join next. 0 keeps the serving
// BS; any other value is a handover.
using Action = std::uint8_t;

struct Transition {
  std::uint32_t dest;
  double prob;
};

// Sparse p(s_j | s_i, a), one row per (state, action), every state offering
// the same number of actions. Rows are sorted by destination and must sum to
// one within 1e-9.
class Kernel {
 public:
  static constexpr double kRowTolerance = 1e-9;

  Kernel(std::size_t states, std::size_t actions);

  // Rows must be appended in (state, action) order. Entries are merged by
  // destination; zero-probability entries are dropped.
  void append_row(std::vector<Transition> entries);
  // Throws ValidationError when the kernel is incomplete or a row is off.
  void validate() const;

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }
  std::size_t nonzeros() const { return entries_.size(); }
  std::span<const Transition> row(std::size_t state, std::size_t action) const {
    std::size_t r = state * actions_ + action;
    return std::span<const Transition>(entries_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
  }

 private:
  std::size_t states_;
  std::size_t actions_;
  std::vector<std::size_t> row_ptr_;
  std::vector<Transition> entries_;
};

// r(s_i, a), row-major over (state, action).
class RewardTable {
 public:
  RewardTable(std::size_t states, std::size_t actions)
      : actions_(actions), r_(states * actions, 0.0) {}

  double operator()(std::size_t s, std::size_t a) const { return r_[s * actions_ + a]; }
  double& operator()(std::size_t s, std::size_t a) { return r_[s * actions_ + a]; }
  std::size_t states() const { return actions_ ? r_.size() / actions_ : 0; }
  std::size_t actions() const { return actions_; }
  std::span<const double> values() const { return r_; }

 private:
  std::size_t actions_;
  std::vector<double> r_;
};

using ValueFunction = std::vector<double>;

struct DeterministicPolicy {
  std::vector<Action> actions;  // indexed by state

  Action operator()(std::size_t state) const { return actions[state]; }
  std::size_t size() const { return actions.size(); }
  friend bool operator==(const DeterministicPolicy&, const DeterministicPolicy&) = default;
};

struct SolverParams {
  double omega = 0.9;
  double epsilon = 1e-6;
  int max_sweeps = 10'000;

  void validate() const;
};

// Which occupancy the rate denominator U_a + 1 is read from.
enum class RewardLoad {
  // Load of BS `a` in s_i, i.e. the previous slot, plus the incoming UE.
  kPreviousSlot,
  // Size of the joined cell in s_j, i.e. the occupancy the kernel predicts
  // after every UE has made its move.
  kDestination,
};

// Reward for moving from s_i to s_j under action `a`:
// (1 - c) R(channel of the joined BS in s_j) / (U_a + 1) with c = oh for
// a != 0. U_a excludes the tagged UE; `load` selects where it is read.
double transition_reward(const SystemState& from, Action a, const SystemState& to,
                         const RateTable& rates, double oh,
                         RewardLoad load = RewardLoad::kPreviousSlot);

using TransitionRewardFn = std::function<double(std::size_t from, Action a, std::size_t to)>;

// r(s_i, a) = sum_j p(s_j | s_i, a) r(s_i, a, s_j)
RewardTable expected_reward(const Kernel& kernel, const TransitionRewardFn& per_transition);

struct ViResult {
  ValueFunction value;
  DeterministicPolicy policy;
  int sweeps = 0;
  bool converged = false;
  // Sup-norm change of every sweep, in order.
  std::vector<double> deltas;
};

// Jacobi value iteration from v = 0. Stops once the sup-norm change drops
// below epsilon (1 - omega) / (2 omega) or at max_sweeps (converged = false).
// The greedy policy is extracted from the last iterate; among actions whose
// value is equal up to a relative 1e-12, the lowest index wins.
ViResult value_iteration(const Kernel& kernel, const RewardTable& rewards,
                         const SolverParams& params);

// Greedy policy and one-step lookahead values with respect to `v`.
DeterministicPolicy greedy_policy(const Kernel& kernel, const RewardTable& rewards,
                                  double omega, std::span<const double> v);

// Solves (I - omega P_d) v = r_d with a sparse LU factorization.
ValueFunction policy_evaluation_exact(const DeterministicPolicy& policy, const Kernel& kernel,
                                      const RewardTable& rewards, double omega);

// CSV with header `state,action,dest,prob,reward`.
void write_kernel_csv(std::ostream& out, const Kernel& kernel,
                      const TransitionRewardFn& per_transition);

}  // namespace mmw
