#include "mmw/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mmw/error.hpp"

namespace mmw {

Kernel::Kernel(std::size_t states, std::size_t actions)
    : states_(states), actions_(actions), row_ptr_{0} {
  if (actions_ == 0 || actions_ > 256) throw ValidationError("kernel needs 1..256 actions");
  row_ptr_.reserve(states_ * actions_ + 1);
}

void Kernel::append_row(std::vector<Transition> entries) {
  if (row_ptr_.size() > states_ * actions_) throw ValidationError("kernel already complete");
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Transition& a, const Transition& b) { return a.dest < b.dest; });
  for (std::size_t i = 0; i < entries.size();) {
    Transition merged = entries[i];
    if (merged.dest >= states_) throw ValidationError("kernel destination out of range");
    std::size_t j = i + 1;
    for (; j < entries.size() && entries[j].dest == merged.dest; ++j) merged.prob += entries[j].prob;
    if (merged.prob != 0.0) entries_.push_back(merged);
    i = j;
  }
  row_ptr_.push_back(entries_.size());
}

void Kernel::validate() const {
  if (row_ptr_.size() != states_ * actions_ + 1)
    throw ValidationError("kernel has " + std::to_string(row_ptr_.size() - 1) + " rows, expected " +
                          std::to_string(states_ * actions_));
  for (std::size_t s = 0; s < states_; ++s) {
    for (std::size_t a = 0; a < actions_; ++a) {
      double sum = 0.0;
      for (const auto& t : row(s, a)) {
        if (!(t.prob >= 0.0)) throw ValidationError("kernel has a negative probability");
        sum += t.prob;
      }
      if (std::abs(sum - 1.0) > kRowTolerance)
        throw ValidationError("kernel row (" + std::to_string(s) + "," + std::to_string(a) +
                              ") sums to " + std::to_string(sum));
    }
  }
}

void SolverParams::validate() const {
  if (!(omega > 0.0 && omega < 1.0)) throw ValidationError("discount factor must be in (0,1)");
  if (!(epsilon > 0.0)) throw ValidationError("stopping tolerance must be > 0");
  if (max_sweeps < 1) throw ValidationError("max_sweeps must be >= 1");
}

double transition_reward(const SystemState& from, Action a, const SystemState& to,
                         const RateTable& rates, double oh, RewardLoad load) {
  if (!(oh >= 0.0 && oh <= 1.0)) throw ValidationError("handover cost must be in [0,1]");
  if (a >= from.bss()) throw ValidationError("action out of range");
  const int others = load == RewardLoad::kPreviousSlot ? from[a].load - (a == 0 ? 1 : 0)
                                                       : to.serving().load - 1;
  const double cost = a == 0 ? 0.0 : oh;
  return (1.0 - cost) * rates(to.serving().channel) / (others + 1);
}

RewardTable expected_reward(const Kernel& kernel, const TransitionRewardFn& per_transition) {
  RewardTable r(kernel.states(), kernel.actions());
  for (std::size_t s = 0; s < kernel.states(); ++s) {
    for (std::size_t a = 0; a < kernel.actions(); ++a) {
      double acc = 0.0;
      for (const auto& t : kernel.row(s, a))
        acc += t.prob * per_transition(s, static_cast<Action>(a), t.dest);
      r(s, a) = acc;
    }
  }
  return r;
}

namespace {

double q_value(const Kernel& kernel, const RewardTable& rewards, double omega,
               std::span<const double> v, std::size_t s, std::size_t a) {
  double future = 0.0;
  for (const auto& t : kernel.row(s, a)) future += t.prob * v[t.dest];
  return rewards(s, a) + omega * future;
}

bool ties(double candidate, double best) {
  return candidate >= best - 1e-12 * std::max(1.0, std::abs(best));
}

}  // namespace

DeterministicPolicy greedy_policy(const Kernel& kernel, const RewardTable& rewards,
                                  double omega, std::span<const double> v) {
  DeterministicPolicy d;
  d.actions.resize(kernel.states());
  std::vector<double> q(kernel.actions());
  for (std::size_t s = 0; s < kernel.states(); ++s) {
    double best = -INFINITY;
    for (std::size_t a = 0; a < kernel.actions(); ++a) {
      q[a] = q_value(kernel, rewards, omega, v, s, a);
      best = std::max(best, q[a]);
    }
    std::size_t choice = 0;
    while (!ties(q[choice], best)) ++choice;
    d.actions[s] = static_cast<Action>(choice);
  }
  return d;
}

ViResult value_iteration(const Kernel& kernel, const RewardTable& rewards,
                         const SolverParams& params) {
  params.validate();
  if (rewards.states() != kernel.states() || rewards.actions() != kernel.actions())
    throw ValidationError("reward table does not match kernel dimensions");

  const std::size_t n = kernel.states();
  const double threshold = params.epsilon * (1.0 - params.omega) / (2.0 * params.omega);
  ViResult result;
  result.value.assign(n, 0.0);
  std::vector<double> next(n);

  while (result.sweeps < params.max_sweeps) {
    double delta = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double best = -INFINITY;
      for (std::size_t a = 0; a < kernel.actions(); ++a)
        best = std::max(best, q_value(kernel, rewards, params.omega, result.value, s, a));
      next[s] = best;
      delta = std::max(delta, std::abs(best - result.value[s]));
    }
    result.value.swap(next);
    ++result.sweeps;
    result.deltas.push_back(delta);
    if (delta < threshold) {
      result.converged = true;
      break;
    }
  }
  result.policy = greedy_policy(kernel, rewards, params.omega, result.value);
  return result;
}

ValueFunction policy_evaluation_exact(const DeterministicPolicy& policy, const Kernel& kernel,
                                      const RewardTable& rewards, double omega) {
  const std::size_t n = kernel.states();
  if (policy.size() != n) throw ValidationError("policy does not cover the state space");

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    const auto i = static_cast<int>(s);
    const std::size_t a = policy(s);
    if (a >= kernel.actions()) throw ValidationError("policy action out of range");
    triplets.emplace_back(i, i, 1.0);
    for (const auto& t : kernel.row(s, a))
      triplets.emplace_back(i, static_cast<int>(t.dest), -omega * t.prob);
    rhs(i) = rewards(s, a);
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw Error("policy evaluation: singular system");
  Eigen::VectorXd v = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw Error("policy evaluation: solve failed");
  return ValueFunction(v.data(), v.data() + v.size());
}

void write_kernel_csv(std::ostream& out, const Kernel& kernel,
                      const TransitionRewardFn& per_transition) {
  out << "state,action,dest,prob,reward\n";
  const auto old_precision = out.precision(17);
  for (std::size_t s = 0; s < kernel.states(); ++s)
    for (std::size_t a = 0; a < kernel.actions(); ++a)
      for (const auto& t : kernel.row(s, a))
        out << s << ',' << a << ',' << t.dest << ',' << t.prob << ','
            << per_transition(s, static_cast<Action>(a), t.dest) << '\n';
  out.precision(old_precision);
}

}  // namespace mmw
