#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/channel_model.hpp"
#include "mmw/rates.hpp"

namespace mmw {

enum class Scheme { kMdp, kLoad, kRate, kChannel, kUpper };

std::string_view scheme_name(Scheme s);
// Accepts mdp | load | rate | channel | upper; throws ValidationError otherwise.
Scheme parse_scheme(std::string_view name);
std::vector<Scheme> all_schemes();

// Global snapshot for the centralized scheme: channels[ue * bss + b] is the
// state of the link between UE `ue` and BS `b`; loads come from the
// previous slot.
struct JointObservation {
  std::size_t ues = 0;
  std::size_t bss = 0;
  std::vector<ChannelState> channels;
  std::vector<int> loads;

  std::span<const ChannelState> row(std::size_t ue) const {
    return std::span<const ChannelState>(channels).subspan(ue * bss, bss);
  }
  void validate() const;
};

// Least-loaded BS; among equally loaded BSs the pick is uniform, driven by
// `u` in [0, 1).
std::size_t load_policy(std::span<const int> loads, double u);

// argmax_b R(channel_b) / (loads_b + 1), lowest index on ties.
std::size_t rate_policy(std::span<const ChannelState> channels, std::span<const int> loads,
                        const RateTable& rates);

// Best channel ordinal, lowest index on ties.
std::size_t channel_policy(std::span<const ChannelState> channels);

inline constexpr std::uint64_t kUpperBoundBudget = 10'000'000;

// Exhaustive search over all L^N joint assignments for the one maximizing
// sum_k (1 - c_k) R(channel_{k, a_k}) / U_{a_k}, with U the resulting cell
// sizes and c_k = oh for UEs leaving `previous[k]` (only when charge_oh).
// Ties go to the lexicographically smallest assignment.
std::vector<std::size_t> upper_bound_assignment(const JointObservation& obs,
                                                const RateTable& rates, double oh,
                                                std::span<const std::size_t> previous,
                                                bool charge_oh = true,
                                                std::uint64_t budget = kUpperBoundBudget);

// Slot reward of an assignment under the same objective.
double assignment_reward(const JointObservation& obs, const RateTable& rates, double oh,
                         std::span<const std::size_t> previous,
                         std::span<const std::size_t> assignment, bool charge_oh = true);

}  // namespace mmw
