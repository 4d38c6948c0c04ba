#include "mmw/baselines.hpp"

#include <algorithm>

#include "mmw/error.hpp"

namespace mmw {

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kMdp: return "mdp";
    case Scheme::kLoad: return "load";
    case Scheme::kRate: return "rate";
    case Scheme::kChannel: return "channel";
    case Scheme::kUpper: return "upper";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : all_schemes())
    if (scheme_name(s) == name) return s;
  throw ValidationError("unknown scheme '" + std::string(name) +
                        "' (expected mdp, load, rate, channel or upper)");
}

std::vector<Scheme> all_schemes() {
  return {Scheme::kMdp, Scheme::kLoad, Scheme::kRate, Scheme::kChannel, Scheme::kUpper};
}

void JointObservation::validate() const {
  if (ues == 0 || bss == 0) throw ValidationError("observation needs at least one UE and BS");
  if (channels.size() != ues * bss) throw ValidationError("observation channel matrix is not N x L");
  if (loads.size() != bss) throw ValidationError("observation needs one load per BS");
  int total = 0;
  for (int u : loads) total += u;
  if (total != static_cast<int>(ues)) throw ValidationError("observation loads do not add up to N");
}

std::size_t load_policy(std::span<const int> loads, double u) {
  if (loads.empty()) throw ValidationError("no BS to choose from");
  const int least = *std::min_element(loads.begin(), loads.end());
  std::vector<std::size_t> candidates;
  for (std::size_t b = 0; b < loads.size(); ++b)
    if (loads[b] == least) candidates.push_back(b);
  auto pick = static_cast<std::size_t>(u * static_cast<double>(candidates.size()));
  return candidates[std::min(pick, candidates.size() - 1)];
}

std::size_t rate_policy(std::span<const ChannelState> channels, std::span<const int> loads,
                        const RateTable& rates) {
  if (channels.empty() || channels.size() != loads.size())
    throw ValidationError("rate policy needs one channel and one load per BS");
  std::size_t best = 0;
  double best_rate = -1.0;
  for (std::size_t b = 0; b < channels.size(); ++b) {
    double r = rates(channels[b]) / (loads[b] + 1);
    if (r > best_rate) {
      best_rate = r;
      best = b;
    }
  }
  return best;
}

std::size_t channel_policy(std::span<const ChannelState> channels) {
  if (channels.empty()) throw ValidationError("no BS to choose from");
  return static_cast<std::size_t>(std::max_element(channels.begin(), channels.end()) -
                                  channels.begin());
}

double assignment_reward(const JointObservation& obs, const RateTable& rates, double oh,
                         std::span<const std::size_t> previous,
                         std::span<const std::size_t> assignment, bool charge_oh) {
  std::vector<int> size(obs.bss, 0);
  for (auto b : assignment) ++size[b];
  double total = 0.0;
  for (std::size_t k = 0; k < obs.ues; ++k) {
    const auto b = assignment[k];
    const double cost = charge_oh && previous[k] != b ? oh : 0.0;
    total += (1.0 - cost) * rates(obs.channels[k * obs.bss + b]) / size[b];
  }
  return total;
}

std::vector<std::size_t> upper_bound_assignment(const JointObservation& obs,
                                                const RateTable& rates, double oh,
                                                std::span<const std::size_t> previous,
                                                bool charge_oh, std::uint64_t budget) {
  obs.validate();
  if (previous.size() != obs.ues) throw ValidationError("previous assignment must cover every UE");
  if (!(oh >= 0.0 && oh <= 1.0)) throw ValidationError("handover cost must be in [0,1]");
  std::uint64_t space = 1;
  for (std::size_t k = 0; k < obs.ues; ++k) {
    if (__builtin_mul_overflow(space, obs.bss, &space) || space > budget)
      throw CapacityError("upper bound search space exceeds budget");
  }

  // Odometer with the last UE varying fastest gives lexicographic order.
  std::vector<std::size_t> candidate(obs.ues, 0);
  std::vector<std::size_t> best = candidate;
  double best_reward = -1.0;
  for (;;) {
    double r = assignment_reward(obs, rates, oh, previous, candidate, charge_oh);
    if (r > best_reward) {
      best_reward = r;
      best = candidate;
    }
    std::size_t pos = obs.ues;
    while (pos > 0) {
      --pos;
      if (++candidate[pos] < obs.bss) break;
      candidate[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

}  // namespace mmw
