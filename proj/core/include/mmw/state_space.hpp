#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmw/channel_model.hpp"

namespace mmw {

// One UE-to-BS link as seen by the tagged UE: its quantized channel and the
// number of UEs attached to that BS.
struct Connection {
  ChannelState channel;
  std::uint16_t load = 0;

  friend constexpr auto operator<=>(const Connection&, const Connection&) = default;
};

// Joint state seen by the tagged UE. Position 0 is the serving BS; its load
// counts the tagged UE itself, so it is always >= 1. Note that the reward
// model works with the load *excluding* the tagged UE (serving load - 1), as
// the incoming user is added back as "+1" in the rate denominator.
// Positions 1..L-1 are the neighbor BSs in canonical order: descending by
// (channel, load).
class SystemState {
 public:
  SystemState() = default;
  explicit SystemState(std::vector<Connection> connections)
      : connections_(std::move(connections)) {}

  const Connection& serving() const { return connections_.front(); }
  std::span<const Connection> neighbors() const {
    return std::span<const Connection>(connections_).subspan(1);
  }
  std::span<const Connection> connections() const { return connections_; }
  const Connection& operator[](std::size_t position) const { return connections_[position]; }
  std::size_t bss() const { return connections_.size(); }
  int total_load() const;

  friend auto operator<=>(const SystemState&, const SystemState&) = default;
  friend bool operator==(const SystemState&, const SystemState&) = default;

 private:
  std::vector<Connection> connections_;
};

// Canonical multiset of loads (channels erased), sorted descending.
struct OccupancyState {
  std::vector<std::uint16_t> loads;
  friend auto operator<=>(const OccupancyState&, const OccupancyState&) = default;
};

OccupancyState occupancy_of(const SystemState& s);

// Sorts neighbors into canonical order. Throws ValidationError when the
// serving load is zero or the loads do not add up to `ues`.
SystemState canonicalize(const Connection& serving, std::span<const Connection> neighbors,
                         int ues);
bool is_canonical(const SystemState& s);

// Canonical view of a physical configuration. `by_bs[b]` is the link to BS b
// and `serving_bs` the tagged UE's BS. `bs_at[p]` maps canonical position p
// back to the physical BS; neighbors that compare equal keep physical order.
struct CanonicalView {
  SystemState state;
  std::vector<std::uint8_t> bs_at;
};
CanonicalView canonical_view(std::span<const Connection> by_bs, std::size_t serving_bs);

class StateSpace {
 public:
  static constexpr std::size_t kDefaultCap = 10'000'000;

  int bss() const { return bss_; }
  int channel_states() const { return channel_states_; }
  int ues() const { return ues_; }
  std::size_t size() const { return states_.size(); }
  const SystemState& state_of(std::size_t index) const { return states_[index]; }
  std::span<const SystemState> states() const { return states_; }

  std::optional<std::size_t> find(const SystemState& s) const;
  // Throws ValidationError for a state outside the space.
  std::size_t index_of(const SystemState& s) const;

  friend StateSpace enumerate(int bss, int channel_states, int ues, std::size_t cap);

 private:
  int bss_ = 0;
  int channel_states_ = 0;
  int ues_ = 0;
  std::vector<SystemState> states_;  // sorted ascending
};

// Every canonical state for L BSs, K channel states and N UEs, indexed in
// ascending lexicographic order. Throws CapacityError past `cap` states.
StateSpace enumerate(int bss, int channel_states, int ues,
                     std::size_t cap = StateSpace::kDefaultCap);

// Closed-form occupancy counts c_L(N), L in 1..4, transcribed literally
// (q(x) = max(x, 0), floors on possibly negative halves).
std::int64_t closed_form_count_c(int bss, int ues);
// C_L(N) = c_1(N) + sum_{i=0}^{N-1} sum_{k=2}^{L-1} c_k(N - i); needs c_k
// for k <= L-1, so L is limited to 1..5.
std::int64_t closed_form_occupancy(int bss, int ues);
// K^L * C_L(N). Throws CapacityError on overflow.
std::int64_t closed_form_total(int bss, int channel_states, int ues);

}  // namespace mmw
