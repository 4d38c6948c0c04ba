#include "mmw/state_space.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mmw/error.hpp"

namespace mmw {
namespace {

bool neighbor_before(const Connection& a, const Connection& b) { return b < a; }

void validate_dims(int bss, int channel_states, int ues) {
  if (bss < 1 || bss > 255) throw ValidationError("number of BSs must be in 1..255");
  if (channel_states < 1 || channel_states > 255)
    throw ValidationError("number of channel states must be in 1..255");
  if (ues < 1 || ues > 65535) throw ValidationError("number of UEs must be in 1..65535");
}

std::int64_t floor_half(std::int64_t x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }
std::int64_t q(std::int64_t x) { return std::max<std::int64_t>(x, 0); }

}  // namespace

int SystemState::total_load() const {
  int total = 0;
  for (const auto& c : connections_) total += c.load;
  return total;
}

OccupancyState occupancy_of(const SystemState& s) {
  OccupancyState o;
  for (const auto& c : s.connections()) o.loads.push_back(c.load);
  std::sort(o.loads.begin(), o.loads.end(), std::greater<>());
  return o;
}

SystemState canonicalize(const Connection& serving, std::span<const Connection> neighbors,
                         int ues) {
  if (serving.load < 1)
    throw ValidationError("serving BS load must count the tagged UE (>= 1)");
  int total = serving.load;
  for (const auto& c : neighbors) total += c.load;
  if (total != ues)
    throw ValidationError("connection loads sum to " + std::to_string(total) + ", expected " +
                          std::to_string(ues));
  std::vector<Connection> conns;
  conns.reserve(neighbors.size() + 1);
  conns.push_back(serving);
  conns.insert(conns.end(), neighbors.begin(), neighbors.end());
  std::sort(conns.begin() + 1, conns.end(), neighbor_before);
  return SystemState(std::move(conns));
}

bool is_canonical(const SystemState& s) {
  auto n = s.neighbors();
  return s.bss() > 0 && s.serving().load >= 1 &&
         std::is_sorted(n.begin(), n.end(), neighbor_before);
}

CanonicalView canonical_view(std::span<const Connection> by_bs, std::size_t serving_bs) {
  CanonicalView view;
  view.bs_at.reserve(by_bs.size());
  view.bs_at.push_back(static_cast<std::uint8_t>(serving_bs));
  for (std::size_t b = 0; b < by_bs.size(); ++b)
    if (b != serving_bs) view.bs_at.push_back(static_cast<std::uint8_t>(b));
  std::stable_sort(view.bs_at.begin() + 1, view.bs_at.end(),
                   [&](std::uint8_t x, std::uint8_t y) { return by_bs[y] < by_bs[x]; });
  std::vector<Connection> conns;
  conns.reserve(by_bs.size());
  for (auto b : view.bs_at) conns.push_back(by_bs[b]);
  view.state = SystemState(std::move(conns));
  return view;
}

std::optional<std::size_t> StateSpace::find(const SystemState& s) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), s);
  if (it == states_.end() || !(*it == s)) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

std::size_t StateSpace::index_of(const SystemState& s) const {
  if (auto i = find(s)) return *i;
  throw ValidationError("state is not a canonical member of the state space");
}

StateSpace enumerate(int bss, int channel_states, int ues, std::size_t cap) {
  validate_dims(bss, channel_states, ues);
  StateSpace space;
  space.bss_ = bss;
  space.channel_states_ = channel_states;
  space.ues_ = ues;

  std::vector<Connection> current(static_cast<std::size_t>(bss));
  // Fill neighbor positions [pos, L) with a non-increasing sequence whose
  // loads add up to `remaining`.
  auto fill = [&](auto&& self, std::size_t pos, int remaining, Connection bound) -> void {
    if (pos == current.size()) {
      if (remaining != 0) return;
      if (space.states_.size() >= cap)
        throw CapacityError("state space exceeds cap of " + std::to_string(cap) + " states");
      space.states_.emplace_back(current);
      return;
    }
    const bool last = pos + 1 == current.size();
    for (int ch = 0; ch < channel_states; ++ch) {
      for (int load = last ? remaining : 0; load <= remaining; ++load) {
        Connection c{ChannelState(ch), static_cast<std::uint16_t>(load)};
        if (bound < c) break;
        current[pos] = c;
        self(self, pos + 1, remaining - load, c);
      }
    }
  };

  const Connection top{ChannelState(channel_states - 1), static_cast<std::uint16_t>(ues)};
  for (int ch = 0; ch < channel_states; ++ch) {
    for (int load = 1; load <= ues; ++load) {
      current[0] = Connection{ChannelState(ch), static_cast<std::uint16_t>(load)};
      fill(fill, 1, ues - load, top);
    }
  }
  std::sort(space.states_.begin(), space.states_.end());
  return space;
}

std::int64_t closed_form_count_c(int bss, int ues) {
  const std::int64_t n = ues;
  switch (bss) {
    case 1:
      return n + 1;
    case 2:
      return floor_half(n);
    case 3: {
      std::int64_t sum = 0;
      for (std::int64_t i = 0; i <= n - 1; ++i) sum += q(floor_half(n - 1 - i) - i);
      return sum;
    }
    case 4: {
      std::int64_t sum = 0;
      for (std::int64_t i = 0; i <= n - 1; ++i) {
        std::int64_t inner = 0;
        for (std::int64_t j = 0; j <= n - 1; ++j) inner += q(floor_half(n - 1 - j) - j);
        for (std::int64_t k = 0; k <= i - 1; ++k) inner -= q(floor_half(n - 2 - i - k) - k);
        sum += inner;
      }
      return sum;
    }
    default:
      throw UnsupportedError("closed-form occupancy count is only available for 1..4 BSs");
  }
}

std::int64_t closed_form_occupancy(int bss, int ues) {
  if (bss < 1 || bss > 5)
    throw UnsupportedError("closed-form state count is only available for 1..5 BSs");
  if (ues < 0) throw ValidationError("number of UEs must be >= 0");
  std::int64_t total = closed_form_count_c(1, ues);
  for (int i = 0; i <= ues - 1; ++i)
    for (int k = 2; k <= bss - 1; ++k) total += closed_form_count_c(k, ues - i);
  return total;
}

std::int64_t closed_form_total(int bss, int channel_states, int ues) {
  if (channel_states < 1) throw ValidationError("number of channel states must be >= 1");
  std::int64_t total = closed_form_occupancy(bss, ues);
  for (int i = 0; i < bss; ++i)
    if (__builtin_mul_overflow(total, static_cast<std::int64_t>(channel_states), &total))
      throw CapacityError("closed-form state count overflows 64 bits");
  return total;
}

}  // namespace mmw
