#pragma once

#include <span>
#include <vector>

#include "mmw/channel_model.hpp"

namespace mmw {

// Spectral efficiency (bits/s/Hz) a UE gets from a BS when it is alone in the
// cell, one entry per channel state. Outage is pinned at 0 and entries are
// nondecreasing in the channel ordinal.
class RateTable {
 public:
  explicit RateTable(std::vector<double> per_state);
  // Three-state table (outage, NLOS, LOS).
  static RateTable three_state(double nlos, double los) { return RateTable({0.0, nlos, los}); }
  static RateTable defaults() { return three_state(1.0, 4.0); }

  double operator()(ChannelState s) const { return rates_[s.index()]; }
  std::size_t states() const { return rates_.size(); }
  std::span<const double> values() const { return rates_; }

  friend bool operator==(const RateTable&, const RateTable&) = default;

 private:
  std::vector<double> rates_;
};

}  // namespace mmw
