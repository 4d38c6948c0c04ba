#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/rng.hpp"

namespace mmw {

// Quantized link state. For the default three-state model the ordinals are
// outage = 0, NLOS = 1, LOS = 2; a larger ordinal is always a better link.
struct ChannelState {
  std::uint8_t value = 0;

  constexpr ChannelState() = default;
  constexpr explicit ChannelState(int v) : value(static_cast<std::uint8_t>(v)) {}
  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(ChannelState, ChannelState) = default;
};

inline constexpr ChannelState kOutage{0};
inline constexpr ChannelState kNlos{1};
inline constexpr ChannelState kLos{2};

// K x K row-stochastic transition matrix shared by every UE-BS link.
// Immutable once built; the constructor validates and, for rows that miss
// unit sum by at most 1e-9, renormalizes.
class ChannelMatrix {
 public:
  static constexpr double kRenormalizeTolerance = 1e-9;

  ChannelMatrix(std::size_t k, std::vector<double> row_major);
  static ChannelMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static ChannelMatrix identity(std::size_t k);

  std::size_t states() const { return k_; }
  double operator()(std::size_t from, std::size_t to) const { return p_[from * k_ + to]; }
  std::span<const double> row(std::size_t from) const {
    return {p_.data() + from * k_, k_};
  }
  std::span<const double> data() const { return p_; }

  // FNV-1a over the shortest round-trip decimal form of every entry.
  std::uint64_t hash() const;

  friend bool operator==(const ChannelMatrix&, const ChannelMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<double> p_;
};

// Named matrices shipped with the library.
// "urban-nlos-dominant": the 3-state urban matrix where NLOS dominates,
// rows/columns ordered (outage, NLOS, LOS).
ChannelMatrix channel_preset(std::string_view name);
std::vector<std::string> channel_preset_names();

struct CalibrationTargets {
  std::vector<double> pi_target;
  // Mean holding time per state, in slots, indexed like ChannelState.
  std::vector<double> t_avg;
};

struct CalibrationResult {
  ChannelMatrix matrix;
  double objective;  // sum_k (P_kk - (1 - 1/t_avg[k]))^2
  double residual;   // worst violation over stationarity, row sums, P >= 0
};

// Stationary distribution pi with pi P = pi. Throws ValidationError for a
// non-stochastic matrix and DegeneracyError when pi is not unique.
std::vector<double> steady_state(const ChannelMatrix& p);

// Least-squares fit of diag(P) to 1 - 1/t_avg subject to pi_target P =
// pi_target, P >= 0 and unit row sums.
CalibrationResult calibrate_matrix(const CalibrationTargets& targets);

// Inverse-CDF draw of the next state from row `current` given u in [0, 1).
ChannelState sample_transition(ChannelState current, const ChannelMatrix& p, double u);

inline ChannelState sample_transition(ChannelState current, const ChannelMatrix& p,
                                      const CounterRng& rng,
                                      std::initializer_list<std::uint64_t> counters) {
  return sample_transition(current, p, rng.uniform(counters));
}

// Inverse-CDF draw from an arbitrary probability vector.
ChannelState sample_state(std::span<const double> probs, double u);

// Mean sojourn time 1 / (1 - P_kk) in slots.
double holding_time_mean(const ChannelMatrix& p, ChannelState k);

}  // namespace mmw
