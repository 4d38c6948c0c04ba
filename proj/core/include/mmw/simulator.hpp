#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mmw/baselines.hpp"
#include "mmw/channel_model.hpp"
#include "mmw/multiuser.hpp"
#include "mmw/rates.hpp"
#include "mmw/state_space.hpp"

namespace mmw {

struct SimConfig {
  int bss = 3;
  int channel_states = 3;
  int ues = 3;
  ChannelMatrix channel = channel_preset("urban-nlos-dominant");
  RateTable rates = RateTable::defaults();
  double oh = 0.10;
  std::int64_t slots = 100'000;  // total, warmup included
  std::int64_t warmup = 1'000;
  std::vector<std::uint64_t> seeds = default_seeds(20);
  // Distribution of every link at slot 0; the channel's stationary
  // distribution when empty.
  std::vector<double> initial_distribution;
  bool ub_charges_oh = true;
  // UEs decide on the channels of the previous slot and are served on the
  // channels after this slot's transition. When false, links move first and
  // decisions see the fresh channels.
  bool decide_before_transition = true;

  double bandwidth_hz = 1e9;
  double slot_seconds = 125e-6;
  int symbols_per_slot = 30;
  int data_symbols = 24;

  static std::vector<std::uint64_t> default_seeds(std::size_t count);
  void validate() const;
};

// Converged MDP policies together with the state space they index.
struct MdpPolicySet {
  StateSpace space;
  PolicyProfile profile;
};

struct SeedMetrics {
  std::uint64_t seed = 0;
  double avg_se = 0.0;  // bits/s/Hz per UE per measured slot
  std::int64_t handovers = 0;
  double handovers_per_ue_per_kslot = 0.0;
  std::int64_t measured_slots = 0;
};

struct Summary {
  double mean = 0.0;
  double ci95 = 0.0;  // Student-t half-width; 0 with fewer than two samples
};
Summary summarize(std::span<const double> samples);

struct Metrics {
  Scheme scheme = Scheme::kChannel;
  std::vector<SeedMetrics> per_seed;

  Summary se() const;
  Summary handovers() const;
  Summary handover_rate() const;
};

// Mean and CI half-width of the per-seed difference a - b (same seeds).
Summary paired_difference(const Metrics& a, const Metrics& b,
                          double (*metric)(const SeedMetrics&));
inline double se_of(const SeedMetrics& m) { return m.avg_se; }
inline double handovers_of(const SeedMetrics& m) { return static_cast<double>(m.handovers); }

// Observer called once per measured slot with the realized loads; used by
// tests to check load conservation.
using SlotObserver = std::function<void(std::int64_t slot, std::span<const int> loads)>;

SeedMetrics run_seed(const SimConfig& config, Scheme scheme, const MdpPolicySet* mdp,
                     std::uint64_t seed, const SlotObserver& observer = {});

// Runs every configured seed, `threads` at a time. The result does not depend
// on the thread count.
Metrics run(const SimConfig& config, Scheme scheme, const MdpPolicySet* mdp = nullptr,
            int threads = 1);

struct SweepRow {
  SimConfig config;
  Metrics metrics;
  std::optional<double> gain_vs_channel;  // (SE - SE_channel) / SE_channel
};

using PolicyLookup = std::function<const MdpPolicySet&(const SimConfig&)>;

// Cross product of configs and schemes, one row per pair in that order.
std::vector<SweepRow> sweep(std::span<const SimConfig> configs, std::span<const Scheme> schemes,
                            const PolicyLookup& lookup, int threads = 1);

// se * bandwidth * data_symbols / symbols_per_slot, in bits/s.
double throughput(double se, const SimConfig& config);

void write_raw_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_aggregate_csv(std::ostream& out, std::span<const SweepRow> rows);
// Long format: scheme,L,K,N,oh,metric,value,ci95_halfwidth
void write_plot_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace mmw
