#include "mmw/simulator.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "mmw/error.hpp"
#include "mmw/rng.hpp"

namespace mmw {
namespace {

enum Stream : std::uint64_t { kInit = 1, kEvolve = 2, kLoadTie = 3, kMdpTie = 4 };

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void check_mdp(const SimConfig& config, const MdpPolicySet* mdp) {
  if (!mdp) throw ValidationError("scheme mdp needs a policy set");
  const auto& space = mdp->space;
  if (space.bss() != config.bss || space.channel_states() != config.channel_states ||
      space.ues() != config.ues)
    throw ValidationError("MDP policies were solved for a different (L, K, N)");
  if (mdp->profile.ues() != static_cast<std::size_t>(config.ues))
    throw ValidationError("MDP policy profile has the wrong number of UEs");
  for (const auto& p : mdp->profile.policies)
    if (p.size() != space.size()) throw ValidationError("MDP policy does not cover the state space");
}

}  // namespace

std::vector<std::uint64_t> SimConfig::default_seeds(std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = i + 1;
  return s;
}

void SimConfig::validate() const {
  if (bss < 1 || ues < 1) throw ValidationError("need at least one BS and one UE");
  if (channel.states() != static_cast<std::size_t>(channel_states))
    throw ValidationError("channel matrix size does not match channel_states");
  if (rates.states() != channel.states())
    throw ValidationError("rate table size does not match the channel matrix");
  if (!(oh >= 0.0 && oh <= 1.0)) throw ValidationError("handover cost must be in [0,1]");
  if (warmup < 0 || slots <= warmup) throw ValidationError("need slots > warmup >= 0");
  if (seeds.empty()) throw ValidationError("need at least one seed");
  if (!initial_distribution.empty()) {
    if (initial_distribution.size() != channel.states())
      throw ValidationError("initial distribution size does not match the channel matrix");
    double sum = 0.0;
    for (double x : initial_distribution) {
      if (!(x >= 0.0)) throw ValidationError("initial distribution entries must be >= 0");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("initial distribution must sum to 1");
  }
  if (symbols_per_slot < 1 || data_symbols < 0 || data_symbols > symbols_per_slot)
    throw ValidationError("need 0 <= data_symbols <= symbols_per_slot");
  if (!(bandwidth_hz > 0.0) || !(slot_seconds > 0.0))
    throw ValidationError("bandwidth and slot duration must be positive");
}

Summary summarize(std::span<const double> samples) {
  Summary s;
  const auto n = samples.size();
  if (n == 0) return s;
  for (double x : samples) s.mean += x;
  s.mean /= static_cast<double>(n);
  if (n < 2) return s;
  double ss = 0.0;
  for (double x : samples) ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  boost::math::students_t dist(static_cast<double>(n - 1));
  s.ci95 = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
  return s;
}

namespace {
Summary summarize_by(const Metrics& m, double (*metric)(const SeedMetrics&)) {
  std::vector<double> v;
  for (const auto& s : m.per_seed) v.push_back(metric(s));
  return summarize(v);
}
}  // namespace

Summary Metrics::se() const { return summarize_by(*this, se_of); }
Summary Metrics::handovers() const { return summarize_by(*this, handovers_of); }
Summary Metrics::handover_rate() const {
  return summarize_by(*this, [](const SeedMetrics& m) { return m.handovers_per_ue_per_kslot; });
}

Summary paired_difference(const Metrics& a, const Metrics& b,
                          double (*metric)(const SeedMetrics&)) {
  if (a.per_seed.size() != b.per_seed.size())
    throw ValidationError("paired comparison needs the same seeds");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.per_seed.size(); ++i) {
    if (a.per_seed[i].seed != b.per_seed[i].seed)
      throw ValidationError("paired comparison needs the same seeds");
    d.push_back(metric(a.per_seed[i]) - metric(b.per_seed[i]));
  }
  return summarize(d);
}

SeedMetrics run_seed(const SimConfig& config, Scheme scheme, const MdpPolicySet* mdp,
                     std::uint64_t seed, const SlotObserver& observer) {
  config.validate();
  if (scheme == Scheme::kMdp) check_mdp(config, mdp);

  const auto n = static_cast<std::size_t>(config.ues);
  const auto l = static_cast<std::size_t>(config.bss);
  const CounterRng rng(seed);
  const auto stationary = config.initial_distribution.empty() ? steady_state(config.channel)
                                                               : config.initial_distribution;

  // channels[ue * L + b]
  std::vector<ChannelState> channels(n * l);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t b = 0; b < l; ++b)
      channels[k * l + b] = sample_state(stationary, rng.uniform({kInit, k, b}));

  std::vector<std::size_t> serving(n);
  std::vector<int> loads(l, 0);
  for (std::size_t k = 0; k < n; ++k) {
    serving[k] = channel_policy(std::span<const ChannelState>(channels).subspan(k * l, l));
    ++loads[serving[k]];
  }

  std::vector<ChannelState> observed(n * l);
  std::vector<std::size_t> choice(n);
  std::vector<int> excl(l);
  std::vector<Connection> by_bs(l);
  std::vector<int> next_loads(l);
  std::vector<std::size_t> tied;
  JointObservation joint{n, l, {}, {}};

  auto evolve = [&](std::int64_t t) {
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t b = 0; b < l; ++b)
        channels[k * l + b] = sample_transition(channels[k * l + b], config.channel, rng,
                                                {kEvolve, k, b, static_cast<std::uint64_t>(t)});
  };

  double se_sum = 0.0;
  std::int64_t handovers = 0;
  for (std::int64_t t = 1; t <= config.slots; ++t) {
    if (!config.decide_before_transition) evolve(t);
    observed = channels;
    if (config.decide_before_transition) evolve(t);

    if (scheme == Scheme::kUpper) {
      joint.channels = channels;
      joint.loads = loads;
      choice = upper_bound_assignment(joint, config.rates, config.oh, serving, config.ub_charges_oh);
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        auto row = std::span<const ChannelState>(observed).subspan(k * l, l);
        for (std::size_t b = 0; b < l; ++b) excl[b] = loads[b] - (b == serving[k] ? 1 : 0);
        switch (scheme) {
          case Scheme::kLoad:
            choice[k] = load_policy(excl, rng.uniform({kLoadTie, k, static_cast<std::uint64_t>(t)}));
            break;
          case Scheme::kRate:
            choice[k] = rate_policy(row, excl, config.rates);
            break;
          case Scheme::kChannel:
            choice[k] = channel_policy(row);
            break;
          case Scheme::kMdp: {
            for (std::size_t b = 0; b < l; ++b)
              by_bs[b] = Connection{row[b], static_cast<std::uint16_t>(loads[b])};
            const auto view = canonical_view(by_bs, serving[k]);
            const Action a = mdp->profile.policies[k](mdp->space.index_of(view.state));
            if (a == 0) {
              choice[k] = serving[k];
              break;
            }
            // Neighbors equal to the chosen connection are interchangeable.
            tied.clear();
            for (std::size_t b = 0; b < l; ++b)
              if (b != serving[k] && by_bs[b] == view.state[a]) tied.push_back(b);
            choice[k] = tied[static_cast<std::size_t>(
                rng.below(tied.size(), {kMdpTie, k, static_cast<std::uint64_t>(t)}))];
            break;
          }
          case Scheme::kUpper:
            break;
        }
      }
    }

    std::fill(next_loads.begin(), next_loads.end(), 0);
    for (std::size_t k = 0; k < n; ++k) ++next_loads[choice[k]];
    const bool measured = t > config.warmup;
    for (std::size_t k = 0; k < n; ++k) {
      const bool moved = choice[k] != serving[k];
      const double cost = moved ? config.oh : 0.0;
      if (measured) {
        se_sum += (1.0 - cost) * config.rates(channels[k * l + choice[k]]) / next_loads[choice[k]];
        handovers += moved ? 1 : 0;
      }
      serving[k] = choice[k];
    }
    loads = next_loads;
    if (measured && observer) observer(t, loads);
  }

  SeedMetrics m;
  m.seed = seed;
  m.measured_slots = config.slots - config.warmup;
  const double ue_slots = static_cast<double>(n) * static_cast<double>(m.measured_slots);
  m.avg_se = se_sum / ue_slots;
  m.handovers = handovers;
  m.handovers_per_ue_per_kslot = 1000.0 * static_cast<double>(handovers) / ue_slots;
  return m;
}

Metrics run(const SimConfig& config, Scheme scheme, const MdpPolicySet* mdp, int threads) {
  config.validate();
  if (scheme == Scheme::kMdp) check_mdp(config, mdp);
  Metrics metrics;
  metrics.scheme = scheme;
  metrics.per_seed.resize(config.seeds.size());

  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i)
      metrics.per_seed[i] = run_seed(config, scheme, mdp, config.seeds[i]);
    return metrics;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
        try {
          metrics.per_seed[i] = run_seed(config, scheme, mdp, config.seeds[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return metrics;
}

std::vector<SweepRow> sweep(std::span<const SimConfig> configs, std::span<const Scheme> schemes,
                            const PolicyLookup& lookup, int threads) {
  std::vector<SweepRow> rows;
  for (const auto& config : configs) {
    const std::size_t first = rows.size();
    std::optional<double> channel_se;
    for (Scheme scheme : schemes) {
      const MdpPolicySet* mdp = scheme == Scheme::kMdp ? &lookup(config) : nullptr;
      SweepRow row{config, run(config, scheme, mdp, threads), std::nullopt};
      if (scheme == Scheme::kChannel) channel_se = row.metrics.se().mean;
      rows.push_back(std::move(row));
    }
    if (channel_se && *channel_se > 0.0)
      for (std::size_t i = first; i < rows.size(); ++i)
        rows[i].gain_vs_channel = (rows[i].metrics.se().mean - *channel_se) / *channel_se;
  }
  return rows;
}

double throughput(double se, const SimConfig& config) {
  return se * config.bandwidth_hz * static_cast<double>(config.data_symbols) /
         static_cast<double>(config.symbols_per_slot);
}

namespace {
void write_key(std::ostream& out, const SweepRow& row) {
  out << scheme_name(row.metrics.scheme) << ',' << row.config.bss << ',' << row.config.channel_states
      << ',' << row.config.ues << ',' << fmt(row.config.oh);
}
}  // namespace

void write_raw_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "scheme,L,K,N,oh,seed,avg_se_bits_per_s_per_hz,handovers_total,"
         "handovers_per_ue_per_kslot,slots\n";
  for (const auto& row : rows) {
    for (const auto& s : row.metrics.per_seed) {
      write_key(out, row);
      out << ',' << s.seed << ',' << fmt(s.avg_se) << ',' << s.handovers << ','
          << fmt(s.handovers_per_ue_per_kslot) << ',' << s.measured_slots << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "scheme,L,K,N,oh,seeds,slots,mean,ci95_halfwidth,handovers_mean,"
         "handovers_ci95_halfwidth,handovers_per_ue_per_kslot_mean,throughput_bits_per_s,"
         "gain_vs_channel\n";
  for (const auto& row : rows) {
    const auto se = row.metrics.se();
    const auto ho = row.metrics.handovers();
    const auto rate = row.metrics.handover_rate();
    write_key(out, row);
    out << ',' << row.metrics.per_seed.size() << ',' << row.config.slots - row.config.warmup << ','
        << fmt(se.mean) << ',' << fmt(se.ci95) << ',' << fmt(ho.mean) << ',' << fmt(ho.ci95) << ','
        << fmt(rate.mean) << ',' << fmt(throughput(se.mean, row.config)) << ','
        << (row.gain_vs_channel ? fmt(*row.gain_vs_channel) : std::string()) << '\n';
  }
}

void write_plot_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "scheme,L,K,N,oh,metric,value,ci95_halfwidth\n";
  for (const auto& row : rows) {
    const auto se = row.metrics.se();
    const auto ho = row.metrics.handovers();
    write_key(out, row);
    out << ",avg_se," << fmt(se.mean) << ',' << fmt(se.ci95) << '\n';
    write_key(out, row);
    out << ",handovers," << fmt(ho.mean) << ',' << fmt(ho.ci95) << '\n';
    if (row.gain_vs_channel) {
      write_key(out, row);
      out << ",gain_vs_channel," << fmt(*row.gain_vs_channel) << ",\n";
    }
  }
}

}  // namespace mmw
