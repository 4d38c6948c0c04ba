#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmw/baselines.hpp"
#include "mmw/error.hpp"
#include "mmw/mdp.hpp"
#include "mmw/multiuser.hpp"
#include "mmw/policy_io.hpp"
#include "mmw/simulator.hpp"

namespace mmw::cli {

// Problems with the configuration itself; the CLI exits with status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  // [model]
  int bss = 3;
  int channel_states = 3;
  std::string preset = "urban-nlos-dominant";
  std::vector<double> channel;  // inline row-major matrix; overrides preset
  std::vector<double> rates = {0.0, 1.0, 4.0};
  std::vector<double> oh = {0.10};
  std::string reward_load = "destination";

  // [solver]
  double omega = 0.9;
  double epsilon = 1e-6;
  int max_sweeps = 10'000;
  int max_outer = 0;  // 0 = 50 * N
  std::uint64_t init_seed = 1;

  // [simulation]
  std::vector<int> ues = {3};
  std::int64_t slots = 100'000;
  std::int64_t warmup = 1'000;
  int seeds = 20;
  std::uint64_t first_seed = 1;
  int threads = 1;
  bool ub_charges_oh = true;
  bool decide_before_transition = true;
  double bandwidth_hz = 1e9;
  double slot_seconds = 125e-6;
  int symbols_per_slot = 30;
  int data_symbols = 24;
  std::vector<std::string> schemes = {"mdp", "load", "rate", "channel", "upper"};

  // [output]
  std::filesystem::path out = "results";
  std::filesystem::path cache = "policy-cache";

  ChannelMatrix channel_matrix() const;
  RateTable rate_table() const;
  SolverParams solver() const;
  RewardLoad reward_load_model() const;
  std::vector<Scheme> scheme_list() const;
  int outer_limit(int ues) const { return max_outer > 0 ? max_outer : 50 * ues; }

  MultiUserModel model(int ues, double oh) const;
  SimConfig sim_config(int ues, double oh) const;

  // Every check that does not need to run anything; throws ConfigError.
  // Without `model`, the channel matrix and rate table are not checked.
  void validate(bool model = true) const;

  nlohmann::json to_json() const;
  // FNV-1a of the JSON form without runtime-only fields (threads, paths).
  std::uint64_t hash() const;
};

// Reads an INI file with [model], [solver], [simulation] and [output]
// sections into `cfg`, leaving keys that are absent untouched.
void load_config_file(const std::filesystem::path& path, ExperimentConfig& cfg);

// "3,4, 5" -> {3, 4, 5}
std::vector<std::string> split_list(const std::string& text);
std::vector<double> parse_doubles(const std::string& text);
std::vector<int> parse_ints(const std::string& text);

}  // namespace mmw::cli
