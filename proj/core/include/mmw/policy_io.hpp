#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/multiuser.hpp"

namespace mmw {

// Everything a converged profile depends on. Two solves with equal headers
// produce interchangeable policy files.
struct PolicyHeader {
  int bss = 0;
  int channel_states = 0;
  int ues = 0;
  double omega = 0.0;
  double epsilon = 0.0;
  double oh = 0.0;
  RewardLoad reward_load = RewardLoad::kDestination;
  std::vector<double> rates;
  std::uint64_t channel_hash = 0;
  std::size_t states = 0;
  bool converged = false;

  static PolicyHeader for_model(const MultiUserModel& model, bool converged);
  // Hash over every field except `converged` and `states`.
  std::uint64_t key() const;
  bool same_model(const PolicyHeader& other) const { return key() == other.key(); }
};

struct PolicyFile {
  PolicyHeader header;
  PolicyProfile profile;
};

// Text format, version 1:
//   mmwave-mdp-policy 1
//   bss <L> / channel_states <K> / ues <N> / omega / epsilon / oh
//   reward_load <previous|destination>
//   rates <r_0> ... <r_{K-1}> / channel_hash <hex> / states <|S|> / converged <0|1>
//   ue <i> <a_0> <a_1> ...        (one line per UE, actions by state index)
void write_policy(std::ostream& out, const PolicyFile& file);
PolicyFile read_policy(std::istream& in);

void save_policy(const std::filesystem::path& path, const PolicyFile& file);
PolicyFile load_policy(const std::filesystem::path& path);

// Cache file name for a header, e.g. "policy_L3_K3_N3_<key>.txt".
std::string policy_file_name(const PolicyHeader& header);

std::string_view reward_load_name(RewardLoad load);
// Accepts previous | destination.
RewardLoad parse_reward_load(std::string_view name);

}  // namespace mmw
