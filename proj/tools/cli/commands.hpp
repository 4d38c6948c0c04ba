#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "experiment_config.hpp"
#include "mmw/policy_io.hpp"
#include "mmw/simulator.hpp"

namespace mmw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the mmwave-mdp executable. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Where the converged profile for (N, OH) lives in the cache.
std::filesystem::path policy_path(const ExperimentConfig& cfg, int ues, double oh);

struct SolveJob {
  int ues = 0;
  double oh = 0.0;
  std::filesystem::path policy;
  std::filesystem::path log;
  bool converged = false;
  int iterations = 0;
  std::size_t states = 0;
};

// One converge() per (N, OH) pair, parallel across pairs. Writes the policy
// file and a CSV iteration log for each.
std::vector<SolveJob> solve_all(const ExperimentConfig& cfg);

// Loads the cached profile, checking it was solved for exactly this model.
MdpPolicySet load_cached_policy(const ExperimentConfig& cfg, int ues, double oh);

// Runs every (N, OH, scheme) of the config. Does not write anything.
std::vector<SweepRow> simulate_all(const ExperimentConfig& cfg);

}  // namespace mmw::cli
