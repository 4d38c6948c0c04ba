#include "mmw/policy_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mmw/error.hpp"

namespace mmw {
namespace {

constexpr const char* kMagic = "mmwave-mdp-policy";
constexpr int kVersion = 1;

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("policy file truncated before '" + key + "'");
  std::istringstream ss(line);
  std::string got;
  ss >> got;
  if (got != key) throw ValidationError("policy file: expected '" + key + "', found '" + got + "'");
  std::string rest;
  std::getline(ss, rest);
  return rest;
}

template <typename T>
T parse_one(const std::string& text, const std::string& key) {
  std::istringstream ss(text);
  T value{};
  if (!(ss >> value)) throw ValidationError("policy file: bad value for '" + key + "'");
  return value;
}

}  // namespace

PolicyHeader PolicyHeader::for_model(const MultiUserModel& model, bool converged) {
  PolicyHeader h;
  h.bss = model.bss();
  h.channel_states = model.space.channel_states();
  h.ues = model.ues();
  h.omega = model.solver.omega;
  h.epsilon = model.solver.epsilon;
  h.oh = model.oh;
  h.reward_load = model.reward_load;
  h.rates.assign(model.rates.values().begin(), model.rates.values().end());
  h.channel_hash = model.channel.hash();
  h.states = model.space.size();
  h.converged = converged;
  return h;
}

std::uint64_t PolicyHeader::key() const {
  std::ostringstream ss;
  ss << bss << ';' << channel_states << ';' << ues << ';' << fmt_double(omega) << ';'
     << fmt_double(epsilon) << ';' << fmt_double(oh) << ';' << reward_load_name(reward_load) << ';';
  for (double r : rates) ss << fmt_double(r) << ',';
  ss << ';' << channel_hash;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : ss.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_policy(std::ostream& out, const PolicyFile& file) {
  const auto& h = file.header;
  if (file.profile.ues() != static_cast<std::size_t>(h.ues))
    throw ValidationError("policy profile size does not match header");
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(h.channel_hash));
  out << kMagic << ' ' << kVersion << '\n'
      << "bss " << h.bss << '\n'
      << "channel_states " << h.channel_states << '\n'
      << "ues " << h.ues << '\n'
      << "omega " << fmt_double(h.omega) << '\n'
      << "epsilon " << fmt_double(h.epsilon) << '\n'
      << "oh " << fmt_double(h.oh) << '\n'
      << "reward_load " << reward_load_name(h.reward_load) << '\n'
      << "rates";
  for (double r : h.rates) out << ' ' << fmt_double(r);
  out << '\n'
      << "channel_hash " << hash << '\n'
      << "states " << h.states << '\n'
      << "converged " << (h.converged ? 1 : 0) << '\n';
  for (std::size_t ue = 0; ue < file.profile.ues(); ++ue) {
    const auto& actions = file.profile.policies[ue].actions;
    if (actions.size() != h.states) throw ValidationError("policy length does not match header");
    out << "ue " << ue;
    for (Action a : actions) out << ' ' << static_cast<int>(a);
    out << '\n';
  }
}

PolicyFile read_policy(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic)
    throw ValidationError("not a policy file (missing magic line)");
  if (version != kVersion)
    throw ValidationError("unsupported policy file version " + std::to_string(version));
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');

  PolicyFile file;
  auto& h = file.header;
  h.bss = parse_one<int>(expect_line(in, "bss"), "bss");
  h.channel_states = parse_one<int>(expect_line(in, "channel_states"), "channel_states");
  h.ues = parse_one<int>(expect_line(in, "ues"), "ues");
  h.omega = parse_one<double>(expect_line(in, "omega"), "omega");
  h.epsilon = parse_one<double>(expect_line(in, "epsilon"), "epsilon");
  h.oh = parse_one<double>(expect_line(in, "oh"), "oh");
  h.reward_load = parse_reward_load(parse_one<std::string>(expect_line(in, "reward_load"), "reward_load"));
  {
    std::istringstream ss(expect_line(in, "rates"));
    double r;
    while (ss >> r) h.rates.push_back(r);
  }
  {
    std::istringstream ss(expect_line(in, "channel_hash"));
    if (!(ss >> std::hex >> h.channel_hash)) throw ValidationError("policy file: bad channel_hash");
  }
  h.states = parse_one<std::size_t>(expect_line(in, "states"), "states");
  h.converged = parse_one<int>(expect_line(in, "converged"), "converged") != 0;
  if (h.bss < 1 || h.ues < 1 || h.channel_states < 1)
    throw ValidationError("policy file: dimensions must be positive");

  for (int ue = 0; ue < h.ues; ++ue) {
    std::istringstream ss(expect_line(in, "ue"));
    int index = -1;
    ss >> index;
    if (index != ue) throw ValidationError("policy file: UE lines out of order");
    DeterministicPolicy p;
    p.actions.reserve(h.states);
    int a;
    while (ss >> a) {
      if (a < 0 || a >= h.bss) throw ValidationError("policy file: action out of range");
      p.actions.push_back(static_cast<Action>(a));
    }
    if (p.actions.size() != h.states)
      throw ValidationError("policy file: UE " + std::to_string(ue) + " has " +
                            std::to_string(p.actions.size()) + " actions, expected " +
                            std::to_string(h.states));
    file.profile.policies.push_back(std::move(p));
  }
  return file;
}

void save_policy(const std::filesystem::path& path, const PolicyFile& file) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write policy file " + path.string());
  write_policy(out, file);
  if (!out) throw Error("failed writing policy file " + path.string());
}

PolicyFile load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open policy file " + path.string());
  return read_policy(in);
}

std::string_view reward_load_name(RewardLoad load) {
  return load == RewardLoad::kPreviousSlot ? "previous" : "destination";
}

RewardLoad parse_reward_load(std::string_view name) {
  if (name == "previous") return RewardLoad::kPreviousSlot;
  if (name == "destination") return RewardLoad::kDestination;
  throw ValidationError("unknown reward load model '" + std::string(name) +
                        "' (expected previous or destination)");
}

std::string policy_file_name(const PolicyHeader& header) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "policy_L%d_K%d_N%d_%016llx.txt", header.bss,
                header.channel_states, header.ues, static_cast<unsigned long long>(header.key()));
  return buf;
}

}  // namespace mmw
