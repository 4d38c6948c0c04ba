#include "experiment_config.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace mmw::cli {
namespace {

template <typename T>
T convert(const std::string& key, const std::string& text) {
  std::istringstream ss(text);
  T value{};
  ss >> value;
  std::string rest;
  if (ss.fail() || (ss >> rest))
    throw ConfigError("config: bad value '" + text + "' for " + key);
  return value;
}

bool convert_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config: bad boolean '" + text + "' for " + key);
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == ';' || c == '[' || c == ']') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(convert<double>("list", s));
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) out.push_back(convert<int>("list", s));
  return out;
}

void load_config_file(const std::filesystem::path& path, ExperimentConfig& cfg) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }

  const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
      {"model", {"bss", "channel_states", "preset", "channel", "rates", "oh", "reward_load"}},
      {"solver", {"omega", "epsilon", "max_sweeps", "max_outer", "init_seed"}},
      {"simulation", {"ues", "slots", "warmup", "seeds", "first_seed", "threads", "ub_charges_oh",
                      "decide_before_transition", "bandwidth_hz", "slot_seconds",
                      "symbols_per_slot", "data_symbols", "schemes"}},
      {"output", {"out", "cache"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = std::find_if(known.begin(), known.end(), [&](auto& k) { return k.first == section; });
    if (it == known.end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    }
  }

  auto get = [&](const char* key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '.')))
      return *v;
    return std::nullopt;
  };
  if (auto v = get("model.bss")) cfg.bss = convert<int>("model.bss", *v);
  if (auto v = get("model.channel_states")) cfg.channel_states = convert<int>("model.channel_states", *v);
  if (auto v = get("model.preset")) cfg.preset = *v;
  if (auto v = get("model.channel")) cfg.channel = parse_doubles(*v);
  if (auto v = get("model.rates")) cfg.rates = parse_doubles(*v);
  if (auto v = get("model.oh")) cfg.oh = parse_doubles(*v);
  if (auto v = get("model.reward_load")) cfg.reward_load = *v;
  if (auto v = get("solver.omega")) cfg.omega = convert<double>("solver.omega", *v);
  if (auto v = get("solver.epsilon")) cfg.epsilon = convert<double>("solver.epsilon", *v);
  if (auto v = get("solver.max_sweeps")) cfg.max_sweeps = convert<int>("solver.max_sweeps", *v);
  if (auto v = get("solver.max_outer")) cfg.max_outer = convert<int>("solver.max_outer", *v);
  if (auto v = get("solver.init_seed")) cfg.init_seed = convert<std::uint64_t>("solver.init_seed", *v);
  if (auto v = get("simulation.ues")) cfg.ues = parse_ints(*v);
  if (auto v = get("simulation.slots")) cfg.slots = convert<std::int64_t>("simulation.slots", *v);
  if (auto v = get("simulation.warmup")) cfg.warmup = convert<std::int64_t>("simulation.warmup", *v);
  if (auto v = get("simulation.seeds")) cfg.seeds = convert<int>("simulation.seeds", *v);
  if (auto v = get("simulation.first_seed"))
    cfg.first_seed = convert<std::uint64_t>("simulation.first_seed", *v);
  if (auto v = get("simulation.threads")) cfg.threads = convert<int>("simulation.threads", *v);
  if (auto v = get("simulation.ub_charges_oh"))
    cfg.ub_charges_oh = convert_bool("simulation.ub_charges_oh", *v);
  if (auto v = get("simulation.decide_before_transition"))
    cfg.decide_before_transition = convert_bool("simulation.decide_before_transition", *v);
  if (auto v = get("simulation.bandwidth_hz"))
    cfg.bandwidth_hz = convert<double>("simulation.bandwidth_hz", *v);
  if (auto v = get("simulation.slot_seconds"))
    cfg.slot_seconds = convert<double>("simulation.slot_seconds", *v);
  if (auto v = get("simulation.symbols_per_slot"))
    cfg.symbols_per_slot = convert<int>("simulation.symbols_per_slot", *v);
  if (auto v = get("simulation.data_symbols"))
    cfg.data_symbols = convert<int>("simulation.data_symbols", *v);
  if (auto v = get("simulation.schemes")) cfg.schemes = split_list(*v);
  if (auto v = get("output.out")) cfg.out = *v;
  if (auto v = get("output.cache")) cfg.cache = *v;
}

ChannelMatrix ExperimentConfig::channel_matrix() const {
  try {
    if (!channel.empty()) return ChannelMatrix(static_cast<std::size_t>(channel_states), channel);
    auto m = channel_preset(preset);
    if (m.states() != static_cast<std::size_t>(channel_states))
      throw ConfigError("preset '" + preset + "' has " + std::to_string(m.states()) +
                        " channel states, config says " + std::to_string(channel_states));
    return m;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

RateTable ExperimentConfig::rate_table() const {
  try {
    return RateTable(rates);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

SolverParams ExperimentConfig::solver() const { return {omega, epsilon, max_sweeps}; }

RewardLoad ExperimentConfig::reward_load_model() const {
  try {
    return parse_reward_load(reward_load);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<Scheme> ExperimentConfig::scheme_list() const {
  std::vector<Scheme> out;
  try {
    for (const auto& s : schemes) out.push_back(parse_scheme(s));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return out;
}

void ExperimentConfig::validate(bool model) const {
  if (bss < 1 || bss > 8) throw ConfigError("bss must be in 1..8");
  if (channel_states < 1) throw ConfigError("channel_states must be >= 1");
  if (ues.empty()) throw ConfigError("need at least one UE count");
  for (int n : ues)
    if (n < 1) throw ConfigError("UE counts must be >= 1");
  if (oh.empty()) throw ConfigError("need at least one handover cost");
  for (double o : oh)
    if (!(o >= 0.0 && o <= 1.0)) throw ConfigError("handover cost must be in [0,1]");
  if (schemes.empty()) throw ConfigError("need at least one scheme");
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (max_outer < 0) throw ConfigError("max_outer must be >= 0");
  if (!model) return;
  auto m = channel_matrix();
  auto r = rate_table();
  if (r.states() != m.states()) throw ConfigError("rates must list one value per channel state");
  reward_load_model();
  scheme_list();
  try {
    solver().validate();
    sim_config(ues.front(), oh.front()).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

MultiUserModel ExperimentConfig::model(int n, double cost) const {
  return MultiUserModel(enumerate(bss, channel_states, n), channel_matrix(), rate_table(), cost,
                        solver(), reward_load_model());
}

SimConfig ExperimentConfig::sim_config(int n, double cost) const {
  SimConfig c;
  c.bss = bss;
  c.channel_states = channel_states;
  c.ues = n;
  c.channel = channel_matrix();
  c.rates = rate_table();
  c.oh = cost;
  c.slots = slots;
  c.warmup = warmup;
  c.seeds.clear();
  for (int i = 0; i < seeds; ++i) c.seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
  c.ub_charges_oh = ub_charges_oh;
  c.decide_before_transition = decide_before_transition;
  c.bandwidth_hz = bandwidth_hz;
  c.slot_seconds = slot_seconds;
  c.symbols_per_slot = symbols_per_slot;
  c.data_symbols = data_symbols;
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["model"] = {{"bss", bss},
                {"channel_states", channel_states},
                {"preset", preset},
                {"channel", channel_matrix().data()},
                {"rates", rates},
                {"oh", oh},
                {"reward_load", reward_load}};
  j["solver"] = {{"omega", omega},
                 {"epsilon", epsilon},
                 {"max_sweeps", max_sweeps},
                 {"max_outer", max_outer},
                 {"init_seed", init_seed}};
  j["simulation"] = {{"ues", ues},
                     {"slots", slots},
                     {"warmup", warmup},
                     {"seeds", seeds},
                     {"first_seed", first_seed},
                     {"ub_charges_oh", ub_charges_oh},
                     {"decide_before_transition", decide_before_transition},
                     {"bandwidth_hz", bandwidth_hz},
                     {"slot_seconds", slot_seconds},
                     {"symbols_per_slot", symbols_per_slot},
                     {"data_symbols", data_symbols},
                     {"schemes", schemes}};
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mmw::cli
