#include "commands.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/version.hpp>

#include "mmw/state_space.hpp"

#ifndef MMW_VERSION
#define MMW_VERSION "0.0.0"
#endif

namespace mmw::cli {
namespace fs = std::filesystem;

namespace {

constexpr int kCsvSchemaVersion = 1;
constexpr int kPolicyFormatVersion = 1;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  return f;
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    const std::vector<std::string>& args, const std::vector<fs::path>& artifacts,
                    nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json j;
  j["tool"] = "mmwave-mdp";
  j["command"] = command;
  j["arguments"] = args;
  j["versions"] = {{"mmwave-mdp", MMW_VERSION},
                   {"policy_format", kPolicyFormatVersion},
                   {"csv_schema", kCsvSchemaVersion},
                   {"boost", BOOST_LIB_VERSION},
                   {"compiler", __VERSION__}};
  j["config"] = cfg.to_json();
  j["config_hash"] = hex64(cfg.hash());
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.seeds; ++i) seeds.push_back(cfg.first_seed + static_cast<std::uint64_t>(i));
  j["seeds"] = seeds;
  j["runtime"] = {{"threads", cfg.threads}, {"cache", cfg.cache.string()}, {"out", cfg.out.string()}};
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : artifacts)
    files.push_back({{"path", p.string()}, {"fnv1a64", hex64(fnv_file(p))}});
  j["artifacts"] = files;
  for (auto& [k, v] : extra.items()) j[k] = v;
  auto f = open_out(dir / ("manifest-" + command + ".json"));
  f << j.dump(2) << '\n';
}

std::string describe(const ExperimentConfig& cfg, int ues, double oh) {
  return "L=" + std::to_string(cfg.bss) + " K=" + std::to_string(cfg.channel_states) +
         " N=" + std::to_string(ues) + " OH=" + num(oh);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers; rethrows the
// first failure in index order.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t n = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

fs::path policy_path(const ExperimentConfig& cfg, int ues, double oh) {
  auto header = PolicyHeader::for_model(cfg.model(ues, oh), false);
  return cfg.cache / policy_file_name(header);
}

std::vector<SolveJob> solve_all(const ExperimentConfig& cfg) {
  std::vector<SolveJob> jobs;
  for (int n : cfg.ues)
    for (double oh : cfg.oh) {
      SolveJob job;
      job.ues = n;
      job.oh = oh;
      jobs.push_back(job);
    }
  ensure_dir(cfg.cache);

  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    auto& job = jobs[i];
    auto model = cfg.model(job.ues, job.oh);
    auto result = converge(random_profile(model.space, cfg.init_seed), model, cfg.outer_limit(job.ues));

    PolicyFile file{PolicyHeader::for_model(model, result.converged), std::move(result.profile)};
    job.policy = cfg.cache / policy_file_name(file.header);
    job.log = fs::path(job.policy).replace_extension(".log.csv");
    save_policy(job.policy, file);

    auto log = open_out(job.log);
    log << "iteration,ue,changes,solver_converged\n";
    for (const auto& r : result.log)
      log << r.iteration << ',' << r.ue << ',' << r.changes << ',' << (r.solver_converged ? 1 : 0)
          << '\n';
    job.converged = result.converged;
    job.iterations = result.iterations;
    job.states = model.space.size();
  });
  return jobs;
}

MdpPolicySet load_cached_policy(const ExperimentConfig& cfg, int ues, double oh) {
  auto model = cfg.model(ues, oh);
  auto expected = PolicyHeader::for_model(model, false);
  auto path = cfg.cache / policy_file_name(expected);
  if (!fs::exists(path))
    throw Error("no cached MDP policy for " + describe(cfg, ues, oh) + " (expected " +
                path.string() + "); run `mmwave-mdp solve` with the same model and solver " +
                "settings first, or drop `mdp` from --scheme");
  auto file = load_policy(path);
  if (!file.header.same_model(expected) || file.header.states != model.space.size())
    throw Error("policy file " + path.string() + " was solved for a different model; rerun " +
                "`mmwave-mdp solve`");
  return {std::move(model.space), std::move(file.profile)};
}

namespace {

struct SimulationPlan {
  std::vector<SimConfig> configs;
  std::map<std::pair<int, double>, MdpPolicySet> policies;
  std::vector<std::string> unconverged;
};

SimulationPlan plan_simulation(const ExperimentConfig& cfg) {
  SimulationPlan plan;
  auto schemes = cfg.scheme_list();
  bool need_mdp = std::find(schemes.begin(), schemes.end(), Scheme::kMdp) != schemes.end();
  for (int n : cfg.ues) {
    for (double oh : cfg.oh) {
      plan.configs.push_back(cfg.sim_config(n, oh));
      if (!need_mdp) continue;
      plan.policies.emplace(std::pair{n, oh}, load_cached_policy(cfg, n, oh));
      auto file = load_policy(policy_path(cfg, n, oh));
      if (!file.header.converged) plan.unconverged.push_back(describe(cfg, n, oh));
    }
  }
  return plan;
}

std::vector<SweepRow> run_plan(const ExperimentConfig& cfg, const SimulationPlan& plan) {
  auto schemes = cfg.scheme_list();
  PolicyLookup lookup = [&](const SimConfig& c) -> const MdpPolicySet& {
    return plan.policies.at({c.ues, c.oh});
  };
  return sweep(plan.configs, schemes, lookup, cfg.threads);
}

}  // namespace

std::vector<SweepRow> simulate_all(const ExperimentConfig& cfg) {
  return run_plan(cfg, plan_simulation(cfg));
}

namespace {

struct Flags {
  std::string config, preset, oh, ues, scheme, out, cache, reward_load, channel, rates;
  int bss = 0, channel_states = 0, seeds = 0, threads = 0, max_outer = 0, max_sweeps = 0;
  std::int64_t slots = 0, warmup = 0;
  double omega = 0, epsilon = 0;
  std::uint64_t init_seed = 0, first_seed = 0;
};

void add_config_options(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "INI experiment config")->check(CLI::ExistingFile);
  app->add_option("--preset", f.preset, "channel matrix preset");
  app->add_option("--channel", f.channel, "inline row-major channel matrix");
  app->add_option("--channel-states", f.channel_states, "number of channel states K");
  app->add_option("--rates", f.rates, "spectral efficiency per channel state");
  app->add_option("--bss", f.bss, "number of BSs L");
  app->add_option("--ues", f.ues, "UE counts, e.g. 3,4,5");
  app->add_option("--oh", f.oh, "handover costs, e.g. 0.03,0.1");
  app->add_option("--reward-load", f.reward_load, "previous | destination");
  app->add_option("--omega", f.omega, "discount factor");
  app->add_option("--epsilon", f.epsilon, "value iteration tolerance");
  app->add_option("--max-sweeps", f.max_sweeps, "value iteration sweep limit");
  app->add_option("--max-outer", f.max_outer, "best-response iteration limit (0 = 50 N)");
  app->add_option("--init-seed", f.init_seed, "seed of the random initial profile");
  app->add_option("--slots", f.slots, "slots per seed, warmup included");
  app->add_option("--warmup", f.warmup, "slots discarded before measuring");
  app->add_option("--seeds", f.seeds, "number of seeds");
  app->add_option("--first-seed", f.first_seed, "first seed");
  app->add_option("--scheme", f.scheme, "mdp,load,rate,channel,upper");
  app->add_option("--threads", f.threads, "worker threads");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--cache", f.cache, "policy cache directory");
}

bool given(const CLI::App* app, const std::string& name) {
  return app->get_option(name)->count() > 0;
}

// Defaults, then the config file, then MMWAVE_MDP_CACHE, then flags.
ExperimentConfig build_config(const CLI::App* app, const Flags& f, bool model = true) {
  ExperimentConfig cfg;
  if (!f.config.empty()) load_config_file(f.config, cfg);
  if (const char* env = std::getenv("MMWAVE_MDP_CACHE"); env && *env) cfg.cache = env;
  try {
    if (given(app, "--preset")) cfg.preset = f.preset, cfg.channel.clear();
    if (given(app, "--channel")) cfg.channel = parse_doubles(f.channel);
    if (given(app, "--channel-states")) cfg.channel_states = f.channel_states;
    if (given(app, "--rates")) cfg.rates = parse_doubles(f.rates);
    if (given(app, "--bss")) cfg.bss = f.bss;
    if (given(app, "--ues")) cfg.ues = parse_ints(f.ues);
    if (given(app, "--oh")) cfg.oh = parse_doubles(f.oh);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (given(app, "--reward-load")) cfg.reward_load = f.reward_load;
  if (given(app, "--omega")) cfg.omega = f.omega;
  if (given(app, "--epsilon")) cfg.epsilon = f.epsilon;
  if (given(app, "--max-sweeps")) cfg.max_sweeps = f.max_sweeps;
  if (given(app, "--max-outer")) cfg.max_outer = f.max_outer;
  if (given(app, "--init-seed")) cfg.init_seed = f.init_seed;
  if (given(app, "--slots")) cfg.slots = f.slots;
  if (given(app, "--warmup")) cfg.warmup = f.warmup;
  if (given(app, "--seeds")) cfg.seeds = f.seeds;
  if (given(app, "--first-seed")) cfg.first_seed = f.first_seed;
  if (given(app, "--scheme")) cfg.schemes = split_list(f.scheme);
  if (given(app, "--threads")) cfg.threads = f.threads;
  if (given(app, "--out")) cfg.out = f.out;
  if (given(app, "--cache")) cfg.cache = f.cache;
  cfg.validate(model);
  return cfg;
}

int cmd_solve(const ExperimentConfig& cfg, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  auto jobs = solve_all(cfg);
  std::vector<fs::path> artifacts;
  bool all_converged = true;
  for (const auto& j : jobs) {
    out << describe(cfg, j.ues, j.oh) << " states=" << j.states << " iterations=" << j.iterations
        << " converged=" << (j.converged ? "yes" : "no") << " policy=" << j.policy.string() << '\n';
    if (!j.converged) {
      all_converged = false;
      err << "error: best responses did not converge for " << describe(cfg, j.ues, j.oh)
          << " within " << cfg.outer_limit(j.ues) << " iterations; see " << j.log.string()
          << '\n';
    }
    artifacts.push_back(j.policy);
    artifacts.push_back(j.log);
  }
  write_manifest(cfg.out, "solve", cfg, args, artifacts);
  return all_converged ? kExitOk : kExitRuntime;
}

void report_unconverged(const SimulationPlan& plan, std::ostream& err) {
  for (const auto& d : plan.unconverged)
    err << "warning: cached MDP policy for " << d << " did not converge\n";
}

std::vector<fs::path> write_results(const ExperimentConfig& cfg, std::span<const SweepRow> rows) {
  ensure_dir(cfg.out);
  std::vector<fs::path> paths = {cfg.out / "raw.csv", cfg.out / "aggregate.csv", cfg.out / "plot.csv"};
  {
    auto f = open_out(paths[0]);
    write_raw_csv(f, rows);
  }
  {
    auto f = open_out(paths[1]);
    write_aggregate_csv(f, rows);
  }
  {
    auto f = open_out(paths[2]);
    write_plot_csv(f, rows);
  }
  return paths;
}

void print_summary(std::span<const SweepRow> rows, std::ostream& out) {
  for (const auto& r : rows) {
    auto se = r.metrics.se();
    auto ho = r.metrics.handover_rate();
    out << scheme_name(r.metrics.scheme) << " L=" << r.config.bss << " N=" << r.config.ues
        << " OH=" << num(r.config.oh) << " se=" << num(se.mean) << " +/- " << num(se.ci95)
        << " ho/ue/kslot=" << num(ho.mean) << " +/- " << num(ho.ci95);
    if (r.gain_vs_channel) out << " gain_vs_channel=" << num(*r.gain_vs_channel);
    out << '\n';
  }
}

int cmd_simulate(const ExperimentConfig& cfg, const std::vector<std::string>& args,
                 std::ostream& out, std::ostream& err) {
  auto plan = plan_simulation(cfg);
  report_unconverged(plan, err);
  auto rows = run_plan(cfg, plan);
  auto artifacts = write_results(cfg, rows);
  print_summary(rows, out);
  write_manifest(cfg.out, "simulate", cfg, args, artifacts);
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg, bool solve_missing, const std::vector<std::string>& args,
              std::ostream& out, std::ostream& err) {
  auto schemes = cfg.scheme_list();
  bool need_mdp = std::find(schemes.begin(), schemes.end(), Scheme::kMdp) != schemes.end();
  if (need_mdp && solve_missing) {
    for (int n : cfg.ues) {
      for (double oh : cfg.oh) {
        if (fs::exists(policy_path(cfg, n, oh))) continue;
        // Solve per pair; the cache is keyed per (N, OH) anyway.
        ExperimentConfig one = cfg;
        one.ues = {n};
        one.oh = {oh};
        for (const auto& j : solve_all(one))
          out << "solved " << describe(cfg, j.ues, j.oh) << " iterations=" << j.iterations
              << " converged=" << (j.converged ? "yes" : "no") << '\n';
      }
    }
  }

  auto plan = plan_simulation(cfg);
  report_unconverged(plan, err);
  auto rows = run_plan(cfg, plan);
  auto artifacts = write_results(cfg, rows);

  fs::path gain_path = cfg.out / "gain_table.csv";
  {
    auto f = open_out(gain_path);
    f << "L,K,N,oh,mdp_se,channel_se,gain_vs_channel\n";
    std::map<std::pair<int, double>, const SweepRow*> channel;
    for (const auto& r : rows)
      if (r.metrics.scheme == Scheme::kChannel) channel[{r.config.ues, r.config.oh}] = &r;
    for (const auto& r : rows) {
      if (r.metrics.scheme != Scheme::kMdp || !r.gain_vs_channel) continue;
      const auto* c = channel.at({r.config.ues, r.config.oh});
      f << r.config.bss << ',' << r.config.channel_states << ',' << r.config.ues << ','
        << num(r.config.oh) << ',' << num(r.metrics.se().mean) << ','
        << num(c->metrics.se().mean) << ',' << num(*r.gain_vs_channel) << '\n';
    }
  }
  artifacts.push_back(gain_path);
  print_summary(rows, out);
  write_manifest(cfg.out, "sweep", cfg, args, artifacts);
  return kExitOk;
}

void write_count_csv(std::ostream& f, const ExperimentConfig& cfg) {
  f << "L,K,N,enumerated,closed_form,ratio\n";
  for (int n : cfg.ues) {
    auto count = enumerate(cfg.bss, cfg.channel_states, n).size();
    f << cfg.bss << ',' << cfg.channel_states << ',' << n << ',' << count << ',';
    try {
      auto closed = closed_form_total(cfg.bss, cfg.channel_states, n);
      f << closed << ',' << num(static_cast<double>(count) / static_cast<double>(closed));
    } catch (const UnsupportedError&) {
      f << ',';
    }
    f << '\n';
  }
}

void write_dump_csv(std::ostream& f, const StateSpace& space) {
  f << "index,serving_channel,serving_load";
  for (int i = 1; i < space.bss(); ++i)
    f << ",neighbor_" << i << "_channel,neighbor_" << i << "_load";
  f << '\n';
  for (std::size_t s = 0; s < space.size(); ++s) {
    f << s;
    for (const auto& c : space.state_of(s).connections())
      f << ',' << static_cast<int>(c.channel.value) << ',' << c.load;
    f << '\n';
  }
}

int cmd_statespace(const ExperimentConfig& cfg, bool dump, const std::string& csv,
                   const std::vector<std::string>& args, std::ostream& out) {
  std::ostringstream body;
  if (dump) {
    if (cfg.ues.size() != 1) throw ConfigError("statespace dump takes a single --ues value");
    write_dump_csv(body, enumerate(cfg.bss, cfg.channel_states, cfg.ues.front()));
  } else {
    write_count_csv(body, cfg);
  }
  if (csv.empty()) {
    out << body.str();
    return kExitOk;
  }
  {
    auto f = open_out(csv);
    f << body.str();
  }
  out << "wrote " << csv << '\n';
  write_manifest(cfg.out, dump ? "statespace-dump" : "statespace-count", cfg, args, {csv});
  return kExitOk;
}

int cmd_inspect(const ExperimentConfig& cfg, const std::string& policy_file,
                const std::string& actions_csv, const std::string& kernel_csv, std::size_t ue,
                const std::vector<std::string>& args, std::ostream& out) {
  auto file = load_policy(policy_file);
  const auto& h = file.header;
  out << "policy " << policy_file << '\n'
      << "bss " << h.bss << "\nchannel_states " << h.channel_states << "\nues " << h.ues
      << "\nomega " << num(h.omega) << "\nepsilon " << num(h.epsilon) << "\noh " << num(h.oh)
      << "\nreward_load " << reward_load_name(h.reward_load) << "\nchannel_hash "
      << hex64(h.channel_hash) << "\nstates " << h.states << "\nconverged "
      << (h.converged ? "yes" : "no") << "\nkey " << hex64(h.key()) << '\n';
  for (std::size_t u = 0; u < file.profile.ues(); ++u) {
    std::vector<std::size_t> hist(static_cast<std::size_t>(h.bss), 0);
    for (auto a : file.profile.policies[u].actions) ++hist[a];
    out << "ue " << u << " actions";
    for (std::size_t a = 0; a < hist.size(); ++a) out << " [" << a << "]=" << hist[a];
    out << '\n';
  }

  auto space = enumerate(h.bss, h.channel_states, h.ues);
  std::vector<fs::path> artifacts;
  if (!actions_csv.empty()) {
    auto f = open_out(actions_csv);
    std::ostringstream states;
    write_dump_csv(states, space);
    std::istringstream lines(states.str());
    std::string line;
    for (std::size_t row = 0; std::getline(lines, line); ++row) {
      f << line;
      for (std::size_t u = 0; u < file.profile.ues(); ++u) {
        if (row == 0)
          f << ",ue_" << u << "_action";
        else
          f << ',' << static_cast<int>(file.profile.policies[u].actions[row - 1]);
      }
      f << '\n';
    }
    artifacts.push_back(actions_csv);
  }
  if (!kernel_csv.empty()) {
    if (ue >= file.profile.ues()) throw ConfigError("--ue is out of range for this policy");
    auto channel = cfg.channel_matrix();
    if (channel.hash() != h.channel_hash)
      throw ConfigError("the configured channel matrix does not match the policy file; pass " +
                        std::string("the --preset or --config used with solve"));
    MultiUserModel model(space, channel, RateTable(h.rates), h.oh,
                         SolverParams{h.omega, h.epsilon, cfg.max_sweeps}, h.reward_load);
    auto km = build_kernel(ue, file.profile, model);
    auto f = open_out(kernel_csv);
    write_kernel_csv(f, km.kernel, [&](std::size_t from, Action a, std::size_t to) {
      return transition_reward(space.state_of(from), a, space.state_of(to), model.rates, h.oh,
                               h.reward_load);
    });
    artifacts.push_back(kernel_csv);
  }
  if (!artifacts.empty()) write_manifest(cfg.out, "inspect-policy", cfg, args, artifacts);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MDP-based cell selection for mmWave networks", "mmwave-mdp"};
  app.require_subcommand(1);
  Flags flags;

  auto* solve = app.add_subcommand("solve", "compute best-response MDP policies into the cache");
  add_config_options(solve, flags);
  auto* simulate = app.add_subcommand("simulate", "simulate schemes and write CSV results");
  add_config_options(simulate, flags);
  auto* sweep_cmd = app.add_subcommand("sweep", "simulate every (N, OH) cell and tabulate gains");
  add_config_options(sweep_cmd, flags);
  bool solve_missing = false;
  sweep_cmd->add_flag("--solve-missing", solve_missing, "solve policies absent from the cache");

  auto* statespace = app.add_subcommand("statespace", "state-space counts and listings");
  statespace->require_subcommand(1);
  std::string csv;
  auto* count = statespace->add_subcommand("count", "enumerated vs closed-form counts per N");
  add_config_options(count, flags);
  count->add_option("--csv", csv, "write the report to this file");
  auto* dump = statespace->add_subcommand("dump", "list canonical states");
  add_config_options(dump, flags);
  dump->add_option("--csv", csv, "write the listing to this file");

  auto* inspect = app.add_subcommand("inspect-policy", "describe a policy file");
  add_config_options(inspect, flags);
  std::string policy_file, actions_csv, kernel_csv;
  std::size_t ue = 0;
  inspect->add_option("--policy", policy_file, "policy file")->required()->check(CLI::ExistingFile);
  inspect->add_option("--actions-csv", actions_csv, "write per-state actions");
  inspect->add_option("--kernel-csv", kernel_csv, "write the kernel of one UE");
  inspect->add_option("--ue", ue, "UE whose kernel is written");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(build_config(solve, flags), args, out, err);
    if (simulate->parsed()) return cmd_simulate(build_config(simulate, flags), args, out, err);
    if (sweep_cmd->parsed())
      return cmd_sweep(build_config(sweep_cmd, flags), solve_missing, args, out, err);
    if (count->parsed()) return cmd_statespace(build_config(count, flags, false), false, csv, args, out);
    if (dump->parsed()) return cmd_statespace(build_config(dump, flags, false), true, csv, args, out);
    if (inspect->parsed())
      return cmd_inspect(build_config(inspect, flags), policy_file, actions_csv, kernel_csv, ue,
                         args, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace mmw::cli
