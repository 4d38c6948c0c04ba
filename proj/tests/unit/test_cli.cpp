#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using mmw::cli::run_cli;

namespace {

struct Sandbox {
  fs::path root;
  explicit Sandbox(const std::string& name)
      : root(fs::temp_directory_path() / ("mmw_cli_" + name)) {
    fs::remove_all(root);
    fs::create_directories(root);
    ::unsetenv("MMWAVE_MDP_CACHE");
  }
  ~Sandbox() { fs::remove_all(root); }
  std::string path(const std::string& p) const { return (root / p).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("statespace count reports enumeration and closed form") {
  auto r = cli({"statespace", "count", "--bss", "1", "--channel-states", "1", "--ues", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "L,K,N,enumerated,closed_form,ratio\n1,1,1,1,2,0.5\n");
  r = cli({"statespace", "count", "--ues", "1,2,3,4,5,6"});
  CHECK(r.code == 0);
  CHECK(r.out.find("3,3,3,90,162,") != std::string::npos);
  CHECK(r.out.find("3,3,6,297,432,") != std::string::npos);
}

TEST_CASE("statespace dump lists canonical states") {
  auto r = cli({"statespace", "dump", "--bss", "2", "--channel-states", "2", "--ues", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("index,serving_channel,serving_load,neighbor_1_channel,neighbor_1_load\n", 0) == 0);
  CHECK(count_lines(r.out) == 1 + 8);
  CHECK(cli({"statespace", "dump", "--ues", "2,3"}).code == 2);
}

TEST_CASE("usage and configuration errors exit with 2") {
  Sandbox box("usage");
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"solve", "--bogus"}).code == 2);
  auto r = cli({"solve", "--preset", "no-such-preset", "--cache", box.path("c"), "--out", box.path("o")});
  CHECK(r.code == 2);
  CHECK(r.err.find("no-such-preset") != std::string::npos);
  CHECK(cli({"simulate", "--oh", "1.5", "--scheme", "channel", "--out", box.path("o")}).code == 2);
  CHECK(cli({"simulate", "--scheme", "greedy", "--out", box.path("o")}).code == 2);
  CHECK(cli({"simulate", "--config", box.path("missing.ini")}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("simulate with only Channel needs no policies") {
  Sandbox box("channel_only");
  auto r = cli({"simulate", "--scheme", "channel", "--slots", "2000", "--warmup", "100", "--seeds", "3",
                "--cache", box.path("empty-cache"), "--out", box.path("out")});
  CHECK(r.code == 0);
  CHECK(count_lines(slurp(box.path("out/aggregate.csv"))) == 2);
  CHECK(count_lines(slurp(box.path("out/raw.csv"))) == 4);
  CHECK(fs::exists(box.path("out/manifest-simulate.json")));
}

TEST_CASE("missing MDP policy names the solve command") {
  Sandbox box("missing");
  auto r = cli({"simulate", "--scheme", "mdp", "--slots", "200", "--warmup", "10", "--cache", box.path("cache"),
                "--out", box.path("out")});
  CHECK(r.code == 1);
  CHECK(r.err.find("mmwave-mdp solve") != std::string::npos);
}

TEST_CASE("solve then simulate all five schemes") {
  Sandbox box("full");
  auto s = cli({"solve", "--ues", "3", "--cache", box.path("cache"), "--out", box.path("out")});
  REQUIRE(s.code == 0);
  CHECK(s.out.find("converged=yes") != std::string::npos);
  std::size_t policies = 0;
  for (const auto& e : fs::directory_iterator(box.path("cache")))
    policies += e.path().extension() == ".txt";
  CHECK(policies == 1);

  std::vector<std::string> sim = {"simulate", "--slots", "3000", "--warmup", "100", "--seeds", "3",
                                  "--cache", box.path("cache")};
  auto a = sim, b = sim;
  a.insert(a.end(), {"--out", box.path("a"), "--threads", "1"});
  b.insert(b.end(), {"--out", box.path("b"), "--threads", "3"});
  REQUIRE(cli(a).code == 0);
  REQUIRE(cli(b).code == 0);
  auto agg = slurp(box.path("a/aggregate.csv"));
  CHECK(count_lines(agg) == 1 + 5);
  for (const char* f : {"raw.csv", "aggregate.csv", "plot.csv"})
    CHECK(slurp(box.path(std::string("a/") + f)) == slurp(box.path(std::string("b/") + f)));

  auto manifest = nlohmann::json::parse(slurp(box.path("a/manifest-simulate.json")));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seeds"].size() == 3);
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest["artifacts"].size() == 3);
  auto manifest_b = nlohmann::json::parse(slurp(box.path("b/manifest-simulate.json")));
  CHECK(manifest["config_hash"] == manifest_b["config_hash"]);

}

TEST_CASE("single UE solve converges trivially") {
  Sandbox box("n1");
  auto r = cli({"solve", "--ues", "1", "--cache", box.path("cache"), "--out", box.path("out")});
  CHECK(r.code == 0);
  CHECK(r.out.find("N=1") != std::string::npos);
  CHECK(r.out.find("converged=yes") != std::string::npos);
}

TEST_CASE("non-convergence exits nonzero and points at the log") {
  Sandbox box("noconv");
  auto r = cli({"solve", "--ues", "3", "--max-outer", "2", "--cache", box.path("cache"), "--out",
                box.path("out")});
  CHECK(r.code == 1);
  CHECK(r.err.find(".log.csv") != std::string::npos);
}

TEST_CASE("config file, environment and flags layer in that order") {
  Sandbox box("layers");
  {
    std::ofstream ini(box.path("exp.ini"));
    ini << "[model]\nbss = 2\noh = 0.3\n[simulation]\nues = 2\nslots = 500\nwarmup = 10\nseeds = 2\n"
        << "schemes = channel\n[output]\ncache = " << box.path("file-cache") << "\n";
  }
  auto r = cli({"simulate", "--config", box.path("exp.ini"), "--out", box.path("out"), "--oh", "0.06"});
  REQUIRE(r.code == 0);
  auto agg = slurp(box.path("out/aggregate.csv"));
  CHECK(agg.find("channel,2,3,2,0.06,2,490,") != std::string::npos);

  ::setenv("MMWAVE_MDP_CACHE", box.path("env-cache").c_str(), 1);
  r = cli({"solve", "--config", box.path("exp.ini"), "--out", box.path("out")});
  CHECK(r.code == 0);
  CHECK(fs::exists(box.path("env-cache")));
  CHECK_FALSE(fs::exists(box.path("file-cache")));
  r = cli({"solve", "--config", box.path("exp.ini"), "--out", box.path("out"), "--cache", box.path("flag-cache")});
  CHECK(fs::exists(box.path("flag-cache")));
  ::unsetenv("MMWAVE_MDP_CACHE");

  {
    std::ofstream ini(box.path("bad.ini"));
    ini << "[model]\nbsss = 2\n";
  }
  CHECK(cli({"simulate", "--config", box.path("bad.ini")}).code == 2);
}

TEST_CASE("inspect-policy dumps actions and the kernel") {
  Sandbox box("inspect");
  REQUIRE(cli({"solve", "--ues", "2", "--cache", box.path("cache"), "--out", box.path("out")}).code == 0);
  fs::path policy;
  for (const auto& e : fs::directory_iterator(box.path("cache")))
    if (e.path().extension() == ".txt") policy = e.path();
  auto r = cli({"inspect-policy", "--policy", policy.string(), "--actions-csv", box.path("a.csv"),
                "--kernel-csv", box.path("k.csv"), "--ue", "1", "--out", box.path("out")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("states 45") != std::string::npos);
  CHECK(count_lines(slurp(box.path("a.csv"))) == 1 + 45);
  CHECK(slurp(box.path("k.csv")).rfind("state,action,dest,prob,reward\n", 0) == 0);
  CHECK(cli({"inspect-policy", "--policy", policy.string(), "--kernel-csv", box.path("k2.csv"),
             "--channel", "0.5,0.5,0,0.2,0.6,0.2,0,0.5,0.5", "--out", box.path("out")})
            .code == 2);
}

}  // TEST_SUITE
