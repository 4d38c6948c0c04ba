#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "mmw/error.hpp"
#include "mmw/policy_io.hpp"

using namespace mmw;

namespace {
MultiUserModel small_model(double oh = 0.1) {
  return MultiUserModel(enumerate(3, 3, 2), channel_preset("urban-nlos-dominant"),
                        RateTable::defaults(), oh);
}
}  // namespace

TEST_SUITE("policy_io") {

TEST_CASE("text round trip") {
  auto model = small_model();
  PolicyFile f{PolicyHeader::for_model(model, true), random_profile(model.space, 3)};
  std::stringstream ss;
  write_policy(ss, f);
  CHECK(ss.str().rfind("mmwave-mdp-policy 1\n", 0) == 0);
  auto back = read_policy(ss);
  CHECK(back.profile == f.profile);
  CHECK(back.header.key() == f.header.key());
  CHECK(back.header.converged);
  CHECK(back.header.states == model.space.size());
  CHECK(back.header.omega == f.header.omega);
  CHECK(back.header.rates == f.header.rates);
}

TEST_CASE("file round trip and naming") {
  auto model = small_model();
  PolicyFile f{PolicyHeader::for_model(model, false), constant_profile(model.space, 2)};
  auto dir = std::filesystem::temp_directory_path() / "mmw_policy_io_test";
  std::filesystem::create_directories(dir);
  auto path = dir / policy_file_name(f.header);
  save_policy(path, f);
  auto back = load_policy(path);
  CHECK(back.profile == f.profile);
  CHECK_FALSE(back.header.converged);
  CHECK(path.filename().string().rfind("policy_L3_K3_N2_", 0) == 0);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_policy(dir / "missing.txt"), Error);
}

TEST_CASE("key covers every model parameter") {
  auto a = PolicyHeader::for_model(small_model(0.1), true);
  auto b = PolicyHeader::for_model(small_model(0.3), true);
  CHECK_FALSE(a.same_model(b));
  auto c = a;
  c.converged = false;
  CHECK(a.same_model(c));
  c.omega = 0.95;
  CHECK_FALSE(a.same_model(c));
  c = a;
  c.channel_hash ^= 1;
  CHECK_FALSE(a.same_model(c));
  c = a;
  c.reward_load = RewardLoad::kPreviousSlot;
  CHECK_FALSE(a.same_model(c));
}

TEST_CASE("malformed input is rejected") {
  std::istringstream wrong_magic("not-a-policy 1\n");
  CHECK_THROWS_AS(read_policy(wrong_magic), ValidationError);
  auto model = small_model();
  PolicyFile f{PolicyHeader::for_model(model, true), random_profile(model.space, 3)};
  std::stringstream ss;
  write_policy(ss, f);
  auto text = ss.str();
  std::istringstream truncated(text.substr(0, text.size() - 20));
  CHECK_THROWS_AS(read_policy(truncated), ValidationError);
  auto bad_action = text;
  bad_action.replace(bad_action.rfind(' ') + 1, 1, "7");
  std::istringstream corrupted(bad_action);
  CHECK_THROWS_AS(read_policy(corrupted), ValidationError);
}

TEST_CASE("reward load names") {
  CHECK(parse_reward_load("previous") == RewardLoad::kPreviousSlot);
  CHECK(parse_reward_load(reward_load_name(RewardLoad::kDestination)) == RewardLoad::kDestination);
  CHECK_THROWS_AS(parse_reward_load("current"), ValidationError);
}

}  // TEST_SUITE
