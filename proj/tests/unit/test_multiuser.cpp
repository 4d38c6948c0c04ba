#include <doctest.h>

#include <cmath>

#include "mmw/error.hpp"
#include "mmw/multiuser.hpp"
#include "oracles.hpp"

using namespace mmw;

namespace {

MultiUserModel model_for(int bss, int k, int n, double oh = 0.1,
                         RewardLoad load = RewardLoad::kDestination) {
  ChannelMatrix channel = k == 3 ? channel_preset("urban-nlos-dominant")
                                 : ChannelMatrix(2, {0.7, 0.3, 0.4, 0.6});
  RateTable rates = k == 3 ? RateTable::defaults() : RateTable({0.0, 2.0});
  return MultiUserModel(enumerate(bss, k, n), channel, rates, oh, {}, load);
}

void check_against_oracle(const MultiUserModel& model, const PolicyProfile& profile) {
  for (std::size_t ue = 0; ue < 2; ++ue) {
    auto built = build_kernel(ue, profile, model);
    auto ref = oracle::two_ue_joint_kernel(ue, profile, model);
    const auto& space = model.space;
    for (std::size_t s = 0; s < space.size(); ++s) {
      for (std::size_t a = 0; a < ref.actions; ++a) {
        std::vector<double> dense(space.size(), 0.0);
        for (const auto& t : built.kernel.row(s, a)) dense[t.dest] += t.prob;
        for (std::size_t d = 0; d < space.size(); ++d)
          CHECK(std::abs(dense[d] - ref.p[(s * ref.actions + a) * ref.states + d]) < 1e-12);
        CHECK(std::abs(built.rewards(s, a) - ref.r[s * ref.actions + a]) < 1e-12);
      }
    }
  }
}

}  // namespace

TEST_SUITE("multiuser") {

TEST_CASE("two-UE kernel matches joint enumeration, L=2 K=2") {
  for (auto load : {RewardLoad::kDestination, RewardLoad::kPreviousSlot}) {
    auto model = model_for(2, 2, 2, 0.1, load);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) check_against_oracle(model, random_profile(model.space, seed));
    check_against_oracle(model, constant_profile(model.space, 0));
    check_against_oracle(model, constant_profile(model.space, 1));
  }
}

TEST_CASE("two-UE kernel matches joint enumeration, L=3") {
  auto model = model_for(3, 2, 2);
  check_against_oracle(model, random_profile(model.space, 9));
  auto model3 = model_for(3, 3, 2, 0.3);
  check_against_oracle(model3, random_profile(model3.space, 4));
}

TEST_CASE("rows are stochastic and destinations canonical") {
  for (int n = 1; n <= 4; ++n) {
    auto model = model_for(3, 3, n);
    auto profile = random_profile(model.space, 17);
    auto built = build_kernel(0, profile, model);
    for (std::size_t s = 0; s < model.space.size(); ++s) {
      for (std::size_t a = 0; a < 3; ++a) {
        double sum = 0.0;
        for (const auto& t : built.kernel.row(s, a)) {
          sum += t.prob;
          REQUIRE(t.dest < model.space.size());
          const auto& d = model.space.state_of(t.dest);
          CHECK(is_canonical(d));
          CHECK(d.total_load() == n);
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("single UE: links move alone and loads stay at one") {
  auto model = model_for(3, 3, 1);
  auto built = build_kernel(0, constant_profile(model.space, 0), model);
  for (std::size_t s = 0; s < model.space.size(); ++s)
    for (std::size_t a = 0; a < 3; ++a)
      for (const auto& t : built.kernel.row(s, a)) {
        const auto& d = model.space.state_of(t.dest);
        CHECK(d.serving().load == 1);
      }
  auto res = converge(constant_profile(model.space, 0), model, 50);
  CHECK(res.converged);
}

TEST_CASE("selection probabilities") {
  auto model = model_for(3, 3, 3);
  std::vector<std::uint16_t> loads = {1, 2, 0};
  auto stay = selection_probabilities(constant_profile(model.space, 0).policies[0],
                                      model.stationary, model.space, loads, 1);
  CHECK(stay[1] == doctest::Approx(1.0));
  auto sel = selection_probabilities(random_profile(model.space, 3).policies[1], model.stationary,
                                     model.space, loads, 0);
  double sum = 0.0;
  for (double x : sel) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  // two empty identical neighbors share the mass of "move"
  std::vector<std::uint16_t> spread = {3, 0, 0};
  auto move = selection_probabilities(constant_profile(model.space, 1).policies[0],
                                      model.stationary, model.space, spread, 0);
  CHECK(move[0] == 0.0);
  CHECK(move[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(move[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(selection_probabilities(constant_profile(model.space, 0).policies[0],
                                          model.stationary, model.space, loads, 2),
                  ValidationError);
}

TEST_CASE("random profiles are reproducible") {
  auto space = enumerate(3, 3, 3);
  CHECK(random_profile(space, 5) == random_profile(space, 5));
  CHECK_FALSE(random_profile(space, 5) == random_profile(space, 6));
  for (const auto& p : random_profile(space, 5).policies)
    for (auto a : p.actions) CHECK(a < 3);
}

TEST_CASE("converge reaches a fixed point on the default scenario") {
  auto model = model_for(3, 3, 3);
  auto res = converge(random_profile(model.space, 1), model, 150);
  REQUIRE(res.converged);
  CHECK(res.iterations <= 150);
  for (auto c : res.last_cycle_changes) CHECK(c == 0);
  for (std::size_t ue = 0; ue < 3; ++ue)
    CHECK(best_response(ue, res.profile, model).policy == res.profile.policies[ue]);
  // round-robin order
  for (const auto& r : res.log) CHECK(r.ue == static_cast<std::size_t>(r.iteration - 1) % 3);
}

TEST_CASE("converge honors the iteration limit") {
  auto model = model_for(3, 3, 3);
  auto res = converge(random_profile(model.space, 1), model, 4);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 4);
  CHECK_THROWS_AS(converge(random_profile(model.space, 1), model, 0), ValidationError);
}

TEST_CASE("model validation") {
  auto space = enumerate(3, 3, 2);
  CHECK_THROWS_AS(MultiUserModel(space, ChannelMatrix(2, {0.5, 0.5, 0.5, 0.5}), RateTable::defaults(), 0.1),
                  ValidationError);
  CHECK_THROWS_AS(MultiUserModel(space, channel_preset("urban-nlos-dominant"),
                                 RateTable::defaults(), 1.5),
                  ValidationError);
  auto model = model_for(3, 3, 2);
  PolicyProfile short_profile = constant_profile(enumerate(3, 3, 3), 0);
  CHECK_THROWS_AS(build_kernel(0, short_profile, model), ValidationError);
}

}  // TEST_SUITE
