#include <doctest.h>

#include <random>

#include "mmw/baselines.hpp"
#include "mmw/error.hpp"
#include "oracles.hpp"

using namespace mmw;

TEST_SUITE("baselines") {

TEST_CASE("scheme names round-trip") {
  for (Scheme s : all_schemes()) CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK(all_schemes().size() == 5);
  CHECK_THROWS_AS(parse_scheme("greedy"), ValidationError);
}

TEST_CASE("load policy picks the least loaded BS") {
  std::vector<int> loads = {2, 0, 1};
  CHECK(load_policy(loads, 0.9) == 1);
  std::vector<int> tie = {0, 3, 0};
  CHECK(load_policy(tie, 0.0) == 0);
  CHECK(load_policy(tie, 0.49) == 0);
  CHECK(load_policy(tie, 0.51) == 2);
  CHECK(load_policy(tie, 0.999999) == 2);
}

TEST_CASE("rate policy maximizes the shared rate") {
  RateTable rates = RateTable::defaults();
  std::vector<ChannelState> ch = {kLos, kNlos, kLos};
  std::vector<int> loads = {3, 0, 1};
  // 4/4, 1/1, 4/2
  CHECK(rate_policy(ch, loads, rates) == 2);
  std::vector<int> even = {1, 0, 1};
  CHECK(rate_policy(ch, even, rates) == 0);
}

TEST_CASE("channel policy takes the best link, lowest index on ties") {
  std::vector<ChannelState> ch = {kNlos, kLos, kLos};
  CHECK(channel_policy(ch) == 1);
  std::vector<ChannelState> out = {kOutage, kOutage};
  CHECK(channel_policy(out) == 0);
}

TEST_CASE("upper bound equals exhaustive search") {
  std::mt19937_64 gen(21);
  RateTable rates = RateTable::defaults();
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 4, l = 1 + (trial / 4) % 3;
    JointObservation obs{n, l, {}, std::vector<int>(l, 0)};
    std::vector<std::size_t> prev(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t b = 0; b < l; ++b) obs.channels.push_back(ChannelState(static_cast<int>(gen() % 3)));
      prev[k] = gen() % l;
      ++obs.loads[prev[k]];
    }
    const double oh = (trial % 5) * 0.1;
    for (bool charge : {true, false}) {
      auto a = upper_bound_assignment(obs, rates, oh, prev, charge);
      const double got = assignment_reward(obs, rates, oh, prev, a, charge);
      CHECK(got == doctest::Approx(oracle::brute_upper_bound(obs, rates, oh, prev, charge)).epsilon(1e-14));
    }
  }
}

TEST_CASE("upper bound guards") {
  JointObservation obs{10, 5, std::vector<ChannelState>(50, kLos), {10, 0, 0, 0, 0}};
  std::vector<std::size_t> prev(10, 0);
  CHECK_THROWS_AS(upper_bound_assignment(obs, RateTable::defaults(), 0.1, prev, true, 1000),
                  CapacityError);
  JointObservation bad{2, 2, std::vector<ChannelState>(4, kLos), {1, 0}};
  CHECK_THROWS_AS(upper_bound_assignment(bad, RateTable::defaults(), 0.1, prev), ValidationError);
}

}  // TEST_SUITE
