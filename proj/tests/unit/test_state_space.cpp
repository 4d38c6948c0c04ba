#include <doctest.h>

#include <set>

#include "mmw/error.hpp"
#include "mmw/state_space.hpp"
#include "oracles.hpp"

using namespace mmw;

namespace {
Connection conn(int ch, int load) { return {ChannelState(ch), static_cast<std::uint16_t>(load)}; }
}  // namespace

TEST_SUITE("state_space") {

TEST_CASE("enumeration equals the canonical image of the raw product space") {
  for (int bss = 1; bss <= 3; ++bss) {
    for (int k = 1; k <= 3; ++k) {
      for (int n = 1; n <= 6; ++n) {
        CAPTURE(bss);
        CAPTURE(k);
        CAPTURE(n);
        auto space = enumerate(bss, k, n);
        auto ref = oracle::canonical_image_of_raw_space(bss, k, n);
        REQUIRE(space.size() == ref.size());
        std::set<SystemState> seen;
        for (const auto& s : space.states()) {
          CHECK(is_canonical(s));
          CHECK(s.total_load() == n);
          CHECK(s.serving().load >= 1);
          CHECK(seen.insert(s).second);
          CHECK(ref.count(s) == 1);
        }
        CHECK(space.size() <= oracle::raw_space_size(bss, k, n));
      }
    }
  }
}

TEST_CASE("state counts for three BSs and three channel states") {
  // frozen from the brute-force canonical image
  const std::size_t expected[] = {18, 45, 90, 144, 216, 297};
  for (int n = 1; n <= 6; ++n) CHECK(enumerate(3, 3, n).size() == expected[n - 1]);
  CHECK(enumerate(1, 1, 1).size() == 1);
}

TEST_CASE("counts are nondecreasing in N") {
  for (int bss = 1; bss <= 4; ++bss) {
    std::size_t prev = 0;
    for (int n = 1; n <= 6; ++n) {
      auto size = enumerate(bss, 3, n).size();
      CHECK(size >= prev);
      prev = size;
    }
  }
}

TEST_CASE("closed-form counts, evaluated by hand") {
  CHECK(closed_form_count_c(1, 5) == 6);
  CHECK(closed_form_count_c(2, 4) == 2);
  CHECK(closed_form_count_c(3, 5) == 2);
  CHECK(closed_form_occupancy(3, 3) == 6);
  CHECK(closed_form_total(3, 3, 3) == 162);
  CHECK(closed_form_total(1, 1, 1) == 2);
  CHECK_THROWS_AS(closed_form_count_c(5, 3), UnsupportedError);
  CHECK_THROWS_AS(closed_form_total(6, 3, 3), UnsupportedError);
}

TEST_CASE("index lookup round-trips") {
  auto space = enumerate(3, 3, 4);
  for (std::size_t i = 0; i < space.size(); ++i) CHECK(space.index_of(space.state_of(i)) == i);
  CHECK_FALSE(space.find(SystemState({conn(2, 1), conn(1, 1), conn(2, 2)})).has_value());
  CHECK_THROWS_AS(space.index_of(SystemState({conn(2, 1), conn(1, 1), conn(2, 2)})),
                  ValidationError);
}

TEST_CASE("canonicalize sorts neighbors and validates loads") {
  std::vector<Connection> nb = {conn(1, 0), conn(2, 1), conn(1, 2)};
  auto s = canonicalize(conn(0, 1), nb, 4);
  CHECK(s == oracle::brute_canonical(conn(0, 1), nb));
  CHECK(s[1] == conn(2, 1));
  CHECK(s[2] == conn(1, 2));
  CHECK(s[3] == conn(1, 0));
  CHECK_THROWS_AS(canonicalize(conn(0, 0), nb, 3), ValidationError);
  CHECK_THROWS_AS(canonicalize(conn(0, 1), nb, 5), ValidationError);
}

TEST_CASE("canonical view maps positions back to BSs") {
  std::vector<Connection> by_bs = {conn(1, 1), conn(2, 0), conn(0, 2), conn(2, 0)};
  for (std::size_t serving = 0; serving < by_bs.size(); ++serving) {
    if (by_bs[serving].load == 0) continue;
    auto v = canonical_view(by_bs, serving);
    CHECK(is_canonical(v.state));
    CHECK(v.bs_at[0] == serving);
    std::set<std::size_t> used;
    for (std::size_t p = 0; p < by_bs.size(); ++p) {
      CHECK(v.state[p] == by_bs[v.bs_at[p]]);
      used.insert(v.bs_at[p]);
    }
    CHECK(used.size() == by_bs.size());
  }
  // equal neighbors keep physical order
  auto v = canonical_view(by_bs, 0);
  CHECK(v.bs_at[1] == 1);
  CHECK(v.bs_at[2] == 3);
}

TEST_CASE("occupancy erases channels") {
  auto o = occupancy_of(SystemState({conn(0, 1), conn(2, 3), conn(1, 0)}));
  CHECK(o.loads == std::vector<std::uint16_t>{3, 1, 0});
}

TEST_CASE("enumeration cap") {
  CHECK_THROWS_AS(enumerate(3, 3, 6, 100), CapacityError);
  CHECK_THROWS_AS(enumerate(0, 3, 3), ValidationError);
}

}  // TEST_SUITE
