#pragma once

#include <cstdint>
#include <initializer_list>

namespace mmw {

// Counter-based random source. Every draw is a pure function of the seed and
// a tuple of counters (ue, link, slot, ...), so results do not depend on the
// order in which draws are made or on how work is split between threads.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::initializer_list<std::uint64_t> counters) const {
    std::uint64_t h = mix(seed_ ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t c : counters) h = mix(h ^ mix(c + 0x9e3779b97f4a7c15ULL));
    return h;
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform(std::initializer_list<std::uint64_t> counters) const {
    return static_cast<double>(bits(counters) >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n,
                      std::initializer_list<std::uint64_t> counters) const {
    return static_cast<std::uint64_t>(uniform(counters) * static_cast<double>(n)) % n;
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace mmw
