#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace viseq {

// splitmix64 finalizer over a keyed combination; used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);

// Seeded random stream with portable variates. The engine is mt19937_64
// (bit-specified by the standard); all variate code below is hand-rolled so
// no implementation-defined std:: distribution enters the picture, and a
// given seed produces the same byte-for-byte draw sequence everywhere.
//
// split(key) derives an independent child from (seed, key), never from draw
// state, so parallel consumers can each be handed a pre-split stream and the
// overall result stays independent of thread count and evaluation order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : seed_(seed), engine_(mix_seed(seed, 0x243f6a8885a308d3ull)) {}

  RngStream split(std::uint64_t key) const { return RngStream(mix_seed(seed_, key)); }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // sum of n Bernoulli(p) draws; n is small everywhere this is used
  int binomial(int n, double p);

  // unbiased index in [0, n) (Lemire's method)
  std::size_t uniform_index(std::size_t n);

  // Fisher–Yates; std::shuffle is implementation-defined, this is not
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace viseq
