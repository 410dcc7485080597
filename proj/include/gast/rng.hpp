#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gast {

namespace detail {
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Single source of randomness for the whole toolkit. Only the raw
// mt19937_64 word stream is consumed (never std::*_distribution), so every
// draw is bit-stable across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Deterministic derived stream, independent of this generator's state.
  static Rng from(uint64_t seed, uint64_t a, uint64_t b = 0) {
    uint64_t s = seed;
    uint64_t h = detail::splitmix64(s);
    s ^= a * 0x9e3779b97f4a7c15ULL;
    h ^= detail::splitmix64(s);
    s ^= b + 0xd1b54a32d192ed03ULL;
    h ^= detail::splitmix64(s);
    return Rng(h);
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n must be positive.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<size_t>(uniform_int(static_cast<int>(v.size())))];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gast
