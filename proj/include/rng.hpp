#ifndef RNG_HPP
#define RNG_HPP

#include <cstdint>

// Counter-based random number generation: every draw is a pure function of
// (seed, counter), so sample streams are reproducible bit-for-bit across
// platforms and independent of evaluation order.
namespace rng {

// splitmix64 finalizer; passes standard avalanche tests and is trivially portable.
inline uint64_t mix(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct Stream {
  uint64_t seed;
  uint64_t counter = 0;

  explicit Stream(uint64_t s) : seed(s) {}

  uint64_t next_u64() { return mix(mix(seed) ^ mix(++counter)); }

  // uniform in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // symmetric interval (-a, a)
  double sym(double a) { return uniform(-a, a); }
};

} // namespace rng

#endif
