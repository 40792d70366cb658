#pragma once

#include <cmath>
#include <cstdint>

namespace vgs {

// Counter-based generator: every draw is a pure function of
// (seed, stream, index), so parallel loops stay deterministic regardless
// of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return static_cast<double>(hash_key(seed, stream, index) >> 11) * 0x1.0p-53;
}

// Child seed for realization n of an ensemble.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t n) {
  return hash_key(seed, 0x5EEDull, n);
}

// Sequential convenience wrapper around the counter scheme.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  double uniform() { return uniform01(seed_, stream_, counter_++); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  // Box-Muller; consumes two counters.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace vgs
