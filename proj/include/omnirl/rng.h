#ifndef OMNIRL_RNG_H_
#define OMNIRL_RNG_H_

#include <cstdint>
#include <random>

namespace omnirl {

// Stateless seed derivation so that per-instance and per-rollout streams do
// not depend on how many draws an enclosing loop has made.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// mt19937_64 wrapper whose real-valued draws are defined bit-for-bit here
// rather than by the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

template <typename Vec>
void shuffle(Vec& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace omnirl

#endif  // OMNIRL_RNG_H_
