#ifndef CNMIXT_RNG_HPP
#define CNMIXT_RNG_HPP

#include <cstdint>
#include <random>

namespace cnmixt {

// Quantile of the standard normal distribution (Acklam's rational
// approximation polished with one Halley step on erfc, giving results at
// machine precision). Used for sampling by inversion so that seeded runs
// are bit-reproducible across platforms.
double normal_quantile(double p);

// Deterministic random stream: mt19937_64 (fully specified by the C++
// standard) with uniforms by 53-bit mantissa fill and normals by inversion.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0, 1), endpoints excluded.
  double uniform() {
    const double u = (next_u64() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_quantile(uniform()); }

  // Index in [0, k) with uniform probabilities.
  int uniform_index(int k) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(k));
  }

  // Independent substream for (seed, stream) pairs; used to give every
  // model-grid candidate its own reproducible stream regardless of the
  // order fits are scheduled in.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cnmixt

#endif
