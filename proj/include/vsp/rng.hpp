#ifndef VSP_RNG_HPP
#define VSP_RNG_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace vsp {

// xoshiro256++ with splitmix64 seeding. Self-contained so that seeded runs
// are bit-identical across platforms and standard libraries (the std::
// distributions are implementation-defined).
class Rng {
public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
  }

  // Independent stream derived from this generator's seed material.
  Rng split(uint64_t stream) const {
    uint64_t x = s_[0] ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    Rng r(0);
    for (auto& si : r.s_) si = splitmix64(x);
    return r;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t uniform_int(uint64_t n) {
    assert(n > 0);
    // Rejection sampling to avoid modulo bias.
    uint64_t threshold = (-n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal(double mu, double sd) {
    if (have_cached_) {
      have_cached_ = false;
      return mu + sd * cached_;
    }
    // Marsaglia polar method.
    double u, v, r2;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    double f = std::sqrt(-2.0 * std::log(r2) / r2);
    cached_ = v * f;
    have_cached_ = true;
    return mu + sd * u * f;
  }

  // Index sampled proportionally to non-negative weights.
  size_t categorical(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    assert(total > 0.0);
    double u = uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return w.size() - 1;
  }

private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t s_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

} // namespace vsp

#endif
