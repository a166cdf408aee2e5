#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace ivl {

// Counter-free splitmix64 generator. Used everywhere instead of <random> so
// that streams are identical across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // in [0, n)
  uint64_t below(uint64_t n) { return next_u64() % n; }

  // Box-Muller; consumes two uniforms per pair, caches the second draw.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  uint64_t state() const { return state_; }

  // Deterministic stream derivation: mixes the key words into a fresh seed.
  // Used for per-(seed, epoch, sample) streams so results are independent of
  // thread scheduling and batch boundaries.
  static Rng derive(uint64_t seed, uint64_t a, uint64_t b = 0x6A09E667F3BCC909ull) {
    Rng r(seed);
    uint64_t h = r.next_u64();
    h ^= a + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    Rng r2(h);
    uint64_t h2 = r2.next_u64();
    h2 ^= b + 0x9E3779B97F4A7C15ull + (h2 << 6) + (h2 >> 2);
    return Rng(h2);
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Seeded in-place Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = size_t(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace ivl
