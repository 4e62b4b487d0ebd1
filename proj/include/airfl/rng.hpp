#pragma once

#include <cstdint>
#include <random>

namespace airfl {

// splitmix64: used both as a seed mixer and to derive independent stream
// seeds from (base, tag...) tuples. All randomness in the library flows
// through explicit seeds derived this way; there is no global RNG.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return splitmix64(base ^ splitmix64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1,
                                 std::uint64_t tag2) {
  return derive_seed(derive_seed(base, tag1), tag2);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1,
                                 std::uint64_t tag2, std::uint64_t tag3) {
  return derive_seed(derive_seed(base, tag1, tag2), tag3);
}

// mt19937_64 with hand-rolled canonical/normal draws so the byte stream per
// seed is fixed by this header, not by the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  // Uniform on [0, 1): 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller pair, one value cached.
  double gaussian() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cache_ = r * std::sin(a);
    have_cache_ = true;
    return r * std::cos(a);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

}  // namespace airfl
