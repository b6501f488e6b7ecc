#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "oedpm/errors.hpp"

namespace oedpm {

// Counter-based 64-bit mixer (splitmix64). Used both as the per-component
// generator and as the splitting rule that derives independent component
// seeds from a master seed, so results do not depend on execution order.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed of the m-th ensemble component under a master seed. Pure function of
// (master_seed, index): components can be built concurrently in any order.
inline std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64_mix(master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

// Deterministic random stream. All distributions are hand-rolled on top of
// the raw 64-bit output so that sequences are identical across platforms
// and standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) (Lemire rejection).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw UsageError("Rng::below: n must be positive");
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t l = static_cast<std::uint64_t>(m);
    if (l < n) {
      std::uint64_t t = (0 - n) % n;
      while (l < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        l = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Inclusive uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw UsageError("Rng::uniform_int: lo > hi");
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Standard normal via Box-Muller; the spare draw is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential() { return -std::log1p(-uniform()); }

  // n distinct indices from [0, N), partial Fisher-Yates, order as drawn.
  std::vector<std::size_t> sample_without_replacement(std::size_t N, std::size_t n) {
    if (n > N) throw UsageError("sample_without_replacement: n > N");
    std::vector<std::size_t> pool(N);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(N - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    return pool;
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace oedpm
