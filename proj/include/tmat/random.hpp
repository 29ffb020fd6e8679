#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmat {

/// Seeded random source with a fixed, portable draw discipline. The raw
/// stream is std::mt19937_64, whose output sequence is pinned down by the
/// standard, and every derived quantity below is defined in terms of that
/// stream, so equal seeds give equal draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform on [0, 1): the top 53 bits of one draw, scaled by 2^-53.
  double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Box-Muller cosine branch; consumes exactly
  /// two uniforms per draw (no caching of the sine mate).
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer on [0, n) by rejection, free of modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t min = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= min) return x % n;
    }
  }

  /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    if (k > n)
      throw std::invalid_argument(
          "Rng::sample_without_replacement: cannot draw " + std::to_string(k) +
          " of " + std::to_string(n));
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i)
      std::swap(pool[i], pool[i + below(n - i)]);
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 gen_;
};

namespace detail {

/// splitmix64 finalizer: a fixed 64-bit bijective mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Fold a coordinate path into a base seed, one mix step per component.
/// Parallel and serial sweeps that address a cell by the same path draw
/// from identical child streams.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::span<const std::uint64_t> path) {
  std::uint64_t s = base;
  for (std::uint64_t v : path)
    s = detail::mix64(s + 0x9e3779b97f4a7c15ULL * (v + 1));
  return s;
}

inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  return derive_seed(base,
                     std::span<const std::uint64_t>(path.begin(), path.size()));
}

/// Stable 64-bit tag for a double-valued coordinate (IEEE-754 bit image).
inline std::uint64_t seed_tag(double v) { return std::bit_cast<std::uint64_t>(v); }

}  // namespace tmat
