#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rtransfer {

// splitmix64 output finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64 bit. Used for stable ids of direction strings.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the random stream owned by one corpus line.
///
/// The stream depends only on the global seed, the direction id string
/// ("src-tgt") and the line index, so lines can be processed in any order
/// or in parallel and editing one line never shifts another line's noise.
constexpr std::uint64_t line_stream_seed(std::uint64_t global_seed, std::string_view direction_id,
                                         std::uint64_t line_index) noexcept {
  std::uint64_t s = splitmix64(global_seed);
  s = splitmix64(s ^ fnv1a64(direction_id));
  return splitmix64(s ^ line_index);
}

/// Reproducible generator: std::mt19937_64 with our own range reduction,
/// because the standard distributions are not portable across libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    // Rejection sampling over the largest multiple of `bound`.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > limit);
    return static_cast<std::size_t>(x % bound);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rtransfer
