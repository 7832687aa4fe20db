#pragma once

#include <cstdint>
#include <cmath>

namespace crowdnav {

// SplitMix64 finalizer (Steele, Lea & Flood / Vigna). Bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent stream id from a root seed and a tag path, e.g.
// derive_stream(seed, N, episode_index). Every consumer of randomness owns
// its own derived stream, so traces replay identically on any platform and
// under any scheduling of parallel episodes.
template <typename... Tags>
constexpr std::uint64_t derive_stream(std::uint64_t seed, Tags... tags) {
  std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
  ((h = mix64(h ^ (static_cast<std::uint64_t>(tags) + 0x9E3779B97F4A7C15ULL))), ...);
  return h;
}

// Fixed stream tags, kept distinct so no two subsystems share a stream.
inline constexpr std::uint64_t kStreamScenario = 0x5C3A01;  // placement + goals
inline constexpr std::uint64_t kStreamRespawn = 0x5C3A02;   // pedestrian goal respawn
inline constexpr std::uint64_t kStreamPolicy = 0x5C3A03;    // stochastic ego policies
inline constexpr std::uint64_t kStreamAction = 0x5C3A04;    // training action sampling
inline constexpr std::uint64_t kStreamInit = 0x5C3A05;      // network initialization
inline constexpr std::uint64_t kStreamUpdate = 0x5C3A06;    // minibatch shuffling
inline constexpr std::uint64_t kStreamEnv = 0x5C3A07;       // per-env episode seeds

// Deterministic PRNG: a counter advanced by the golden-ratio increment and
// pushed through the SplitMix64 mixer. Chosen over std::mt19937 because the
// algorithm is tiny, documented, and identical on every platform, which the
// replay guard depends on.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in the inclusive range [lo, hi], bias-free via rejection.
  int uniform_int(int lo, int hi) {
    const std::uint64_t range =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    const std::uint64_t threshold = (0 - range) % range;  // 2^64 mod range
    std::uint64_t r = next();
    while (r < threshold) r = next();
    return static_cast<int>(static_cast<std::uint64_t>(lo) + r % range);
  }

  // Standard normal via Box-Muller; consumes exactly two draws.
  double gaussian() {
    // u1 in (0, 1) so the log is finite.
    const double u1 = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  constexpr std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace crowdnav
