#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "lungaug/core/error.hpp"

namespace lungaug {

namespace detail {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace detail

// Stream key derivation:
//
//   h0 = mix64(master_seed)
//   h1 = mix64(h0 ^ fnv1a64(phase))
//   h2 = mix64(h1 ^ epoch)
//   key = mix64(h2 ^ item_index)
//
// The key seeds a std::mt19937_64. Raw engine output is fully specified by
// the standard; the distribution helpers below are implemented here because
// the std:: distributions are implementation-defined.
constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::string_view phase,
                                   std::uint64_t epoch, std::uint64_t item_index) noexcept {
  std::uint64_t h = detail::mix64(master_seed);
  h = detail::mix64(h ^ detail::fnv1a64(phase));
  h = detail::mix64(h ^ epoch);
  return detail::mix64(h ^ item_index);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key), engine_(key) {}

  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi). Always consumes exactly one draw, also for lo == hi,
  // so stream positions do not depend on parameter values.
  double uniform(double lo, double hi) {
    const double u = uniform01();
    return lo == hi ? lo : lo + (hi - lo) * u;
  }

  // Uniform integer in [lo, hi], rejection-sampled to avoid modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw validation_error("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal by Box-Muller; always consumes two draws.
  double normal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

inline RngStream derive_stream(std::uint64_t master_seed, std::string_view phase,
                               std::uint64_t epoch, std::uint64_t item_index) {
  return RngStream(stream_key(master_seed, phase, epoch, item_index));
}

// In-place Fisher-Yates driven by an RngStream.
template <typename T>
void shuffle(std::vector<T>& items, RngStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace lungaug
