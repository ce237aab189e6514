#pragma once

// Counter-based random streams.
//
// Every stream is a Philox4x32-10 generator keyed by (seed, replica, role)
// and addressed by a 64-bit substream id, so any consumer can re-derive the
// exact draws of any other without sharing state. The key derivation is
//
//   key64 = splitmix64(splitmix64(seed) ^ (replica * 0x9E3779B97F4A7C15)
//                      ^ fnv1a64(role))
//   key   = (lo32(key64), hi32(key64))
//   ctr   = (lo32(block), hi32(block), lo32(substream), hi32(substream))
//
// and each Philox block yields two 64-bit words (lo word first). Doubles take
// the top 53 bits. Normals use Box-Muller on two consecutive uniforms.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace ergolab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Raw Philox4x32-10 block function.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

struct StreamKey {
  std::uint64_t value = 0;

  static StreamKey derive(std::uint64_t seed, std::uint64_t replica, std::string_view role) {
    return {splitmix64(splitmix64(seed) ^ (replica * 0x9E3779B97F4A7C15ull) ^ fnv1a64(role))};
  }
};

/// A single reproducible random stream. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(StreamKey key, std::uint64_t substream = 0) : key_(key), substream_(substream) {}
  Stream(std::uint64_t seed, std::uint64_t replica, std::string_view role, std::uint64_t substream = 0)
      : Stream(StreamKey::derive(seed, replica, role), substream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (have_spare_word_) {
      have_spare_word_ = false;
      return spare_word_;
    }
    const auto out = philox4x32_10(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(substream_), static_cast<std::uint32_t>(substream_ >> 32)},
        {static_cast<std::uint32_t>(key_.value), static_cast<std::uint32_t>(key_.value >> 32)});
    ++block_;
    spare_word_ = (std::uint64_t{out[3]} << 32) | out[2];
    have_spare_word_ = true;
    return (std::uint64_t{out[1]} << 32) | out[0];
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1), safe for logarithms.
  double uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

  double normal() {
    if (have_spare_normal_) {
      have_spare_normal_ = false;
      return spare_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double theta = 2.0 * M_PI * uniform();
    spare_normal_ = r * std::sin(theta);
    have_spare_normal_ = true;
    return r * std::cos(theta);
  }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  /// Poisson variate: sequential inversion below mean 10, PTRS transformed rejection above.
  std::int64_t poisson(double mean);

  /// Independent stream sharing this key, addressed by a different substream id.
  Stream fork(std::uint64_t substream) const { return Stream(key_, substream); }

  StreamKey key() const { return key_; }

 private:
  StreamKey key_;
  std::uint64_t substream_ = 0;
  std::uint64_t block_ = 0;
  std::uint64_t spare_word_ = 0;
  bool have_spare_word_ = false;
  double spare_normal_ = 0.0;
  bool have_spare_normal_ = false;
};

inline std::int64_t Stream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 10.0) {
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform();
    std::int64_t k = 0;
    while (u > cdf && p > 0.0) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    const double kd = static_cast<double>(k);
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + kd * log_mean - std::lgamma(kd + 1.0))
      return k;
  }
}

}  // namespace ergolab
