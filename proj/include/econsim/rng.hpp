#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>

namespace econsim {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a over the bytes of a label.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based random stream.
///
/// A stream is identified by its key, which is a pure function of the root
/// seed and the path of labels used to derive it. The n-th draw of a stream
/// is mix64(key + n * golden), so two streams with the same (seed, path)
/// always produce the same sequence regardless of when or on which thread
/// they are consumed. Children are derived without touching the parent's
/// counter.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  constexpr RngStream() noexcept : RngStream(0) {}
  constexpr explicit RngStream(std::uint64_t seed) noexcept
      : seed_(seed), key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t draws() const noexcept { return counter_; }

  /// Child stream for a textual label, e.g. "step/3/agent/12".
  constexpr RngStream derive(std::string_view label) const {
    if (label.empty()) throw std::invalid_argument("derive: empty stream label");
    return RngStream(seed_, mix64(key_ ^ mix64(hash_label(label))));
  }

  /// Child stream for an integer index; cheaper than formatting a label.
  constexpr RngStream derive(std::uint64_t index) const noexcept {
    return RngStream(seed_, mix64(key_ + kGolden * (index + 1) + 0x3c6ef372fe94f82bULL));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(*this);
  }

  double lognormal(double log_mean, double log_sd) {
    std::lognormal_distribution<double> dist(log_mean, log_sd);
    return dist(*this);
  }

 private:
  constexpr RngStream(std::uint64_t seed, std::uint64_t key) noexcept
      : seed_(seed), key_(key) {}

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline RngStream derive_stream(const RngStream& parent, std::string_view label) {
  return parent.derive(label);
}

}  // namespace econsim
