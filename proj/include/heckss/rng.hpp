#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace heckss {

// splitmix64 finalizer; used for seeding and for deriving child streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Reproducible random stream identified by (seed, stream id).
///
/// The generator is xoshiro256** seeded through splitmix64 from both
/// identifiers. Uniform, normal and exponential variates are generated
/// here, not through <random> distributions.
///
/// An RngStream is a value: copy it to fork an identical sequence, pass it
/// by reference to consume it. It is never shared between threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_(stream_id) {
    std::uint64_t x = mix64(seed) ^ mix64(stream_id ^ 0x5851f42d4c957f2dULL);
    for (auto& word : state_) {
      x = mix64(x);
      word = x;
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  // A new stream keyed on this stream's identity and a child index.
  // Does not consume draws from *this.
  RngStream derive(std::uint64_t child) const noexcept {
    return RngStream(seed_, mix64(stream_ ^ mix64(child + 0x632be59bd9b4e019ULL)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Standard exponential, strictly positive.
  double exponential() noexcept { return -std::log(uniform()); }

  // Standard normal via the Marsaglia polar method; the second variate of
  // each accepted pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace heckss
