#pragma once

#include <cstdint>
#include <limits>

namespace heatlab {

/// SplitMix64 finalizer, a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream identified by (master seed, stream index).
///
/// The starting state is mix64(seed) ^ mix64(~index), so two streams share no
/// state unless both the seed and the index coincide. Output is a SplitMix64
/// sequence, which satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t index) noexcept
      : seed_(seed), index_(index), state_(mix64(seed) ^ mix64(~index)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits; platform independent.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Independent child stream, e.g. one per trajectory.
  RngStream substream(std::uint64_t i) const noexcept { return RngStream(mix64(seed_ ^ mix64(index_)), i); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t index() const noexcept { return index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t state_;
};

}  // namespace heatlab
