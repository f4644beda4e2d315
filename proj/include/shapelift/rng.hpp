#pragma once

#include <cstdint>
#include <limits>

namespace shapelift {

// Counter-based 64-bit generator.
//
// Output i of a stream with key K is splitmix64_mix(K + (i + 1) * GAMMA), the
// SplitMix64 finalizer applied to a Weyl sequence. Because every draw is a
// pure function of (key, counter), a substream can be derived from any
// (parent key, index) pair without touching shared state:
//
//   child key = splitmix64_mix(parent key ^ splitmix64_mix(index + GAMMA))
//
// Replicates and bootstrap resamples each receive their own substream, so
// results do not depend on scheduling or thread count.
//
// Satisfies UniformRandomBitGenerator; pair it with boost::random
// distributions, whose algorithms are fixed across platforms.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t derive_key(std::uint64_t parent,
                                            std::uint64_t index) noexcept {
    return mix(parent ^ mix(index + kGamma));
  }

  CounterRng substream(std::uint64_t index) const noexcept {
    return CounterRng(derive_key(key_, index));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace shapelift
