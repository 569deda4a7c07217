#pragma once

// Counter-based pseudo-random streams.
//
// Every value is a pure function of (key, counter) computed with
// Philox-4x32-10, so a draw never depends on how many draws happened
// before it on another thread. Child streams are keyed by split_seed,
// which evaluates Philox in a separate counter domain.

#include <array>
#include <cstdint>

namespace gcs::rng {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Ten-round Philox 4x32 block function.
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Seed of the `index`-th child of `seed`.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

class CounterStream {
 public:
  explicit CounterStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  /// 64 random bits at an absolute counter; does not advance the stream.
  std::uint64_t bits_at(std::uint64_t counter) const;

  /// Uniform double in [0, 1) with 53 bits of resolution at an absolute counter.
  double uniform_at(std::uint64_t counter) const;

  std::uint64_t next_bits() { return bits_at(counter_++); }
  double next_uniform() { return uniform_at(counter_++); }

  /// Unbiased integer in [0, n); n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  CounterStream split(std::uint64_t index) const { return CounterStream(split_seed(key_, index)); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gcs::rng
