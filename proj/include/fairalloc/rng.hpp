#pragma once

#include <cstdint>
#include <limits>

namespace fairalloc {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a stream key from a seed and up to three coordinates
/// (e.g. task index, group index, purpose tag). Distinct coordinate tuples
/// give statistically independent streams.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0) noexcept;

/// Counter-based generator: the output sequence is a pure function of the key,
/// so any (trial, task, group) stream can be regenerated without replaying the
/// ones before it. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;

  /// Uniform on the open interval (0, 1); safe to feed into log or negative
  /// powers.
  double uniform_open() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace fairalloc
