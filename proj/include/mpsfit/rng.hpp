#pragma once

#include <cstdint>

namespace mpsfit {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based uniform stream. Draw i of a stream keyed by k is a pure
/// function of (k, i), so substreams can be handed to any thread.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  /// Substream for one replication of an experiment.
  static constexpr Stream for_replication(std::uint64_t master_seed,
                                          std::uint64_t replication) noexcept {
    return Stream(mix64(mix64(master_seed) ^ (replication + 0x632be59bd9b4e019ULL)));
  }

  constexpr std::uint64_t next_u64() noexcept {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  /// Uniform on the open interval (0, 1).
  constexpr double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mpsfit
