#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace fbmflow {

/// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
///
/// Output block i is the bijection of counter (i, 0, 0, 0) under the key, so
/// any position in the stream can be reached without stepping through the
/// ones before it. The block layout matches numpy.random.Philox, whose first
/// block is produced from counter 1.
class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;

  explicit Philox4x64(std::uint64_t key0, std::uint64_t key1 = 0) : key_{key0, key1} {}

  static Block bijection(Block counter, std::array<std::uint64_t, 2> key);

  Block block(std::uint64_t index) const { return bijection({index, 0, 0, 0}, key_); }

 private:
  std::array<std::uint64_t, 2> key_;
};

/// Standard normal stream on top of Philox4x64; Box-Muller on 53-bit uniforms
/// so the sequence is identical on every platform.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t key) : philox_(key) {}

  double next();

 private:
  Philox4x64 philox_;
  std::uint64_t block_index_ = 1;
  std::array<double, 4> buffer_{};
  int buffered_ = 0;
};

/// Seed of channel `channel` of a path drawn with `seed`.
constexpr std::uint64_t channel_seed(std::uint64_t seed, std::uint64_t channel) { return seed ^ channel; }

/// SplitMix64 finaliser; used to derive replication seeds from a base seed.
std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_replication_seed(std::uint64_t base_seed, std::uint64_t replication);

inline constexpr std::string_view kRngName = "philox4x64-10+box-muller";

}  // namespace fbmflow
