#include "fbmflow/rng.hpp"

#include <cmath>
#include <numbers>

namespace fbmflow {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline double to_unit(std::uint64_t bits) {
  // (0, 1]: never zero, so the logarithm below is finite.
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

Philox4x64::Block Philox4x64::bijection(Block ctr, std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double NormalStream::next() {
  if (buffered_ == 0) {
    const auto b = philox_.block(block_index_++);
    for (int pair = 0; pair < 2; ++pair) {
      const double u1 = to_unit(b[2 * pair]);
      const double u2 = to_unit(b[2 * pair + 1]);
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double phi = 2.0 * std::numbers::pi * u2;
      buffer_[2 * pair] = r * std::cos(phi);
      buffer_[2 * pair + 1] = r * std::sin(phi);
    }
    buffered_ = 4;
  }
  return buffer_[4 - buffered_--];
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_replication_seed(std::uint64_t base_seed, std::uint64_t replication) {
  return splitmix64(base_seed ^ splitmix64(replication));
}

}  // namespace fbmflow
