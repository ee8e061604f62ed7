#pragma once

#include <array>
#include <cstdint>

namespace pimd_kubo {

// Philox4x32-10 counter-based generator (Random123 family).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint64_t kMul0 = 0xD2511F53u;
  constexpr std::uint64_t kMul1 = 0xCD9E8D57u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kMul0 * ctr[0];
    const std::uint64_t p1 = kMul1 * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }
  return ctr;
}

// Independent child seed for sub-run `index` (e.g. one grid node).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Stream tags keep independent purposes apart under a common seed.
enum class StreamTag : std::uint32_t {
  ChainMoves = 1,
  Momenta = 2,
  CentroidMomenta = 3,
  SeedDerivation = 4,
  Test = 0xffff,
};

// Deterministic random stream keyed by (seed, tag, stream index). The n-th
// draw depends only on those keys and n, never on scheduling.
class RandomStream {
public:
  RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t stream_index);

  std::uint64_t next_u64() {
    if (buffered_ == 0) refill();
    const std::uint64_t hi = buffer_[4 - buffered_];
    const std::uint64_t lo = buffer_[5 - buffered_];
    buffered_ -= 2;
    ++draw_index_;
    return (hi << 32) | lo;
  }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1].
  double uniform_open_left() { return 1.0 - uniform(); }
  double normal();

  std::uint64_t draws() const { return draw_index_; }

private:
  void refill();

  PhiloxKey key_;
  std::uint32_t tag_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t draw_index_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pimd_kubo
