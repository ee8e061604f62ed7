#include "pimd_kubo/rng.hpp"

#include <cmath>
#include <numbers>

namespace pimd_kubo {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0u,
                          static_cast<std::uint32_t>(StreamTag::SeedDerivation)};
  const auto out = philox4x32_10(ctr, {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

RandomStream::RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t stream_index)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      tag_(static_cast<std::uint32_t>(tag)),
      stream_(stream_index) {}

void RandomStream::refill() {
  // counter = (block_lo, block_hi ^ stream_hi, stream_lo, tag)
  const PhiloxCounter ctr{static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32) ^ static_cast<std::uint32_t>(stream_ >> 32),
                          static_cast<std::uint32_t>(stream_), tag_};
  buffer_ = philox4x32_10(ctr, key_);
  ++block_;
  buffered_ = 4;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open_left()));
  const double phi = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

}  // namespace pimd_kubo
