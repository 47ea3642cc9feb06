#pragma once

// Counter-based uniform streams.
//
// Philox4x32-10 (Salmon et al., SC'11) keyed by a 64-bit seed. The 128-bit
// counter is split into a 64-bit block index and a 64-bit stream id, so every
// (seed, stream) pair addresses an independent, random-access sequence of
// uniforms. Independent replications take stream = replication index.

#include <array>
#include <cstdint>

namespace ams {

class Philox4x32 {
public:
  using counter_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  static constexpr counter_type apply(counter_type ctr, key_type key) noexcept {
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr counter_type round(const counter_type& c, const key_type& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Sequential view of one Philox substream. Each call to next() returns one
/// double in the open interval (0, 1) built from 64 random bits (53 used).
class UniformStream {
public:
  UniformStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  double next() noexcept {
    if (lane_ == 2) refill();
    const std::uint64_t bits =
        (std::uint64_t{block_[2 * lane_]} << 32) | block_[2 * lane_ + 1];
    ++lane_;
    ++consumed_;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  double operator()() noexcept { return next(); }

  std::uint64_t seed() const noexcept {
    return (std::uint64_t{key_[1]} << 32) | key_[0];
  }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t consumed() const noexcept { return consumed_; }

private:
  void refill() noexcept {
    const Philox4x32::counter_type ctr{
        static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    block_ = Philox4x32::apply(ctr, key_);
    ++counter_;
    lane_ = 0;
  }

  Philox4x32::key_type key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t consumed_ = 0;
  Philox4x32::counter_type block_{};
  int lane_ = 2;
};

}  // namespace ams
