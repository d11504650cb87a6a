#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ncpf {

namespace detail {

// 64-bit finalizer from splitmix64; used to derive substream ids.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is fully identified by (seed, stream, counter); copies are cheap
/// snapshots and any counter position can be addressed directly, so replay
/// and per-particle parallelism are exact and scheduling-independent. Output
/// is pure integer arithmetic and identical across platforms.
///
/// Each counter value maps to one 128-bit block. Sequential draws consume one
/// counter per draw; the `*_at(slot)` variants read a fixed counter without
/// touching the stream position. A stream should be used either sequentially
/// or slot-addressed, not both.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }
  void set_counter(std::uint64_t c) { counter_ = c; }

  /// Derives an independent substream; the parent is not advanced. Distinct
  /// key tuples give statistically independent streams.
  RngStream fork(std::uint64_t k0, std::uint64_t k1 = 0,
                 std::uint64_t k2 = 0) const {
    std::uint64_t h = stream_;
    h = detail::mix64(h ^ (k0 + 0x9E3779B97F4A7C15ULL));
    h = detail::mix64(h ^ (k1 + 0xC2B2AE3D27D4EB4FULL));
    h = detail::mix64(h ^ (k2 + 0x165667B19E3779F9ULL));
    return RngStream(seed_, h);
  }

  std::uint64_t u64_at(std::uint64_t slot) const {
    const auto b = block(slot);
    return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  }

  /// Uniform double in [0, 1).
  double double_at(std::uint64_t slot) const {
    return static_cast<double>(u64_at(slot) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; one counter slot per draw.
  double normal_at(std::uint64_t slot) const {
    const auto b = block(slot);
    const std::uint64_t w0 = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    const std::uint64_t w1 = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    // u1 in (0,1], u2 in [0,1)
    const double u1 = static_cast<double>((w0 >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(w1 >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t next_u64() { return u64_at(counter_++); }
  double next_double() { return double_at(counter_++); }
  double next_normal() { return normal_at(counter_++); }

  bool operator==(const RngStream& o) const {
    return seed_ == o.seed_ && stream_ == o.stream_ && counter_ == o.counter_;
  }

  /// Raw Philox4x32-10 block for counter value `c` on this stream.
  std::array<std::uint32_t, 4> block(std::uint64_t c) const {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ULL * ctr[0];
      const std::uint64_t p1 = 0xCD9E8D57ULL * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
             static_cast<std::uint32_t>(p0)};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
};

/// Fixed purpose keys for RngStream::fork so every consumer of randomness in
/// the pipeline draws from its own substream.
enum RngLabel : std::uint64_t {
  kRngModelGen = 0x11,
  kRngSimInit = 0x21,
  kRngSimSupport = 0x22,
  kRngSimProcess = 0x23,
  kRngSimMeasurement = 0x24,
  kRngPfInit = 0x31,
  kRngPfResample = 0x32,
  kRngPfNoise = 0x33,
  kRngPfRebirth = 0x34,
};

}  // namespace ncpf
