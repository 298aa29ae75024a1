#pragma once

#include <array>
#include <cstdint>

namespace rcgff {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Stateless: the output is a pure function of
/// (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer. Used to fold coordinates and tags into stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derive an independent 64-bit seed from a master seed and a tag.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix64(master ^ mix64(tag + 0x632BE59BD9B4E019ULL));
}

// Domain-separation tags for the different consumers of a master seed.
namespace stream_tag {
inline constexpr std::uint32_t edge = 1;
inline constexpr std::uint32_t line = 2;
inline constexpr std::uint32_t walk = 3;
inline constexpr std::uint32_t field_sample = 4;
inline constexpr std::uint32_t brownian = 5;
inline constexpr std::uint32_t start_site = 6;
inline constexpr std::uint32_t misc = 7;
}  // namespace stream_tag

/// A counter-based random stream keyed by (seed, stream id, tag).
///
/// Streams with different ids are statistically independent, and the k-th
/// draw of a stream never depends on how many other streams were consumed
/// or in which order, so parallel schedules reproduce serial results bit for
/// bit.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream,
               std::uint32_t tag = stream_tag::misc);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  /// Exponential with the given rate, by inverse CDF.
  double exponential(double rate);
  /// Standard normal (Box-Muller; the spare value is cached).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint32_t tag_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rcgff
