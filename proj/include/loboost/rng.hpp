#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace loboost {

/// Counter-based random stream.
///
/// The i-th output is a pure function of (key, i): SplitMix64's finalizer
/// applied to key + i * golden-gamma. Streams are plain values; copying one
/// copies its position. Child streams come from derive(), which hashes a
/// label (FNV-1a 64) into a new key, so no state is ever shared between
/// units of work.
///
/// Two distinct labels collide with probability about 2^-64 per pair.
/// Not suitable for cryptographic use.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next_u64(); }
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); never returns an endpoint.
  double uniform_open();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Standard normal by inverse CDF of uniform_open().
  double normal();

  RngStream derive(std::string_view label) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace loboost
