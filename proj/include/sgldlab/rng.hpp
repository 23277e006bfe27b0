#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <Eigen/Core>

namespace sgldlab {

/// Philox4x32 with 10 rounds. Pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finaliser; used to derive child seeds from (seed, tag).
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Counter-based random stream.
///
/// The triple (seed, stream_id, counter) determines every subsequent draw:
/// draw number `c` is lane `c % 2` of the Philox block keyed by `seed` at
/// counter (c / 2, stream_id). Streams are cheap values; copying one and
/// drawing from both copies yields identical sequences.
///
/// Stream-id convention: path p of a run uses stream_id p. Ids at or above
/// `kReservedStreamBase` are reserved for auxiliary consumers (bootstrap,
/// data generation, audits, reference MCMC).
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id,
            std::uint64_t counter = 0)
      : seed_(seed), stream_id_(stream_id), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Same seed, different stream, counter reset.
  RngStream fork(std::uint64_t stream_id) const {
    return RngStream(seed_, stream_id, 0);
  }

  void discard(std::uint64_t n) { counter_ += n; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const RngStream& a, const RngStream& b) {
    return a.seed_ == b.seed_ && a.stream_id_ == b.stream_id_ &&
           a.counter_ == b.counter_;
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
  // Cache of the most recent Philox block; derived state only.
  std::uint64_t cached_block_ = 0;
  bool cache_valid_ = false;
  std::array<std::uint64_t, 2> cache_{};
};

inline constexpr std::uint64_t kReservedStreamBase = std::uint64_t{1} << 63;

namespace stream_ids {
inline constexpr std::uint64_t kBootstrap = kReservedStreamBase + 1;
inline constexpr std::uint64_t kDataStructure = kReservedStreamBase + 2;
inline constexpr std::uint64_t kDataRows = kReservedStreamBase + 3;
inline constexpr std::uint64_t kAudit = kReservedStreamBase + 4;
inline constexpr std::uint64_t kReferenceMcmc = kReservedStreamBase + 5;
inline constexpr std::uint64_t kStabilityProbe = kReservedStreamBase + 6;
}  // namespace stream_ids

/// Uniform on [0, 1) with 53 random bits.
double uniform01(RngStream& rng);

/// Uniform integer on [0, bound). `bound` must be positive.
std::uint64_t uniform_below(RngStream& rng, std::uint64_t bound);

double standard_normal(RngStream& rng);

/// Fills `out` with i.i.d. standard normals.
void gaussian_noise(RngStream& rng, Eigen::Ref<Eigen::VectorXd> out);

/// d i.i.d. standard normal components.
Eigen::VectorXd gaussian_noise(int d, RngStream& rng);

}  // namespace sgldlab
