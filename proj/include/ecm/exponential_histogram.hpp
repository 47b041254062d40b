#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ecm/binary_io.hpp"
#include "ecm/merge_replay.hpp"
#include "ecm/ring_buffer.hpp"
#include "ecm/window.hpp"

namespace ecm {

// Exponential histogram for basic counting over a sliding window.
//
// Buckets hold power-of-two counts of true bits and are grouped by size into
// fixed-capacity levels; level i holds only buckets of size 2^i, and every
// bucket of level i is older than every bucket of level i-1. With
// k = ceil(1/(2 eps)), level 0 keeps between 2k and 2k+1 buckets and every
// higher level between k and k+1 (the topmost level may hold fewer). This
// keeps C_j <= 2 eps (1 + sum_{i<j} C_i) for every bucket j, so answers have
// relative error at most eps.
class ExponentialHistogram {
 public:
  explicit ExponentialHistogram(const WindowConfig& config);

  // Registers `count` true bits at time `at` and drops buckets that no
  // longer overlap the window. Throws OrderingError if `at` precedes the
  // previous arrival.
  void insert(Timestamp at, std::uint64_t count = 1);

  // Estimated number of true bits with timestamp in (now - range, now].
  // Sums the buckets that lie fully in range plus half (rounded up) of the
  // oldest overlapping bucket. Requires 0 < range <= N and now >= the last
  // arrival.
  std::uint64_t query(std::uint64_t range, Timestamp now) const;
  std::uint64_t query(std::uint64_t range) const {
    return query(range, last_arrival_);
  }

  // Order-preserving aggregation of time-based histograms with the same N.
  // Replays each input as a log (half of every bucket at its start, half at
  // its end) into a fresh histogram with error `epsilon_prime`. Answers are
  // within (eps + eps' + eps*eps') of the union stream, eps being the largest
  // input error. Throws UnsupportedMergeError for count-based inputs.
  static ExponentialHistogram merge(
      std::span<const ExponentialHistogram* const> inputs,
      double epsilon_prime);

  // Buckets, oldest first. The start of the oldest bucket is the first
  // arrival it may contain; every other start is the previous bucket's end.
  std::vector<BucketSpan> buckets() const;

  const WindowConfig& config() const { return config_; }
  std::uint64_t k() const { return k_; }
  std::uint64_t total() const { return total_; }
  std::size_t bucket_count() const;
  std::size_t level_count() const { return levels_.size(); }
  std::size_t level_size(std::size_t level) const {
    return levels_[level].size();
  }
  bool empty() const { return total_ == 0; }
  bool has_arrivals() const { return seen_; }
  Timestamp last_arrival() const { return last_arrival_; }

  // Bits charged by the space model: each bucket stores one wraparound
  // timestamp of ceil(log2 N) bits; each level stores its bucket count.
  std::uint64_t model_bits() const;
  std::size_t memory_bytes() const;

  void serialize_payload(ByteWriter& out) const;
  static ExponentialHistogram deserialize_payload(const WindowConfig& config,
                                                  ByteReader& in);

  friend bool operator==(const ExponentialHistogram&,
                         const ExponentialHistogram&) = default;

 private:
  std::size_t level_limit(std::size_t level) const {
    return level == 0 ? 2 * k_ + 1 : k_ + 1;
  }
  void insert_one(Timestamp at);
  void expire(Timestamp now);
  void refresh_expiry();

  WindowConfig config_;
  std::uint64_t k_ = 1;
  std::vector<RingBuffer<Timestamp>> levels_;  // bucket end times
  std::uint64_t total_ = 0;
  Timestamp last_arrival_ = 0;
  Timestamp tail_start_ = 0;  // earliest timestamp in the oldest bucket
  bool seen_ = false;
  // First time at which the oldest bucket leaves the window.
  Timestamp next_expiry_ = std::numeric_limits<Timestamp>::max();
};

// Per-node error that makes an h-level aggregation hierarchy reach
// `target_epsilon` overall: the root of h(eps(1+eps)) + eps = target.
double eh_error_for_levels(double target_epsilon, unsigned levels);

// Worst-case relative error after h pairwise aggregation levels of
// histograms that all use error eps.
double multi_level_error(double epsilon, unsigned levels);

}  // namespace ecm
