#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ecm/binary_io.hpp"
#include "ecm/merge_replay.hpp"
#include "ecm/ring_buffer.hpp"
#include "ecm/window.hpp"

namespace ecm {

// Deterministic wave for basic counting over a sliding window.
//
// Every true bit gets a rank (1, 2, ...). The bit of rank p is recorded in
// exactly one level: the number of trailing zeros of p, capped at the top
// level L. Level i keeps the most recent m = ceil((1/eps + 1)/2) entries,
// the top level m + 1. L is fixed at construction as the smallest level with
// m * 2^L >= u(N,S), so an insert touches one queue and never cascades.
// A query brackets the window start between the closest recorded ranks and
// reports the midpoint of the gap.
class DeterministicWave {
 public:
  struct Entry {
    Timestamp ts = 0;
    std::uint64_t rank = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  explicit DeterministicWave(const WindowConfig& config);

  // Throws OrderingError on a timestamp regression and CapacityError when a
  // still-valid entry would have to be discarded from the top level (more
  // in-window arrivals than the configured capacity).
  void insert(Timestamp at, std::uint64_t count = 1);

  std::uint64_t query(std::uint64_t range, Timestamp now) const;
  std::uint64_t query(std::uint64_t range) const {
    return query(range, last_arrival_);
  }
  // Deterministic lower and upper bounds on the true suffix count.
  std::pair<std::uint64_t, std::uint64_t> bounds(std::uint64_t range,
                                                 Timestamp now) const;

  // Same replay-based aggregation as the exponential histogram; the wave's
  // consecutive recorded ranks play the role of bucket boundaries.
  static DeterministicWave merge(
      std::span<const DeterministicWave* const> inputs, double epsilon_prime);

  // Gaps between consecutive recorded ranks, oldest first. Bits older than
  // the last entry discarded from the top level are not represented.
  std::vector<BucketSpan> buckets() const;

  const WindowConfig& config() const { return config_; }
  std::uint64_t per_level() const { return per_level_; }
  std::uint32_t top_level() const { return top_level_; }
  std::uint64_t arrivals() const { return rank_; }
  std::size_t entry_count() const;
  bool has_arrivals() const { return rank_ > 0; }
  Timestamp last_arrival() const { return last_arrival_; }

  std::uint64_t model_bits() const;
  std::size_t memory_bytes() const;

  void serialize_payload(ByteWriter& out) const;
  static DeterministicWave deserialize_payload(const WindowConfig& config,
                                               ByteReader& in);

  friend bool operator==(const DeterministicWave&,
                         const DeterministicWave&) = default;

 private:
  std::size_t level_capacity(std::size_t level) const {
    return level == top_level_ ? per_level_ + 1 : per_level_;
  }
  RingBuffer<Entry>& level(std::size_t index);
  void insert_one(Timestamp at);
  // Closest recorded ranks at or before / after the cut `ts <= cut`.
  std::pair<std::uint64_t, std::uint64_t> bracket(Timestamp cut) const;

  WindowConfig config_;
  std::uint64_t per_level_ = 1;
  std::uint32_t top_level_ = 0;
  std::vector<RingBuffer<Entry>> levels_;
  std::uint64_t rank_ = 0;
  Timestamp last_arrival_ = 0;
  Timestamp first_arrival_ = 0;
  bool has_floor_ = false;
  Entry floor_;  // most recent entry discarded from the top level
};

}  // namespace ecm
