#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecm/window.hpp"

namespace ecm {

// One bucket of a deterministic synopsis viewed as a log entry: `size` true
// bits whose timestamps lie in [start, end].
struct BucketSpan {
  Timestamp start = 0;
  Timestamp end = 0;
  std::uint64_t size = 0;

  friend bool operator==(const BucketSpan&, const BucketSpan&) = default;
};

// A batch of bits replayed into the merged synopsis.
struct ReplayEvent {
  Timestamp at = 0;
  std::uint64_t bits = 0;
  bool is_end = false;
  std::uint32_t input = 0;
};

// Turns the bucket logs of several synopses into the insertion schedule of
// the order-preserving merge: floor(size/2) bits at each bucket start and
// the remaining ceil(size/2) at its end. Events are ordered by timestamp;
// at equal timestamps end-events precede start-events, then inputs in index
// order. Zero-bit events are dropped.
std::vector<ReplayEvent> replay_schedule(
    std::span<const std::vector<BucketSpan>> inputs);

}  // namespace ecm
