#include "ecm/merge_replay.hpp"

#include <algorithm>
#include <tuple>

namespace ecm {

std::vector<ReplayEvent> replay_schedule(
    std::span<const std::vector<BucketSpan>> inputs) {
  std::vector<ReplayEvent> events;
  for (std::uint32_t i = 0; i < inputs.size(); ++i) {
    for (const BucketSpan& b : inputs[i]) {
      std::uint64_t head = b.size / 2;
      std::uint64_t tail = b.size - head;
      if (head > 0) events.push_back({b.start, head, false, i});
      if (tail > 0) events.push_back({b.end, tail, true, i});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const ReplayEvent& a, const ReplayEvent& b) {
                     return std::make_tuple(a.at, !a.is_end, a.input) <
                            std::make_tuple(b.at, !b.is_end, b.input);
                   });
  return events;
}

}  // namespace ecm
