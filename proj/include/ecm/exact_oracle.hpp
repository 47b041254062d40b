#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ecm/window.hpp"

namespace ecm {

using Key = std::uint64_t;

// Brute-force ground truth over a timestamped multiset. Window membership
// uses the same in_suffix predicate as the synopses.
class ExactWindowStore {
 public:
  struct Event {
    Timestamp ts = 0;
    Key key = 0;
    std::uint64_t value = 1;
  };

  ExactWindowStore(std::uint64_t window, WindowMode mode = WindowMode::time_based);

  void add(Timestamp at, Key key, std::uint64_t value = 1);

  std::uint64_t frequency(Key key, std::uint64_t range, Timestamp now) const;
  std::uint64_t l1(std::uint64_t range, Timestamp now) const;
  std::uint64_t range_count(Key lo, Key hi, std::uint64_t range,
                            Timestamp now) const;
  std::uint64_t self_join(std::uint64_t range, Timestamp now) const;
  std::map<Key, std::uint64_t> frequencies(std::uint64_t range,
                                           Timestamp now) const;
  // Items whose in-range frequency is at least `threshold`.
  std::vector<std::pair<Key, std::uint64_t>> heavy(double threshold,
                                                   std::uint64_t range,
                                                   Timestamp now) const;
  // Same with threshold = phi * l1.
  std::vector<std::pair<Key, std::uint64_t>> heavy_fraction(
      double phi, std::uint64_t range, Timestamp now) const;

  static std::uint64_t inner(const ExactWindowStore& a,
                             const ExactWindowStore& b, std::uint64_t range,
                             Timestamp now);

  const std::vector<Event>& events() const { return events_; }
  std::uint64_t window() const { return window_; }
  WindowMode mode() const { return mode_; }
  Timestamp last_arrival() const { return events_.empty() ? 0 : events_.back().ts; }
  bool empty() const { return events_.empty(); }

 private:
  // First event inside the suffix of length `range` ending at `now`.
  std::vector<Event>::const_iterator suffix_begin(std::uint64_t range,
                                                  Timestamp now) const;

  std::uint64_t window_;
  WindowMode mode_;
  std::vector<Event> events_;
};

}  // namespace ecm
