#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "ecm/binary_io.hpp"
#include "ecm/hashing.hpp"
#include "ecm/window.hpp"

namespace ecm {

struct RwParams {
  double delta = 0.1;
  double constant = 36.0;  // c in the per-level cap c / eps^2
  std::uint64_t seed = 0;

  friend bool operator==(const RwParams&, const RwParams&) = default;
};

// Identity of one true bit fed to a randomized wave. Level membership is a
// function of this id only, so the same event is sampled identically no
// matter which wave (local or aggregated) it is inserted into.
constexpr std::uint64_t rw_event_id(std::uint64_t key, Timestamp at,
                                    std::uint64_t occurrence) {
  return mix64(key ^ mix64(at * 0x9e3779b97f4a7c15ULL + occurrence));
}

// Randomized wave: level l samples each event with probability 2^-l (nested,
// by the trailing zeros of a seeded pairwise-independent hash of the event
// id) and keeps only its ceil(c/eps^2) most recent samples. A query uses the
// lowest level that has not discarded anything inside the range and scales
// its count by 2^l. ceil(ln(1/delta)) independent copies are kept and the
// median estimate is returned.
class RandomizedWave {
 public:
  struct Event {
    Timestamp ts = 0;
    std::uint64_t id = 0;
    friend auto operator<=>(const Event&, const Event&) = default;
  };

  struct Level {
    std::deque<Event> events;  // sorted by (ts, id)
    std::optional<Event> evicted;  // newest sample dropped for the cap

    bool empty() const { return events.empty() && !evicted; }
    friend bool operator==(const Level&, const Level&) = default;
  };

  RandomizedWave(const WindowConfig& config, const RwParams& params);

  void insert_event(Timestamp at, std::uint64_t id);
  void insert(Timestamp at, std::uint64_t count = 1);

  double query(std::uint64_t range, Timestamp now) const;
  double query(std::uint64_t range) const { return query(range, last_arrival_); }

  // Lossless aggregation: level l of the result is the union of the inputs'
  // level l, sorted by timestamp and cut to the cap. When `capacity` calls
  // for more levels than the inputs have, the extra levels are filled by
  // rehashing the survivors of each input's deepest level. Inputs must share
  // window, epsilon, delta, c and seed.
  static RandomizedWave merge(std::span<const RandomizedWave* const> inputs,
                              std::optional<std::uint64_t> capacity = {});

  const WindowConfig& config() const { return config_; }
  const RwParams& params() const { return params_; }
  std::size_t cap() const { return cap_; }
  std::size_t level_count() const { return levels_; }
  std::size_t copies() const { return copies_; }
  // Level `lvl` of copy `copy`; levels never populated read as empty.
  const Level& level(std::size_t copy, std::size_t lvl) const;
  // Deepest level the event belongs to in the given copy (before capping).
  unsigned sample_level(std::size_t copy, std::uint64_t id) const;
  std::size_t entry_count() const;
  bool has_arrivals() const { return seen_; }
  Timestamp last_arrival() const { return last_arrival_; }

  std::uint64_t model_bits() const;
  std::size_t memory_bytes() const;

  // Parameters travel in the frame header; the payload is state only.
  void serialize_payload(ByteWriter& out) const;
  static RandomizedWave deserialize_payload(const WindowConfig& config,
                                            const RwParams& params,
                                            ByteReader& in);

  // Structural equality; unpopulated levels compare equal to empty ones.
  friend bool operator==(const RandomizedWave& a, const RandomizedWave& b);

 private:
  void expire(Timestamp now);
  Level& mutable_level(std::size_t copy, std::size_t lvl);
  static void push_sorted(std::deque<Event>& events, const Event& e);

  WindowConfig config_;
  RwParams params_;
  std::size_t cap_ = 1;
  std::size_t levels_ = 1;
  std::size_t copies_ = 1;
  std::vector<MultiplyShift> hashes_;
  std::vector<std::vector<Level>> data_;  // [copy][level], grown lazily
  Timestamp last_arrival_ = 0;
  bool seen_ = false;
};

}  // namespace ecm
