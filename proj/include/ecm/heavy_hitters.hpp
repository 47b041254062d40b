#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ecm/ecm_sketch.hpp"
#include "ecm/window_counter.hpp"

namespace ecm {

struct DyadicPiece {
  unsigned level = 0;       // piece covers 2^level keys
  std::uint64_t prefix = 0; // key >> level
  friend bool operator==(const DyadicPiece&, const DyadicPiece&) = default;
};

// Canonical (minimal) dyadic cover of [lo, hi] inside a 2^bits universe, with
// pieces no wider than 2^(bits-1). Ordered by increasing key.
std::vector<DyadicPiece> dyadic_decomposition(std::uint64_t lo,
                                              std::uint64_t hi, unsigned bits);

struct HeavyHitterOptions {
  unsigned universe_bits = 16;
  double epsilon = 0.05;
  double delta = 0.1;
  double phi = 0.1;  // smallest fractional threshold the plan is sized for
  Backend backend = Backend::eh;
  // Estimate ||a_r||_1 from a dedicated deterministic wave (its lower bound)
  // instead of the row average of the level-0 sketch.
  bool dedicated_total = false;
};

struct HeavyHitter {
  std::uint64_t key = 0;
  double estimate = 0.0;
};

// One ECM-sketch per dyadic level; level i counts key >> i.
class HeavyHitters {
 public:
  HeavyHitters(const HeavyHitterOptions& options, const WindowConfig& window,
               std::uint64_t seed);

  void add(std::uint64_t key, Timestamp at, std::uint64_t value = 1);

  // Items whose estimate reaches phi * ||a_r||_1 (fractional, 0 < phi < 1).
  std::vector<HeavyHitter> detect(double phi, std::uint64_t range,
                                  Timestamp now) const;
  // Items whose estimate reaches an absolute count.
  std::vector<HeavyHitter> detect_count(double threshold, std::uint64_t range,
                                        Timestamp now) const;

  double range_query(std::uint64_t lo, std::uint64_t hi, std::uint64_t range,
                     Timestamp now) const;
  double total_estimate(std::uint64_t range, Timestamp now) const;

  const HeavyHitterOptions& options() const { return options_; }
  std::uint64_t universe() const { return std::uint64_t{1} << options_.universe_bits; }
  const EcmSketch& level(unsigned i) const { return levels_[i]; }
  unsigned level_count() const { return static_cast<unsigned>(levels_.size()); }
  // Count-Min plan each level was built with.
  const SketchPlan& level_plan() const { return levels_.front().plan(); }
  Timestamp now() const { return levels_.front().now(); }
  MemoryReport memory_report() const;

  std::vector<std::uint8_t> serialize() const;
  static HeavyHitters deserialize(std::span<const std::uint8_t> bytes);

 private:
  HeavyHitters() = default;
  void check_key(std::uint64_t key) const;

  HeavyHitterOptions options_;
  std::vector<EcmSketch> levels_;
  std::optional<WindowCounter> total_;  // dedicated total, if requested
};

}  // namespace ecm
