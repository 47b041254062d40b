#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ecm/hashing.hpp"
#include "ecm/sketch_plan.hpp"
#include "ecm/window_counter.hpp"

namespace ecm {

using Key = std::uint64_t;

struct MemoryReport {
  std::uint64_t model_bits = 0;   // log-encoded timestamps, per-counter model
  std::uint64_t model_bytes = 0;  // ceil(model_bits / 8)
  std::size_t actual_bytes = 0;   // in-memory footprint of this process
  std::size_t counters = 0;
};

// Count-Min array whose cells are sliding-window counters.
class EcmSketch {
 public:
  static constexpr std::uint16_t kVersion = 1;

  // `window.epsilon` is ignored; counters use plan.epsilon_sw. In count mode
  // the sketch stamps every unit of value with its own arrival ordinal.
  EcmSketch(const SketchPlan& plan, const WindowConfig& window,
            std::uint64_t master_seed, double rw_constant = 36.0);

  void add(Key key, Timestamp at, std::uint64_t value = 1);
  void add(std::string_view key, Timestamp at, std::uint64_t value = 1) {
    add(key_hash(key), at, value);
  }

  double point_query(Key key, std::uint64_t range, Timestamp now) const;
  double point_query(Key key, std::uint64_t range) const {
    return point_query(key, range, now());
  }
  std::vector<double> row_estimates(Key key, std::uint64_t range,
                                    Timestamp now) const;

  static double inner_product(const EcmSketch& a, const EcmSketch& b,
                              std::uint64_t range, Timestamp now);
  double self_join(std::uint64_t range, Timestamp now) const;
  double self_join(std::uint64_t range) const { return self_join(range, now()); }

  // Counter estimates for one range, row-major (row * width + column).
  std::vector<double> grid(std::uint64_t range, Timestamp now) const;
  // ||a_r||_1 estimate: average over rows of the row sums.
  double total_estimate(std::uint64_t range, Timestamp now) const;

  // Order-preserving aggregation, counter by counter. Deterministic backends
  // rebuild each counter with error epsilon_prime; randomized waves merge
  // losslessly and ignore it.
  static EcmSketch compose(std::span<const EcmSketch* const> inputs,
                           double epsilon_prime);

  bool compatible_with(const EcmSketch& other) const;

  // Error factor of the synopses after the recorded merge depth.
  double window_error() const;
  double point_error_bound() const { return plan_.point_bound(window_error()); }
  double inner_error_bound() const { return plan_.inner_bound(window_error()); }

  MemoryReport memory_report() const;

  std::vector<std::uint8_t> serialize() const;
  static EcmSketch deserialize(std::span<const std::uint8_t> bytes);

  const SketchPlan& plan() const { return plan_; }
  const WindowConfig& window() const { return window_; }
  std::uint32_t width() const { return plan_.width; }
  std::uint32_t depth() const { return plan_.depth; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::uint32_t merge_depth() const { return merge_depth_; }
  double node_epsilon() const { return node_epsilon_; }
  Timestamp now() const { return now_; }
  bool empty() const { return !seen_; }
  std::size_t column(std::uint32_t row, Key key) const {
    return hashes_[row].bucket(key, plan_.width);
  }
  const WindowCounter& counter(std::uint32_t row, std::size_t col) const {
    return counters_[row * plan_.width + col];
  }

  friend bool operator==(const EcmSketch&, const EcmSketch&) = default;

 private:
  EcmSketch() = default;
  void init_hashes();
  RwParams row_params(std::uint32_t row) const;

  SketchPlan plan_;
  WindowConfig window_;  // epsilon = plan_.epsilon_sw
  std::uint64_t master_seed_ = 0;
  double rw_constant_ = 36.0;
  std::uint32_t merge_depth_ = 0;
  double node_epsilon_ = 0.0;  // largest synopsis epsilon in the merge tree
  std::vector<MultiplyShift> hashes_;
  std::vector<WindowCounter> counters_;
  Timestamp now_ = 0;
  bool seen_ = false;
};

}  // namespace ecm
