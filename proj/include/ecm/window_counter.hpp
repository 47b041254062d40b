#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ecm/binary_io.hpp"
#include "ecm/deterministic_wave.hpp"
#include "ecm/exponential_histogram.hpp"
#include "ecm/randomized_wave.hpp"
#include "ecm/sketch_plan.hpp"

namespace ecm {

// One sliding-window counter of an ECM-sketch, backed by any of the three
// synopses. Also owns the "ECMW" frame format.
class WindowCounter {
 public:
  using Impl = std::variant<ExponentialHistogram, DeterministicWave,
                            RandomizedWave>;

  static constexpr std::uint16_t kVersion = 1;

  WindowCounter(Backend backend, const WindowConfig& window,
                const RwParams& rw = {});
  explicit WindowCounter(Impl impl) : impl_(std::move(impl)) {}

  // `value` true bits at `at`; `key` seeds randomized-wave event ids.
  void insert(Timestamp at, std::uint64_t value, std::uint64_t key = 0);
  double query(std::uint64_t range, Timestamp now) const;

  static WindowCounter merge(std::span<const WindowCounter* const> inputs,
                             double epsilon_prime,
                             std::optional<std::uint64_t> capacity = {});

  Backend backend() const { return static_cast<Backend>(impl_.index()); }
  const WindowConfig& config() const;
  bool has_arrivals() const;
  Timestamp last_arrival() const;
  std::uint64_t model_bits() const;
  std::size_t memory_bytes() const;
  // Bucket view for the deterministic backends (empty for RW).
  std::vector<BucketSpan> buckets() const;

  const Impl& impl() const { return impl_; }

  void serialize(ByteWriter& out) const;
  std::vector<std::uint8_t> serialize() const;
  static WindowCounter deserialize(ByteReader& in);
  static WindowCounter deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const WindowCounter&, const WindowCounter&) = default;

 private:
  Impl impl_;
};

}  // namespace ecm
