#include "ecm/exponential_histogram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "ecm/errors.hpp"

namespace ecm {

namespace {

std::uint64_t bits_for(std::uint64_t n) {
  return n <= 1 ? 1 : static_cast<std::uint64_t>(std::bit_width(n - 1));
}

}  // namespace

ExponentialHistogram::ExponentialHistogram(const WindowConfig& config)
    : config_(config.validated()),
      k_(static_cast<std::uint64_t>(std::ceil(1.0 / (2.0 * config_.epsilon)))) {
}

void ExponentialHistogram::insert(Timestamp at, std::uint64_t count) {
  if (seen_ && at < last_arrival_) [[unlikely]] {
    throw OrderingError("arrival at " + std::to_string(at) +
                        " precedes previous arrival " +
                        std::to_string(last_arrival_));
  }
  if (count == 0) return;
  const bool was_empty = total_ == 0;
  if (was_empty) {
    tail_start_ = at;
    if (levels_.empty()) levels_.emplace_back(level_limit(0) + 1);
  }
  const std::size_t depth = levels_.size();
  for (std::uint64_t i = 0; i < count; ++i) insert_one(at);
  total_ += count;
  last_arrival_ = at;
  seen_ = true;
  // The oldest bucket only changes when the histogram grows a level.
  if (was_empty || levels_.size() != depth) refresh_expiry();
  if (at >= next_expiry_) expire(at);
}

void ExponentialHistogram::refresh_expiry() {
  if (levels_.empty() || levels_.back().empty()) {
    next_expiry_ = std::numeric_limits<Timestamp>::max();
    return;
  }
  const Timestamp end = levels_.back().front();
  const std::uint64_t n = config_.length;
  next_expiry_ = end > std::numeric_limits<Timestamp>::max() - n
                     ? std::numeric_limits<Timestamp>::max()
                     : end + n;
}

void ExponentialHistogram::insert_one(Timestamp at) {
  auto* ring = &levels_[0];
  ring->push_back(at);
  if (ring->size() <= 2 * k_ + 1) return;
  for (std::size_t lvl = 0;;) {
    // Combine the two oldest buckets; the result ends where the newer did.
    ring->pop_front();
    const Timestamp end = ring->pop_front();
    if (++lvl == levels_.size()) levels_.emplace_back(k_ + 2);
    ring = &levels_[lvl];
    ring->push_back(end);
    if (ring->size() <= k_ + 1) return;
  }
}

void ExponentialHistogram::expire(Timestamp now) {
  while (!levels_.empty()) {
    auto& top = levels_.back();
    if (top.empty()) {
      levels_.pop_back();
      continue;
    }
    if (in_suffix(top.front(), now, config_.length)) break;
    tail_start_ = top.pop_front();
    total_ -= std::uint64_t{1} << (levels_.size() - 1);
  }
  refresh_expiry();
}

std::uint64_t ExponentialHistogram::query(std::uint64_t range,
                                          Timestamp now) const {
  check_range(config_, range);
  if (seen_ && now < last_arrival_) {
    throw OrderingError("query time precedes the last arrival");
  }
  if (total_ == 0) return 0;

  std::uint64_t sum = 0;
  std::uint64_t oldest_size = 0;
  bool oldest_is_tail = false;
  for (std::size_t lvl = 0; lvl < levels_.size(); ++lvl) {
    const auto& ring = levels_[lvl];
    std::size_t first_in = ring.partition_point(
        [&](Timestamp end) { return !in_suffix(end, now, range); });
    std::size_t in_range = ring.size() - first_in;
    if (in_range == 0) break;
    sum += static_cast<std::uint64_t>(in_range) << lvl;
    oldest_size = std::uint64_t{1} << lvl;
    oldest_is_tail = first_in == 0 && lvl + 1 == levels_.size();
    if (first_in > 0) break;
  }
  if (oldest_size == 0) return 0;
  // The oldest bucket is known to lie entirely in range only when it is the
  // tail of the histogram and its first arrival is itself in range.
  if (oldest_is_tail && in_suffix(tail_start_, now, range)) return sum;
  return sum - oldest_size + (oldest_size + 1) / 2;
}

std::vector<BucketSpan> ExponentialHistogram::buckets() const {
  std::vector<BucketSpan> out;
  out.reserve(bucket_count());
  Timestamp start = tail_start_;
  for (std::size_t lvl = levels_.size(); lvl-- > 0;) {
    const auto& ring = levels_[lvl];
    for (std::size_t i = 0; i < ring.size(); ++i) {
      out.push_back({start, ring[i], std::uint64_t{1} << lvl});
      start = ring[i];
    }
  }
  return out;
}

std::size_t ExponentialHistogram::bucket_count() const {
  std::size_t n = 0;
  for (const auto& ring : levels_) n += ring.size();
  return n;
}

ExponentialHistogram ExponentialHistogram::merge(
    std::span<const ExponentialHistogram* const> inputs,
    double epsilon_prime) {
  if (inputs.empty()) throw ConfigError("merge needs at least one input");
  WindowConfig out_config = inputs.front()->config();
  out_config.epsilon = epsilon_prime;
  out_config.capacity = 0;
  std::vector<std::vector<BucketSpan>> logs;
  Timestamp latest = 0;
  bool any = false;
  for (const ExponentialHistogram* in : inputs) {
    const WindowConfig& c = in->config();
    if (c.mode != WindowMode::time_based) {
      throw UnsupportedMergeError(
          "count-based exponential histograms cannot be merged in order");
    }
    if (c.length != out_config.length) {
      throw IncompatibleError("merge inputs cover different window lengths");
    }
    out_config.capacity += c.capacity;
    logs.push_back(in->buckets());
    if (in->has_arrivals()) {
      latest = any ? std::max(latest, in->last_arrival()) : in->last_arrival();
      any = true;
    }
  }
  ExponentialHistogram out(out_config);
  for (const ReplayEvent& ev : replay_schedule(logs)) out.insert(ev.at, ev.bits);
  if (any) {
    out.seen_ = true;
    out.last_arrival_ = std::max(out.last_arrival_, latest);
    out.expire(out.last_arrival_);
  }
  return out;
}

std::uint64_t ExponentialHistogram::model_bits() const {
  std::uint64_t ts_bits = bits_for(config_.length);
  std::uint64_t count_bits = bits_for(2 * k_ + 2);
  return bucket_count() * ts_bits + levels_.size() * count_bits;
}

std::size_t ExponentialHistogram::memory_bytes() const {
  std::size_t bytes = sizeof(*this);
  for (const auto& ring : levels_) {
    bytes += sizeof(ring) + ring.capacity() * sizeof(Timestamp);
  }
  return bytes;
}

void ExponentialHistogram::serialize_payload(ByteWriter& out) const {
  out.u8(seen_ ? 1 : 0);
  out.u64(last_arrival_);
  out.u64(tail_start_);
  out.u32(static_cast<std::uint32_t>(levels_.size()));
  for (const auto& ring : levels_) {
    out.u32(static_cast<std::uint32_t>(ring.size()));
    for (std::size_t i = 0; i < ring.size(); ++i) out.u64(ring[i]);
  }
}

ExponentialHistogram ExponentialHistogram::deserialize_payload(
    const WindowConfig& config, ByteReader& in) {
  ExponentialHistogram eh(config);
  eh.seen_ = in.u8() != 0;
  eh.last_arrival_ = in.u64();
  eh.tail_start_ = in.u64();
  std::size_t levels = in.count(4);
  for (std::size_t lvl = 0; lvl < levels; ++lvl) {
    const std::size_t n = in.count(8);
    if (n > eh.level_limit(lvl)) throw FormatError("histogram level overfull");
    eh.levels_.emplace_back(eh.level_limit(lvl) + 1);
    for (std::size_t i = 0; i < n; ++i) {
      eh.levels_.back().push_back(in.u64());
      eh.total_ += std::uint64_t{1} << lvl;
    }
  }
  eh.refresh_expiry();
  return eh;
}

double eh_error_for_levels(double target_epsilon, unsigned levels) {
  if (levels == 0) throw ConfigError("aggregation needs at least one level");
  if (!(target_epsilon > 0.0 && target_epsilon < 1.0)) {
    throw ConfigError("target epsilon must lie in (0,1)");
  }
  const double h = levels;
  return (std::sqrt(1.0 + 2.0 * h + h * h + 4.0 * h * target_epsilon) - 1.0 -
          h) /
         (2.0 * h);
}

double multi_level_error(double epsilon, unsigned levels) {
  return levels * epsilon * (1.0 + epsilon) + epsilon;
}

}  // namespace ecm
