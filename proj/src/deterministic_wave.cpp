#include "ecm/deterministic_wave.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "ecm/errors.hpp"

namespace ecm {

namespace {

std::uint64_t bits_for(std::uint64_t n) {
  return n <= 1 ? 1 : static_cast<std::uint64_t>(std::bit_width(n - 1));
}

}  // namespace

DeterministicWave::DeterministicWave(const WindowConfig& config)
    : config_(config.validated()) {
  per_level_ = static_cast<std::uint64_t>(
      std::ceil((1.0 / config_.epsilon + 1.0) / 2.0));
  while ((per_level_ << top_level_) < config_.capacity && top_level_ < 62) {
    ++top_level_;
  }
}

RingBuffer<DeterministicWave::Entry>& DeterministicWave::level(
    std::size_t index) {
  while (levels_.size() <= index) {
    levels_.emplace_back(level_capacity(levels_.size()));
  }
  return levels_[index];
}

void DeterministicWave::insert(Timestamp at, std::uint64_t count) {
  if (rank_ > 0 && at < last_arrival_) {
    throw OrderingError("arrival at " + std::to_string(at) +
                        " precedes previous arrival " +
                        std::to_string(last_arrival_));
  }
  if (count == 0) return;
  if (rank_ == 0) first_arrival_ = at;
  for (std::uint64_t i = 0; i < count; ++i) insert_one(at);
  last_arrival_ = at;
}

void DeterministicWave::insert_one(Timestamp at) {
  const std::uint64_t rank = rank_ + 1;
  const std::size_t lvl = std::min<std::size_t>(
      static_cast<std::size_t>(std::countr_zero(rank)), top_level_);
  auto& ring = level(lvl);
  if (ring.full()) {
    if (lvl == top_level_) {
      if (in_suffix(ring.front().ts, at, config_.length)) {
        throw CapacityError("deterministic wave sized for " +
                            std::to_string(config_.capacity) +
                            " arrivals per window overflowed");
      }
      floor_ = ring.front();
      has_floor_ = true;
    }
    ring.pop_front();
  }
  ring.push_back({at, rank});
  rank_ = rank;
}

std::pair<std::uint64_t, std::uint64_t> DeterministicWave::bracket(
    Timestamp cut) const {
  std::uint64_t below = has_floor_ ? floor_.rank : 0;
  std::uint64_t above = rank_;
  for (const auto& ring : levels_) {
    std::size_t idx =
        ring.partition_point([&](const Entry& e) { return e.ts <= cut; });
    if (idx < ring.size()) above = std::min(above, ring[idx].rank);
    if (idx > 0) below = std::max(below, ring[idx - 1].rank);
  }
  return {below, above};
}

std::pair<std::uint64_t, std::uint64_t> DeterministicWave::bounds(
    std::uint64_t range, Timestamp now) const {
  check_range(config_, range);
  if (rank_ > 0 && now < last_arrival_) {
    throw OrderingError("query time precedes the last arrival");
  }
  if (rank_ == 0) return {0, 0};
  if (now < range) return {rank_, rank_};
  const Timestamp cut = now - range;
  if (last_arrival_ <= cut) return {0, 0};
  if (first_arrival_ > cut) return {rank_, rank_};
  auto [below, above] = bracket(cut);
  return {rank_ - above + 1, rank_ - below};
}

std::uint64_t DeterministicWave::query(std::uint64_t range,
                                       Timestamp now) const {
  auto [lo, hi] = bounds(range, now);
  if (lo == hi) return lo;
  // lo counts the bit that closes the straddling gap; hi - lo + 1 is the
  // gap size.
  const std::uint64_t gap = hi - lo + 1;
  return lo - 1 + (gap + 1) / 2;
}

std::vector<BucketSpan> DeterministicWave::buckets() const {
  std::vector<Entry> entries;
  const std::uint64_t base = has_floor_ ? floor_.rank : 0;
  for (const auto& ring : levels_) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
      if (ring[i].rank > base) entries.push_back(ring[i]);
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.rank < b.rank; });
  std::vector<BucketSpan> out;
  out.reserve(entries.size());
  Entry prev = has_floor_ ? floor_ : Entry{first_arrival_, 0};
  for (const Entry& e : entries) {
    out.push_back({prev.ts, e.ts, e.rank - prev.rank});
    prev = e;
  }
  return out;
}

std::size_t DeterministicWave::entry_count() const {
  std::size_t n = 0;
  for (const auto& ring : levels_) n += ring.size();
  return n;
}

DeterministicWave DeterministicWave::merge(
    std::span<const DeterministicWave* const> inputs, double epsilon_prime) {
  if (inputs.empty()) throw ConfigError("merge needs at least one input");
  WindowConfig out_config = inputs.front()->config();
  out_config.epsilon = epsilon_prime;
  out_config.capacity = 0;
  std::vector<std::vector<BucketSpan>> logs;
  for (const DeterministicWave* in : inputs) {
    const WindowConfig& c = in->config();
    if (c.mode != WindowMode::time_based) {
      throw UnsupportedMergeError(
          "count-based deterministic waves cannot be merged in order");
    }
    if (c.length != out_config.length) {
      throw IncompatibleError("merge inputs cover different window lengths");
    }
    out_config.capacity += c.capacity;
    logs.push_back(in->buckets());
  }
  DeterministicWave out(out_config);
  for (const ReplayEvent& ev : replay_schedule(logs)) out.insert(ev.at, ev.bits);
  return out;
}

std::uint64_t DeterministicWave::model_bits() const {
  const std::uint64_t ts_bits = bits_for(config_.length);
  const std::uint64_t rank_bits = bits_for(2 * config_.capacity);
  return entry_count() * (ts_bits + rank_bits) +
         levels_.size() * bits_for(per_level_ + 2);
}

std::size_t DeterministicWave::memory_bytes() const {
  std::size_t bytes = sizeof(*this);
  for (const auto& ring : levels_) {
    bytes += sizeof(ring) + ring.capacity() * sizeof(Entry);
  }
  return bytes;
}

void DeterministicWave::serialize_payload(ByteWriter& out) const {
  out.u64(rank_);
  out.u64(last_arrival_);
  out.u64(first_arrival_);
  out.u8(has_floor_ ? 1 : 0);
  out.u64(floor_.ts);
  out.u64(floor_.rank);
  out.u32(static_cast<std::uint32_t>(levels_.size()));
  for (const auto& ring : levels_) {
    out.u32(static_cast<std::uint32_t>(ring.size()));
    for (std::size_t i = 0; i < ring.size(); ++i) {
      out.u64(ring[i].ts);
      out.u64(ring[i].rank);
    }
  }
}

DeterministicWave DeterministicWave::deserialize_payload(
    const WindowConfig& config, ByteReader& in) {
  DeterministicWave dw(config);
  dw.rank_ = in.u64();
  dw.last_arrival_ = in.u64();
  dw.first_arrival_ = in.u64();
  dw.has_floor_ = in.u8() != 0;
  dw.floor_.ts = in.u64();
  dw.floor_.rank = in.u64();
  std::size_t levels = in.count(4);
  if (levels > dw.top_level_ + 1u) throw FormatError("too many wave levels");
  for (std::size_t lvl = 0; lvl < levels; ++lvl) {
    std::size_t n = in.count(16);
    auto& ring = dw.level(lvl);
    if (n > ring.capacity()) throw FormatError("wave level overfull");
    for (std::size_t i = 0; i < n; ++i) {
      Entry e;
      e.ts = in.u64();
      e.rank = in.u64();
      ring.push_back(e);
    }
  }
  return dw;
}

}  // namespace ecm
