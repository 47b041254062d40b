#include "ecm/randomized_wave.hpp"

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

const RandomizedWave::Level& empty_level() {
  static const RandomizedWave::Level level;
  return level;
}

}  // namespace

RandomizedWave::RandomizedWave(const WindowConfig& config,
                               const RwParams& params)
    : config_(config.validated()), params_(params) {
  if (!(params_.delta > 0.0 && params_.delta < 1.0)) {
    throw ConfigError("randomized wave delta must lie in (0,1)");
  }
  if (!(params_.constant > 0.0)) {
    throw ConfigError("randomized wave constant must be positive");
  }
  cap_ = static_cast<std::size_t>(
      std::ceil(params_.constant / (config_.epsilon * config_.epsilon)));
  // Enough levels that the expected in-window sample of the deepest level
  // stays below half the cap.
  levels_ = 1;
  while ((static_cast<double>(cap_) / 2.0) *
                 std::ldexp(1.0, static_cast<int>(levels_ - 1)) <
             static_cast<double>(config_.capacity) &&
         levels_ < 64) {
    ++levels_;
  }
  copies_ = static_cast<std::size_t>(
      std::max(1.0, std::ceil(std::log(1.0 / params_.delta))));
  std::uint64_t state = params_.seed ^ 0x5257415645ULL;
  for (std::size_t c = 0; c < copies_; ++c) {
    hashes_.push_back(MultiplyShift::from_seed(state));
  }
  data_.resize(copies_);
}

unsigned RandomizedWave::sample_level(std::size_t copy,
                                      std::uint64_t id) const {
  std::uint64_t h = hashes_[copy](id);
  return h == 0 ? 64u : static_cast<unsigned>(std::countr_zero(h));
}

const RandomizedWave::Level& RandomizedWave::level(std::size_t copy,
                                                   std::size_t lvl) const {
  const auto& levels = data_[copy];
  return lvl < levels.size() ? levels[lvl] : empty_level();
}

RandomizedWave::Level& RandomizedWave::mutable_level(std::size_t copy,
                                                     std::size_t lvl) {
  auto& levels = data_[copy];
  if (levels.size() <= lvl) levels.resize(lvl + 1);
  return levels[lvl];
}

void RandomizedWave::push_sorted(std::deque<Event>& events, const Event& e) {
  if (events.empty() || !(e < events.back())) {
    events.push_back(e);
    return;
  }
  events.insert(std::upper_bound(events.begin(), events.end(), e), e);
}

void RandomizedWave::insert_event(Timestamp at, std::uint64_t id) {
  if (seen_ && at < last_arrival_) {
    throw OrderingError("arrival at " + std::to_string(at) +
                        " precedes previous arrival " +
                        std::to_string(last_arrival_));
  }
  const Event ev{at, id};
  for (std::size_t c = 0; c < copies_; ++c) {
    const std::size_t deepest =
        std::min<std::size_t>(sample_level(c, id), levels_ - 1);
    for (std::size_t lvl = 0; lvl <= deepest; ++lvl) {
      Level& level = mutable_level(c, lvl);
      push_sorted(level.events, ev);
      if (level.events.size() > cap_) {
        const Event dropped = level.events.front();
        level.events.pop_front();
        if (!level.evicted || *level.evicted < dropped) level.evicted = dropped;
      }
    }
  }
  last_arrival_ = at;
  seen_ = true;
  expire(at);
}

void RandomizedWave::insert(Timestamp at, std::uint64_t count) {
  for (std::uint64_t j = 0; j < count; ++j) {
    insert_event(at, rw_event_id(0, at, j));
  }
}

void RandomizedWave::expire(Timestamp now) {
  for (auto& levels : data_) {
    for (Level& level : levels) {
      while (!level.events.empty() &&
             !in_suffix(level.events.front().ts, now, config_.length)) {
        level.events.pop_front();
      }
      // A dropped sample outside the window no longer limits coverage.
      if (level.evicted &&
          !in_suffix(level.evicted->ts, now, config_.length)) {
        level.evicted.reset();
      }
    }
  }
}

double RandomizedWave::query(std::uint64_t range, Timestamp now) const {
  check_range(config_, range);
  if (seen_ && now < last_arrival_) {
    throw OrderingError("query time precedes the last arrival");
  }
  std::vector<double> estimates;
  estimates.reserve(copies_);
  for (std::size_t c = 0; c < copies_; ++c) {
    std::size_t chosen = levels_ - 1;
    for (std::size_t lvl = 0; lvl < levels_; ++lvl) {
      const Level& level = this->level(c, lvl);
      if (!level.evicted || !in_suffix(level.evicted->ts, now, range)) {
        chosen = lvl;
        break;
      }
    }
    const auto& events = level(c, chosen).events;
    auto first = std::partition_point(
        events.begin(), events.end(),
        [&](const Event& e) { return !in_suffix(e.ts, now, range); });
    const auto hits = static_cast<double>(events.end() - first);
    estimates.push_back(std::ldexp(hits, static_cast<int>(chosen)));
  }
  std::sort(estimates.begin(), estimates.end());
  const std::size_t mid = estimates.size() / 2;
  if (estimates.size() % 2 == 1) return estimates[mid];
  return (estimates[mid - 1] + estimates[mid]) / 2.0;
}

RandomizedWave RandomizedWave::merge(
    std::span<const RandomizedWave* const> inputs,
    std::optional<std::uint64_t> capacity) {
  if (inputs.empty()) throw ConfigError("merge needs at least one input");
  const RandomizedWave& first = *inputs.front();
  WindowConfig out_config = first.config();
  if (capacity) out_config.capacity = *capacity;
  Timestamp now = 0;
  bool any = false;
  for (const RandomizedWave* in : inputs) {
    if (in->config().mode != WindowMode::time_based) {
      throw UnsupportedMergeError(
          "count-based randomized waves cannot be merged in order");
    }
    if (in->config().length != first.config().length ||
        in->config().epsilon != first.config().epsilon ||
        !(in->params() == first.params())) {
      throw IncompatibleError(
          "randomized waves differ in window, error or hash seeds");
    }
    if (in->seen_) {
      now = any ? std::max(now, in->last_arrival_) : in->last_arrival_;
      any = true;
    }
  }

  RandomizedWave out(out_config, first.params());
  out.seen_ = any;
  out.last_arrival_ = now;
  const std::uint64_t window = out_config.length;
  std::vector<Event> pool;
  for (std::size_t c = 0; c < out.copies_; ++c) {
    for (std::size_t lvl = 0; lvl < out.levels_; ++lvl) {
      pool.clear();
      std::optional<Event> evicted;
      auto note_evicted = [&](const Event& e) {
        if (in_suffix(e.ts, now, window) && (!evicted || *evicted < e)) {
          evicted = e;
        }
      };
      for (const RandomizedWave* in : inputs) {
        const bool rehash = lvl >= in->levels_;
        const Level& src = in->level(c, rehash ? in->levels_ - 1 : lvl);
        for (const Event& e : src.events) {
          if (!in_suffix(e.ts, now, window)) continue;
          if (rehash && in->sample_level(c, e.id) < lvl) continue;
          pool.push_back(e);
        }
        if (src.evicted) note_evicted(*src.evicted);
      }
      std::sort(pool.begin(), pool.end());
      if (pool.size() > out.cap_) {
        const std::size_t cut = pool.size() - out.cap_;
        note_evicted(pool[cut - 1]);
        pool.erase(pool.begin(), pool.begin() + static_cast<long>(cut));
      }
      if (pool.empty() && !evicted) continue;
      Level& level = out.mutable_level(c, lvl);
      level.events.assign(pool.begin(), pool.end());
      level.evicted = evicted;
    }
  }
  return out;
}

std::size_t RandomizedWave::entry_count() const {
  std::size_t n = 0;
  for (const auto& levels : data_) {
    for (const Level& level : levels) n += level.events.size();
  }
  return n;
}

std::uint64_t RandomizedWave::model_bits() const {
  const std::uint64_t ts_bits = bits_for(config_.length);
  const std::uint64_t pos_bits = bits_for(2 * config_.capacity);
  std::uint64_t populated = 0;
  for (const auto& levels : data_) populated += levels.size();
  // per populated level: a sample counter and the eviction marker
  return entry_count() * (ts_bits + pos_bits) +
         populated * (bits_for(cap_ + 1) + ts_bits);
}

std::size_t RandomizedWave::memory_bytes() const {
  std::size_t bytes = sizeof(*this) + hashes_.size() * sizeof(MultiplyShift);
  for (const auto& levels : data_) {
    bytes += sizeof(levels);
    for (const Level& level : levels) {
      bytes += sizeof(Level) + level.events.size() * sizeof(Event);
    }
  }
  return bytes;
}

void RandomizedWave::serialize_payload(ByteWriter& out) const {
  out.u8(seen_ ? 1 : 0);
  out.u64(last_arrival_);
  out.u32(static_cast<std::uint32_t>(copies_));
  for (const auto& levels : data_) {
    out.u32(static_cast<std::uint32_t>(levels.size()));
    for (const Level& level : levels) {
      out.u8(level.evicted ? 1 : 0);
      out.u64(level.evicted ? level.evicted->ts : 0);
      out.u64(level.evicted ? level.evicted->id : 0);
      out.u32(static_cast<std::uint32_t>(level.events.size()));
      for (const Event& e : level.events) {
        out.u64(e.ts);
        out.u64(e.id);
      }
    }
  }
}

RandomizedWave RandomizedWave::deserialize_payload(const WindowConfig& config,
                                                   const RwParams& params,
                                                   ByteReader& in) {
  RandomizedWave rw(config, params);
  rw.seen_ = in.u8() != 0;
  rw.last_arrival_ = in.u64();
  if (in.u32() != rw.copies_) throw FormatError("wave copy count mismatch");
  for (auto& levels : rw.data_) {
    std::size_t n_levels = in.count(21);
    if (n_levels > rw.levels_) throw FormatError("too many wave levels");
    levels.resize(n_levels);
    for (Level& level : levels) {
      const bool evicted = in.u8() != 0;
      Event marker;
      marker.ts = in.u64();
      marker.id = in.u64();
      if (evicted) level.evicted = marker;
      std::size_t n = in.count(16);
      if (n > rw.cap_) throw FormatError("wave level overfull");
      for (std::size_t i = 0; i < n; ++i) {
        Event e;
        e.ts = in.u64();
        e.id = in.u64();
        level.events.push_back(e);
      }
    }
  }
  return rw;
}

bool operator==(const RandomizedWave& a, const RandomizedWave& b) {
  if (!(a.config_ == b.config_) || !(a.params_ == b.params_) ||
      a.seen_ != b.seen_ || a.last_arrival_ != b.last_arrival_) {
    return false;
  }
  for (std::size_t c = 0; c < a.copies_; ++c) {
    const std::size_t n = std::max(a.data_[c].size(), b.data_[c].size());
    for (std::size_t lvl = 0; lvl < n; ++lvl) {
      if (!(a.level(c, lvl) == b.level(c, lvl))) return false;
    }
  }
  return true;
}

}  // namespace ecm
