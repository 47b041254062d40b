#include "ecm/heavy_hitters.hpp"

#include <string>

#include "ecm/errors.hpp"

namespace ecm {

std::vector<DyadicPiece> dyadic_decomposition(std::uint64_t lo,
                                              std::uint64_t hi,
                                              unsigned bits) {
  if (bits == 0 || bits > 63) throw DomainError("universe bits must be in [1,63]");
  const std::uint64_t universe = std::uint64_t{1} << bits;
  if (lo > hi || hi >= universe) {
    throw DomainError("range [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "] outside the universe");
  }
  std::vector<DyadicPiece> out;
  std::uint64_t at = lo;
  while (true) {
    unsigned level = 0;
    // Grow while the piece stays aligned and inside [at, hi].
    while (level + 1 < bits && (at & ((std::uint64_t{2} << level) - 1)) == 0 &&
           at + (std::uint64_t{2} << level) - 1 <= hi) {
      ++level;
    }
    out.push_back({level, at >> level});
    const std::uint64_t next = at + (std::uint64_t{1} << level);
    if (next - 1 >= hi) break;
    at = next;
  }
  return out;
}

HeavyHitters::HeavyHitters(const HeavyHitterOptions& options,
                           const WindowConfig& window, std::uint64_t seed)
    : options_(options) {
  if (options_.universe_bits == 0 || options_.universe_bits > 63) {
    throw ConfigError("universe bits must be in [1,63]");
  }
  if (!(options_.phi > 0.0 && options_.phi < 1.0)) {
    throw ConfigError("phi must lie in (0,1)");
  }
  // Spread the failure budget over the 2 log|U| / phi group tests.
  const double bits = options_.universe_bits;
  const double level_delta = options_.delta * options_.phi / (2.0 * bits);
  const SketchPlan plan = SketchPlan::make(options_.epsilon, level_delta,
                                           QueryProfile::point, options_.backend);
  for (unsigned i = 0; i < options_.universe_bits; ++i) {
    levels_.emplace_back(plan, window, mix64(seed + i));
  }
  if (options_.dedicated_total) {
    WindowConfig w = levels_.front().window();
    total_.emplace(Backend::dw, w);
  }
}

void HeavyHitters::check_key(std::uint64_t key) const {
  if (key >= universe()) {
    throw DomainError("key " + std::to_string(key) + " outside universe of " +
                      std::to_string(universe()));
  }
}

void HeavyHitters::add(std::uint64_t key, Timestamp at, std::uint64_t value) {
  check_key(key);
  const Timestamp before = levels_.front().now();
  for (unsigned i = 0; i < levels_.size(); ++i) levels_[i].add(key >> i, at, value);
  if (total_) {
    if (levels_.front().window().mode == WindowMode::count_based) {
      for (Timestamp pos = before + 1; pos <= levels_.front().now(); ++pos) {
        total_->insert(pos, 1);
      }
    } else {
      total_->insert(at, value);
    }
  }
}

double HeavyHitters::total_estimate(std::uint64_t range, Timestamp now) const {
  if (total_) {
    const auto& dw = std::get<DeterministicWave>(total_->impl());
    return static_cast<double>(dw.bounds(range, now).first);
  }
  return levels_.front().total_estimate(range, now);
}

std::vector<HeavyHitter> HeavyHitters::detect(double phi, std::uint64_t range,
                                              Timestamp now) const {
  if (!(phi > 0.0 && phi < 1.0)) throw DomainError("phi must lie in (0,1)");
  return detect_count(phi * total_estimate(range, now), range, now);
}

std::vector<HeavyHitter> HeavyHitters::detect_count(double threshold,
                                                    std::uint64_t range,
                                                    Timestamp now) const {
  std::vector<HeavyHitter> out;
  std::vector<std::uint64_t> frontier{0, 1};
  std::vector<std::uint64_t> next;
  for (unsigned lvl = level_count(); lvl-- > 0;) {
    next.clear();
    for (std::uint64_t prefix : frontier) {
      const double est = levels_[lvl].point_query(prefix, range, now);
      if (est < threshold || est <= 0.0) continue;
      if (lvl == 0) {
        out.push_back({prefix, est});
      } else {
        next.push_back(2 * prefix);
        next.push_back(2 * prefix + 1);
      }
    }
    frontier.swap(next);
  }
  return out;
}

double HeavyHitters::range_query(std::uint64_t lo, std::uint64_t hi,
                                 std::uint64_t range, Timestamp now) const {
  double sum = 0.0;
  for (const DyadicPiece& p : dyadic_decomposition(lo, hi, options_.universe_bits)) {
    sum += levels_[p.level].point_query(p.prefix, range, now);
  }
  return sum;
}

MemoryReport HeavyHitters::memory_report() const {
  MemoryReport r;
  for (const EcmSketch& s : levels_) {
    const MemoryReport m = s.memory_report();
    r.model_bits += m.model_bits;
    r.actual_bytes += m.actual_bytes;
    r.counters += m.counters;
  }
  if (total_) {
    r.model_bits += total_->model_bits();
    r.actual_bytes += total_->memory_bytes();
    r.counters += 1;
  }
  r.model_bytes = (r.model_bits + 7) / 8;
  return r;
}

std::vector<std::uint8_t> HeavyHitters::serialize() const {
  ByteWriter out;
  out.magic("ECMH");
  out.u16(1);
  out.u8(static_cast<std::uint8_t>(options_.universe_bits));
  out.u8(static_cast<std::uint8_t>(options_.backend));
  out.f64(options_.epsilon);
  out.f64(options_.delta);
  out.f64(options_.phi);
  out.u8(total_ ? 1 : 0);
  for (unsigned i = 0; i < levels_.size(); ++i) {
    out.u8(static_cast<std::uint8_t>(i));
    out.blob(levels_[i].serialize());
  }
  if (total_) out.blob(total_->serialize());
  return out.take();
}

HeavyHitters HeavyHitters::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("ECMH");
  if (in.u16() != 1) throw FormatError("unsupported heavy-hitter frame version");
  HeavyHitters hh;
  hh.options_.universe_bits = in.u8();
  const std::uint8_t backend = in.u8();
  if (backend > 2 || hh.options_.universe_bits == 0 ||
      hh.options_.universe_bits > 63) {
    throw FormatError("bad heavy-hitter header");
  }
  hh.options_.backend = static_cast<Backend>(backend);
  hh.options_.epsilon = in.f64();
  hh.options_.delta = in.f64();
  hh.options_.phi = in.f64();
  hh.options_.dedicated_total = in.u8() != 0;
  for (unsigned i = 0; i < hh.options_.universe_bits; ++i) {
    if (in.u8() != i) throw FormatError("heavy-hitter levels out of order");
    hh.levels_.push_back(EcmSketch::deserialize(in.blob()));
  }
  if (hh.options_.dedicated_total) {
    hh.total_.emplace(WindowCounter::deserialize(in.blob()));
  }
  if (!in.at_end()) throw FormatError("trailing bytes after heavy-hitter frame");
  return hh;
}

}  // namespace ecm
