#include "ecm/exact_oracle.hpp"

#include <algorithm>
#include <string>

#include "ecm/errors.hpp"

namespace ecm {

ExactWindowStore::ExactWindowStore(std::uint64_t window, WindowMode mode)
    : window_(window), mode_(mode) {
  if (window == 0) throw ConfigError("window length must be positive");
}

void ExactWindowStore::add(Timestamp at, Key key, std::uint64_t value) {
  if (value == 0) throw DomainError("event value must be positive");
  if (!events_.empty() && at < events_.back().ts) {
    throw OrderingError("arrival at " + std::to_string(at) +
                        " precedes previous arrival " +
                        std::to_string(events_.back().ts));
  }
  events_.push_back({at, key, value});
}

std::vector<ExactWindowStore::Event>::const_iterator
ExactWindowStore::suffix_begin(std::uint64_t range, Timestamp now) const {
  if (range == 0 || range > window_) {
    throw RangeError("query range " + std::to_string(range) +
                     " outside (0, " + std::to_string(window_) + "]");
  }
  if (now < last_arrival()) {
    throw OrderingError("query time precedes the last arrival");
  }
  return std::partition_point(
      events_.begin(), events_.end(),
      [&](const Event& e) { return !in_suffix(e.ts, now, range); });
}

std::uint64_t ExactWindowStore::frequency(Key key, std::uint64_t range,
                                          Timestamp now) const {
  std::uint64_t total = 0;
  for (auto it = suffix_begin(range, now); it != events_.end(); ++it) {
    if (it->key == key) total += it->value;
  }
  return total;
}

std::uint64_t ExactWindowStore::l1(std::uint64_t range, Timestamp now) const {
  std::uint64_t total = 0;
  for (auto it = suffix_begin(range, now); it != events_.end(); ++it) {
    total += it->value;
  }
  return total;
}

std::uint64_t ExactWindowStore::range_count(Key lo, Key hi,
                                            std::uint64_t range,
                                            Timestamp now) const {
  std::uint64_t total = 0;
  for (auto it = suffix_begin(range, now); it != events_.end(); ++it) {
    if (it->key >= lo && it->key <= hi) total += it->value;
  }
  return total;
}

std::map<Key, std::uint64_t> ExactWindowStore::frequencies(
    std::uint64_t range, Timestamp now) const {
  std::map<Key, std::uint64_t> out;
  for (auto it = suffix_begin(range, now); it != events_.end(); ++it) {
    out[it->key] += it->value;
  }
  return out;
}

std::uint64_t ExactWindowStore::self_join(std::uint64_t range,
                                          Timestamp now) const {
  std::uint64_t total = 0;
  for (const auto& [key, f] : frequencies(range, now)) total += f * f;
  return total;
}

std::vector<std::pair<Key, std::uint64_t>> ExactWindowStore::heavy(
    double threshold, std::uint64_t range, Timestamp now) const {
  std::vector<std::pair<Key, std::uint64_t>> out;
  for (const auto& [key, f] : frequencies(range, now)) {
    if (static_cast<double>(f) >= threshold) out.emplace_back(key, f);
  }
  return out;
}

std::vector<std::pair<Key, std::uint64_t>> ExactWindowStore::heavy_fraction(
    double phi, std::uint64_t range, Timestamp now) const {
  return heavy(phi * static_cast<double>(l1(range, now)), range, now);
}

std::uint64_t ExactWindowStore::inner(const ExactWindowStore& a,
                                      const ExactWindowStore& b,
                                      std::uint64_t range, Timestamp now) {
  const auto fa = a.frequencies(range, now);
  const auto fb = b.frequencies(range, now);
  std::uint64_t total = 0;
  for (const auto& [key, f] : fa) {
    auto it = fb.find(key);
    if (it != fb.end()) total += f * it->second;
  }
  return total;
}

}  // namespace ecm
