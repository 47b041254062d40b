#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ecm/exact_oracle.hpp"
#include "ecm/merge_replay.hpp"

namespace testutil {

// C_j <= 2 eps (1 + sum of newer sizes), buckets given oldest first.
// Unit buckets are skipped: their single bit sits at the end timestamp, so
// they never straddle a query boundary.
inline bool invariant_one(const std::vector<ecm::BucketSpan>& buckets,
                          double eps) {
  double newer = 0.0;
  for (auto it = buckets.rbegin(); it != buckets.rend(); ++it) {
    if (it->size > 1 && static_cast<double>(it->size) > 2.0 * eps * (1.0 + newer) + 1e-9) {
      return false;
    }
    newer += static_cast<double>(it->size);
  }
  return true;
}

inline bool within(double estimate, double truth, double rel) {
  return std::abs(estimate - truth) <= rel * truth + 1e-9;
}

// `bits` arrivals spread over [1, span], sorted, possibly repeating.
inline std::vector<ecm::Timestamp> random_times(std::mt19937_64& rng,
                                                std::size_t bits,
                                                ecm::Timestamp span) {
  std::uniform_int_distribution<ecm::Timestamp> pick(1, span);
  std::vector<ecm::Timestamp> ts(bits);
  for (auto& t : ts) t = pick(rng);
  std::sort(ts.begin(), ts.end());
  return ts;
}

inline std::vector<std::uint64_t> range_ladder(std::uint64_t window,
                                               std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 1; i <= count; ++i) {
    out.push_back(std::max<std::uint64_t>(1, window * i / count));
  }
  return out;
}

}  // namespace testutil
