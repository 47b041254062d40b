#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ecm/window.hpp"

namespace ecm {

struct StreamEvent {
  Timestamp ts = 0;
  std::uint64_t key = 0;
  std::uint64_t value = 1;
  friend bool operator==(const StreamEvent&, const StreamEvent&) = default;
};

// Either a file of `ts<TAB>key[<TAB>value]` lines or a generator:
//   zipf:s,K,M     M arrivals over keys [0,K) with P(rank i) ~ 1/i^s
//   uniform:K,M    M uniform arrivals over [0,K)
//   hot:K,M,p      one planted key with mass p, the rest uniform over [0,K)
//   burst:K,M,p    first half uniform, second half planted with mass p
// Generated arrival i carries timestamp i+1.
struct StreamSpec {
  enum class Kind { file, zipf, uniform, hot, burst };
  Kind kind = Kind::zipf;
  std::string path;
  double skew = 1.0;
  std::uint64_t keys = 1;
  std::uint64_t count = 0;
  double hot_mass = 0.0;
  std::uint64_t seed = 1;

  static StreamSpec parse(std::string_view text, std::uint64_t seed);
  std::string describe() const;
};

// The key the hot generator plants for a given seed and key space.
std::uint64_t planted_key(std::uint64_t keys, std::uint64_t seed);

std::vector<StreamEvent> generate(const StreamSpec& spec);
std::vector<StreamEvent> read_stream(std::istream& in);
std::vector<StreamEvent> read_stream_file(const std::string& path);
std::vector<StreamEvent> load_stream(const StreamSpec& spec);

}  // namespace ecm
