#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ecm {

// Milliseconds (time-based windows) or arrival ordinal (count-based windows).
using Timestamp = std::uint64_t;

enum class WindowMode : std::uint8_t { time_based = 0, count_based = 1 };

std::string_view to_string(WindowMode mode);
WindowMode parse_window_mode(std::string_view text);

// Shared window-edge predicate. An event stamped `ts` lies inside the suffix
// of length `range` ending at `now` iff ts > now - range. Every synopsis and
// the exact oracle go through this function so their boundaries agree.
constexpr bool in_suffix(Timestamp ts, Timestamp now, std::uint64_t range) {
  return now < range || ts > now - range;
}

struct WindowConfig {
  std::uint64_t length = 0;  // N
  WindowMode mode = WindowMode::time_based;
  double epsilon = 0.1;        // relative error of the synopsis
  std::uint64_t capacity = 0;  // u(N,S); 0 selects the default

  // Throws ConfigError unless N > 0 and 0 < epsilon < 1. Fills in the
  // default capacity (one event per time unit, or N for count windows).
  WindowConfig validated() const;

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

// Validates 0 < range <= N; throws RangeError otherwise.
void check_range(const WindowConfig& config, std::uint64_t range);

}  // namespace ecm
