#include "ecm/window.hpp"

#include "ecm/errors.hpp"

namespace ecm {

std::string_view to_string(WindowMode mode) {
  return mode == WindowMode::time_based ? "time" : "count";
}

WindowMode parse_window_mode(std::string_view text) {
  if (text == "time") return WindowMode::time_based;
  if (text == "count") return WindowMode::count_based;
  throw ConfigError("unknown window mode '" + std::string(text) + "'");
}

WindowConfig WindowConfig::validated() const {
  if (length == 0) throw ConfigError("window length must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("window epsilon must lie in (0,1)");
  }
  WindowConfig out = *this;
  if (out.capacity == 0) out.capacity = length;
  return out;
}

void check_range(const WindowConfig& config, std::uint64_t range) {
  if (range == 0 || range > config.length) {
    throw RangeError("query range " + std::to_string(range) +
                     " outside (0, " + std::to_string(config.length) + "]");
  }
}

}  // namespace ecm
