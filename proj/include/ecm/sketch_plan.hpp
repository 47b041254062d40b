#pragma once

#include <cstdint>
#include <string_view>

namespace ecm {

enum class Backend : std::uint8_t { eh = 0, dw = 1, rw = 2 };
enum class QueryProfile : std::uint8_t { point = 0, inner_product = 1 };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view text);
std::string_view to_string(QueryProfile profile);
QueryProfile parse_profile(std::string_view text);

// Memory-optimal split of a total error budget between the window synopses
// (eps_sw) and the Count-Min array (eps_cm).
struct SketchPlan {
  double epsilon = 0.1;
  double delta = 0.1;
  QueryProfile profile = QueryProfile::point;
  Backend backend = Backend::eh;

  double epsilon_sw = 0.0;
  double epsilon_cm = 0.0;
  double delta_sw = 0.0;  // 0 for the deterministic backends
  double delta_cm = 0.0;
  std::uint32_t width = 1;
  std::uint32_t depth = 1;

  static SketchPlan make(double epsilon, double delta,
                         QueryProfile profile = QueryProfile::point,
                         Backend backend = Backend::eh);

  // Point-query error factor for a given synopsis error.
  double point_bound(double sw) const { return sw + epsilon_cm + sw * epsilon_cm; }
  double point_bound() const { return point_bound(epsilon_sw); }
  double inner_bound(double sw) const {
    return sw * sw + 2.0 * sw + epsilon_cm * (1.0 + sw) * (1.0 + sw);
  }
  double inner_bound() const { return inner_bound(epsilon_sw); }

  friend bool operator==(const SketchPlan&, const SketchPlan&) = default;
};

// Closed-form optimal synopsis errors.
double point_split(double epsilon);
double inner_product_split(double epsilon);
double randomized_split(double epsilon);

// Memory objective each split minimizes (up to constants).
double plan_objective(QueryProfile profile, Backend backend, double eps_sw,
                      double eps_cm);

}  // namespace ecm
