#include "ecm/sketch_plan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ecm/errors.hpp"

namespace ecm {

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::eh: return "eh";
    case Backend::dw: return "dw";
    case Backend::rw: return "rw";
  }
  return "?";
}

Backend parse_backend(std::string_view text) {
  if (text == "eh") return Backend::eh;
  if (text == "dw") return Backend::dw;
  if (text == "rw") return Backend::rw;
  throw ConfigError("unknown backend '" + std::string(text) + "'");
}

std::string_view to_string(QueryProfile profile) {
  return profile == QueryProfile::point ? "point" : "inner";
}

QueryProfile parse_profile(std::string_view text) {
  if (text == "point") return QueryProfile::point;
  if (text == "inner") return QueryProfile::inner_product;
  throw ConfigError("unknown query profile '" + std::string(text) + "'");
}

double point_split(double epsilon) { return std::sqrt(1.0 + epsilon) - 1.0; }

double inner_product_split(double epsilon) {
  const double e = epsilon;
  const double a = 9.0 + 9.0 * e +
                   std::sqrt(3.0) *
                       std::sqrt(28.0 + 57.0 * e + 30.0 * e * e + e * e * e);
  const double cbrt_a = std::cbrt(a);
  return -1.0 - (3.0 + 3.0 * e) / (std::pow(3.0, 4.0 / 3.0) * cbrt_a) +
         cbrt_a / std::pow(3.0, 2.0 / 3.0);
}

double randomized_split(double epsilon) {
  const double e = epsilon;
  return (std::sqrt(e * e + 10.0 * e + 9.0) + e - 3.0) / 4.0;
}

double plan_objective(QueryProfile profile, Backend backend, double eps_sw,
                      double eps_cm) {
  (void)profile;
  // Randomized synopses grow with 1/eps^2, deterministic ones with 1/eps.
  const double sw_cost = backend == Backend::rw ? 1.0 / (eps_sw * eps_sw)
                                                : 1.0 / eps_sw;
  return sw_cost / eps_cm;
}

SketchPlan SketchPlan::make(double epsilon, double delta,
                            QueryProfile profile, Backend backend) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("epsilon must lie in (0,1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must lie in (0,1)");
  }
  SketchPlan p;
  p.epsilon = epsilon;
  p.delta = delta;
  p.profile = profile;
  p.backend = backend;
  if (backend == Backend::rw) {
    if (profile == QueryProfile::inner_product) {
      throw ConfigError(
          "inner-product planning is only defined for deterministic windows");
    }
    p.epsilon_sw = randomized_split(epsilon);
    p.delta_sw = delta / 2.0;
    p.delta_cm = delta / 2.0;
  } else {
    p.epsilon_sw = profile == QueryProfile::point ? point_split(epsilon)
                                                  : inner_product_split(epsilon);
    p.delta_cm = delta;
  }
  if (profile == QueryProfile::point) {
    p.epsilon_cm = (epsilon - p.epsilon_sw) / (1.0 + p.epsilon_sw);
  } else {
    const double s = p.epsilon_sw;
    p.epsilon_cm = (epsilon - s * s - 2.0 * s) / ((1.0 + s) * (1.0 + s));
  }
  p.width = static_cast<std::uint32_t>(std::ceil(std::numbers::e / p.epsilon_cm));
  p.depth = static_cast<std::uint32_t>(
      std::max(1.0, std::ceil(std::log(1.0 / p.delta_cm))));
  return p;
}

}  // namespace ecm
