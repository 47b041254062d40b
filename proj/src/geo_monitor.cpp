#include "ecm/geo_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ecm/binary_io.hpp"
#include "ecm/errors.hpp"
#include "ecm/exact_oracle.hpp"

namespace ecm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double norm(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

std::uint64_t violation_frame_bytes(std::size_t site, Timestamp now) {
  ByteWriter w;
  w.magic("ECMX");
  w.u16(1);
  w.u16(static_cast<std::uint16_t>(site));
  w.u64(now);
  return w.data().size();
}

std::uint64_t grid_frame_bytes(const std::vector<double>& grid,
                               std::uint32_t rows, Timestamp now) {
  ByteWriter w;
  w.magic("ECMG");
  w.u16(1);
  w.u32(rows);
  w.u32(static_cast<std::uint32_t>(grid.size() / rows));
  w.u64(now);
  for (double v : grid) w.f64(v);
  return w.data().size();
}

}  // namespace

MonitorConfig MonitorConfig::parse(std::istream& in) {
  MonitorConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n" || key == "sites") c.sites = std::stoull(value);
      else if (key == "T" || key == "threshold") c.threshold = std::stod(value);
      else if (key == "r" || key == "range") c.range = std::stoull(value);
      else if (key == "N" || key == "window") c.window = std::stoull(value);
      else if (key == "eps" || key == "epsilon") c.epsilon = std::stod(value);
      else if (key == "delta") c.delta = std::stod(value);
      else if (key == "backend") c.backend = parse_backend(value);
      else if (key == "stream") c.stream = value;
      else if (key == "seed") c.seed = std::stoull(value);
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("line " + std::to_string(lineno) + ": bad value for '" +
                        key + "'");
    }
  }
  if (c.sites == 0) throw ConfigError("monitor needs at least one site");
  if (c.window == 0) throw ConfigError("window must be positive");
  if (c.range > c.window) throw ConfigError("query range exceeds the window");
  return c;
}

MonitorConfig MonitorConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open monitor config '" + path + "'");
  return parse(in);
}

BallExtrema ball_extrema(std::span<const double> center, double radius) {
  const double c = norm(center);
  const double far = c + radius;
  const double near = std::max(c - radius, 0.0);
  return {near * near, far * far};
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::violation: return "violation";
    case MessageKind::upload: return "upload";
    case MessageKind::broadcast: return "broadcast";
  }
  return "?";
}

GeoMonitor::GeoMonitor(const MonitorConfig& config)
    : config_(config),
      plan_(SketchPlan::make(config.epsilon, config.delta,
                             config.backend == Backend::rw
                                 ? QueryProfile::point
                                 : QueryProfile::inner_product,
                             config.backend)) {
  if (config_.sites == 0) throw ConfigError("monitor needs at least one site");
  const WindowConfig window{config_.window, WindowMode::time_based,
                            plan_.epsilon_sw, 0};
  sketches_.assign(config_.sites, EcmSketch(plan_, window, config_.seed));
  const std::size_t cells = static_cast<std::size_t>(plan_.width) * plan_.depth;
  baseline_.assign(config_.sites, std::vector<double>(cells, 0.0));
  estimate_.assign(cells, 0.0);
}

void GeoMonitor::record(Timestamp time, int site, MessageKind kind,
                        std::uint64_t bytes) {
  log_.push_back({time, site, kind, bytes});
  bytes_ += bytes;
}

std::vector<double> GeoMonitor::drift(std::size_t site, Timestamp now) const {
  std::vector<double> u = sketches_[site].grid(config_.query_range(), now);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = estimate_[i] + (u[i] - baseline_[site][i]);
  }
  return u;
}

bool GeoMonitor::local_check(std::size_t site, Timestamp now) const {
  const std::vector<double> u = drift(site, now);
  const double n2 = static_cast<double>(config_.sites * config_.sites);
  const std::size_t w = plan_.width;
  std::vector<double> center(w);
  for (std::uint32_t row = 0; row < plan_.depth; ++row) {
    double radius_sq = 0.0;
    for (std::size_t col = 0; col < w; ++col) {
      const std::size_t i = row * w + col;
      center[col] = (estimate_[i] + u[i]) / 2.0;
      const double half = (estimate_[i] - u[i]) / 2.0;
      radius_sq += half * half;
    }
    const BallExtrema b = ball_extrema(center, std::sqrt(radius_sq));
    if (n2 * b.min <= config_.threshold && config_.threshold <= n2 * b.max) {
      return true;
    }
  }
  return false;
}

void GeoMonitor::synchronize(Timestamp now) {
  std::vector<const EcmSketch*> inputs;
  for (std::size_t i = 0; i < sketches_.size(); ++i) {
    record(now, static_cast<int>(i), MessageKind::upload,
           sketches_[i].serialize().size());
    inputs.push_back(&sketches_[i]);
  }
  const EcmSketch global = EcmSketch::compose(inputs, plan_.epsilon_sw);
  estimate_ = global.grid(config_.query_range(), now);
  for (double& v : estimate_) v /= static_cast<double>(config_.sites);
  const std::uint64_t frame = grid_frame_bytes(estimate_, plan_.depth, now);
  for (std::size_t i = 0; i < sketches_.size(); ++i) {
    record(now, -1, MessageKind::broadcast, frame);
    baseline_[i] = sketches_[i].grid(config_.query_range(), now);
  }
  ++syncs_;
}

bool GeoMonitor::observe(std::size_t site, const StreamEvent& event) {
  if (site >= sketches_.size()) throw DomainError("unknown site");
  sketches_[site].add(event.key, event.ts, event.value);
  if (!local_check(site, event.ts)) return false;
  ++violations_;
  record(event.ts, static_cast<int>(site), MessageKind::violation,
         violation_frame_bytes(site, event.ts));
  synchronize(event.ts);
  return true;
}

double GeoMonitor::estimate_value() const {
  const double n2 = static_cast<double>(config_.sites * config_.sites);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t row = 0; row < plan_.depth; ++row) {
    double sq = 0.0;
    for (std::size_t col = 0; col < plan_.width; ++col) {
      const double v = estimate_[row * plan_.width + col];
      sq += v * v;
    }
    best = std::min(best, n2 * sq);
  }
  return best;
}

double GeoMonitor::error_factor() const {
  if (config_.backend == Backend::rw) return plan_.inner_bound();
  return plan_.inner_bound(multi_level_error(plan_.epsilon_sw, 1));
}

std::vector<SiteEvent> assign_round_robin(std::span<const StreamEvent> events,
                                          std::size_t sites) {
  if (sites == 0) throw ConfigError("need at least one site");
  std::vector<SiteEvent> out;
  out.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    out.push_back({i % sites, events[i]});
  }
  return out;
}

MonitorSummary run_monitor(const MonitorConfig& config,
                           std::span<const SiteEvent> events) {
  GeoMonitor monitor(config);
  ExactWindowStore truth(config.window);
  // The naive baseline only needs the bytes each site would ship.
  std::vector<EcmSketch> naive;
  for (std::size_t i = 0; i < config.sites; ++i) naive.push_back(monitor.site_sketch(i));
  MonitorSummary s;
  const double factor = monitor.error_factor();
  const std::uint64_t r = config.query_range();
  bool have_prev = false;
  bool prev_above = false;
  for (const SiteEvent& ev : events) {
    monitor.observe(ev.site, ev.event);
    truth.add(ev.event.ts, ev.event.key, ev.event.value);
    naive[ev.site].add(ev.event.key, ev.event.ts, ev.event.value);
    s.naive_bytes += naive[ev.site].serialize().size();
    ++s.events;

    const double exact = static_cast<double>(truth.self_join(r, ev.event.ts));
    const bool above = exact > config.threshold;
    if (have_prev && above != prev_above) ++s.true_crossings;
    have_prev = true;
    prev_above = above;
    // With every site silent, the exact value must sit on the same side of
    // T as the synchronized estimate, up to the sketch error band.
    const double l1 = static_cast<double>(truth.l1(r, ev.event.ts));
    const double guard = factor * l1 * l1;
    const bool estimate_above = monitor.estimate_value() > config.threshold;
    if (above != estimate_above && std::abs(exact - config.threshold) > guard) {
      ++s.missed_crossings;
    }
  }
  s.syncs = monitor.syncs();
  s.violations = monitor.violations();
  s.bytes = monitor.bytes();
  s.log = monitor.log();
  return s;
}

void write_log(std::ostream& out, std::span<const LogRecord> log) {
  for (const LogRecord& rec : log) {
    out << "{\"time\":" << rec.time << ",\"site\":" << rec.site
        << ",\"kind\":\"" << to_string(rec.kind) << "\",\"bytes\":" << rec.bytes
        << "}\n";
  }
}

}  // namespace ecm
