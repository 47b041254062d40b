#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ecm/ecm_sketch.hpp"
#include "ecm/streams.hpp"

namespace ecm {

struct MonitorConfig {
  std::size_t sites = 4;
  double threshold = 3000.0;  // T on the global self-join
  std::uint64_t window = 1000;
  std::uint64_t range = 0;    // query range r; 0 means the whole window
  double epsilon = 0.02;
  double delta = 0.1;
  Backend backend = Backend::eh;
  std::string stream = "burst:1000,200,0.9";
  std::uint64_t seed = 1;

  std::uint64_t query_range() const { return range == 0 ? window : range; }

  // key=value lines; '#' starts a comment.
  static MonitorConfig parse(std::istream& in);
  static MonitorConfig load(const std::string& path);
};

struct BallExtrema {
  double min = 0.0;
  double max = 0.0;
};

// Extrema of ||x||^2 over the ball of the given center and radius.
BallExtrema ball_extrema(std::span<const double> center, double radius);

enum class MessageKind { violation, upload, broadcast };
std::string_view to_string(MessageKind kind);

struct LogRecord {
  Timestamp time = 0;
  int site = -1;  // -1 for the coordinator
  MessageKind kind = MessageKind::violation;
  std::uint64_t bytes = 0;
};

struct SiteEvent {
  std::size_t site = 0;
  StreamEvent event;
};

// Simulated sites plus coordinator tracking whether the self-join of the
// union stream is above or below a threshold. Every site checks its drift
// ball after each local arrival; any violation triggers a full sync.
class GeoMonitor {
 public:
  explicit GeoMonitor(const MonitorConfig& config);

  // Returns true when the arrival caused a synchronization.
  bool observe(std::size_t site, const StreamEvent& event);
  // True when the site's drift ball straddles the threshold in some row.
  bool local_check(std::size_t site, Timestamp now) const;
  void synchronize(Timestamp now);

  // Global estimate vector e: composed grid divided by the site count.
  const std::vector<double>& estimate() const { return estimate_; }
  // Self-join implied by e (min over rows of n^2 ||e_row||^2).
  double estimate_value() const;
  std::vector<double> drift(std::size_t site, Timestamp now) const;
  // Relative self-join error of the composed sketch, times L1^2 gives the
  // guard band around the threshold.
  double error_factor() const;

  const EcmSketch& site_sketch(std::size_t site) const { return sketches_[site]; }
  const std::vector<LogRecord>& log() const { return log_; }
  std::uint64_t bytes() const { return bytes_; }
  std::size_t syncs() const { return syncs_; }
  std::size_t violations() const { return violations_; }
  const MonitorConfig& config() const { return config_; }

 private:
  void record(Timestamp time, int site, MessageKind kind, std::uint64_t bytes);

  MonitorConfig config_;
  SketchPlan plan_;
  std::vector<EcmSketch> sketches_;
  std::vector<std::vector<double>> baseline_;  // site grid at last sync
  std::vector<double> estimate_;
  std::vector<LogRecord> log_;
  std::uint64_t bytes_ = 0;
  std::size_t syncs_ = 0;
  std::size_t violations_ = 0;
};

struct MonitorSummary {
  std::size_t events = 0;
  std::size_t syncs = 0;
  std::size_t violations = 0;
  std::size_t true_crossings = 0;
  std::size_t missed_crossings = 0;
  std::uint64_t bytes = 0;
  std::uint64_t naive_bytes = 0;  // shipping the site sketch after every event
  std::vector<LogRecord> log;

  double savings() const {
    return naive_bytes == 0 ? 0.0
                            : 1.0 - static_cast<double>(bytes) /
                                        static_cast<double>(naive_bytes);
  }
};

std::vector<SiteEvent> assign_round_robin(std::span<const StreamEvent> events,
                                          std::size_t sites);

// Replays the events, checks the protocol against the exact global
// self-join after every event and prices the naive baseline.
MonitorSummary run_monitor(const MonitorConfig& config,
                           std::span<const SiteEvent> events);

void write_log(std::ostream& out, std::span<const LogRecord> log);

}  // namespace ecm
