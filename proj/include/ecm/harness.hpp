#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecm/ecm_sketch.hpp"
#include "ecm/geo_monitor.hpp"
#include "ecm/streams.hpp"

namespace ecm {

inline constexpr int kReportSchema = 1;

struct ExperimentOptions {
  std::string stream = "zipf:1.0,65536,100000";
  double epsilon = 0.1;
  double delta = 0.1;
  Backend backend = Backend::eh;
  QueryProfile profile = QueryProfile::point;
  std::uint64_t window = 1'000'000;
  WindowMode mode = WindowMode::time_based;
  std::size_t nodes = 1;
  std::uint64_t seed = 1;
  std::size_t key_cap = 100'000;  // point queries per range, sampled beyond this
  std::vector<Backend> bench_backends{Backend::eh, Backend::dw, Backend::rw};
};

struct RangeRow {
  std::string query;  // "point" or "self_join"
  std::uint64_t range = 0;
  bool skipped = false;  // range exceeds the window
  std::size_t queries = 0;
  double avg_error = 0.0;
  double max_error = 0.0;
  double bound = 0.0;  // analytic guarantee for this query type
};

struct TreeSummary {
  std::size_t nodes = 1;
  unsigned height = 0;
  double centralized_point = 0.0;
  double distributed_point = 0.0;
  double point_ratio = 1.0;
  double centralized_self_join = 0.0;
  double distributed_self_join = 0.0;
  double self_join_ratio = 1.0;
  double bound_ratio = 1.0;  // distributed : centralized point guarantee
  // Mean absolute counter (window synopsis) error, before the Count-Min
  // minimum; isolates the aggregation loss from hash collisions.
  double centralized_counter = 0.0;
  double distributed_counter = 0.0;
  double counter_ratio = 1.0;
  std::uint64_t network_bytes = 0;
  std::size_t frames = 0;
};

struct BenchRow {
  Backend backend = Backend::eh;
  std::size_t events = 0;
  double seconds = 0.0;
  double rate = 0.0;  // updates per second
  double p50_ns = 0.0;
  double p99_ns = 0.0;
  double max_ns = 0.0;
};

struct ExperimentReport {
  std::string command;
  ExperimentOptions options;
  std::string stream_description;
  std::size_t events = 0;
  Timestamp now = 0;
  std::vector<RangeRow> rows;
  MemoryReport memory;
  std::optional<TreeSummary> tree;
  std::vector<BenchRow> bench;
  std::optional<MonitorSummary> monitor;
  // Wall-clock ingest rate of the measured sketch; never written to the
  // deterministic report files.
  double update_rate = 0.0;
  std::vector<std::uint8_t> frame;  // serialized final sketch, if any
};

// Query ranges 10^i, stopping at the first one covering the whole stream.
std::vector<std::uint64_t> range_ladder(Timestamp now);

// Arrivals expanded to one event per unit in count mode, so the oracle and
// the sketch agree on ordinals.
std::vector<StreamEvent> prepare_stream(const std::vector<StreamEvent>& events,
                                        WindowMode mode);

EcmSketch make_sketch(const ExperimentOptions& options, Backend backend);

// Mean |counter estimate - exact counter| over all cells and in-window
// ranges of the ladder.
double counter_error(const EcmSketch& sketch, const std::vector<StreamEvent>& events,
                     std::uint64_t window, Timestamp now);

// Per-range error rows of `sketch` against the exact oracle.
std::vector<RangeRow> evaluate(const EcmSketch& sketch,
                               const std::vector<StreamEvent>& events,
                               const ExperimentOptions& options, Timestamp now);

ExperimentReport run_replay(const ExperimentOptions& options);
ExperimentReport run_tree(const ExperimentOptions& options);
ExperimentReport run_bench(const ExperimentOptions& options);
ExperimentReport run_monitor_report(const MonitorConfig& config);

void write_table(std::ostream& out, const ExperimentReport& report);
void write_csv(std::ostream& out, const ExperimentReport& report);
std::string summary_json(const ExperimentReport& report);
// report.csv, summary.json, and the sketch frame (or monitor log) in `dir`.
void write_outputs(const std::filesystem::path& dir,
                   const ExperimentReport& report);

}  // namespace ecm
