#include "ecm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "ecm/errors.hpp"
#include "ecm/exact_oracle.hpp"
#include "json.hpp"

namespace ecm {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(9) << v;
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<StreamEvent> load_events(const ExperimentOptions& o) {
  return prepare_stream(load_stream(StreamSpec::parse(o.stream, o.seed)), o.mode);
}

void ingest(EcmSketch& sketch, const std::vector<StreamEvent>& events) {
  for (const StreamEvent& e : events) sketch.add(e.key, e.ts, e.value);
}

double ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

// Query-weighted mean of the non-skipped rows of one kind.
double mean_error(const std::vector<RangeRow>& rows, const std::string& query) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const RangeRow& r : rows) {
    if (r.skipped || r.query != query) continue;
    sum += r.avg_error * static_cast<double>(r.queries);
    n += r.queries;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double percentile(std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
  return sorted[idx];
}

std::string describe_stream(const ExperimentOptions& o) {
  return StreamSpec::parse(o.stream, o.seed).describe();
}

}  // namespace

std::vector<std::uint64_t> range_ladder(Timestamp now) {
  std::vector<std::uint64_t> out;
  if (now == 0) return out;
  for (std::uint64_t r = 1;; r *= 10) {
    out.push_back(r);
    if (r >= now || r >= std::numeric_limits<std::uint64_t>::max() / 10) break;
  }
  return out;
}

std::vector<StreamEvent> prepare_stream(const std::vector<StreamEvent>& events,
                                        WindowMode mode) {
  if (mode == WindowMode::time_based) return events;
  std::vector<StreamEvent> out;
  Timestamp pos = 0;
  for (const StreamEvent& e : events) {
    for (std::uint64_t u = 0; u < e.value; ++u) out.push_back({++pos, e.key, 1});
  }
  return out;
}

EcmSketch make_sketch(const ExperimentOptions& o, Backend backend) {
  const SketchPlan plan = SketchPlan::make(o.epsilon, o.delta, o.profile, backend);
  const WindowConfig window{o.window, o.mode, plan.epsilon_sw, 0};
  return EcmSketch(plan, window, o.seed);
}

std::vector<RangeRow> evaluate(const EcmSketch& sketch,
                               const std::vector<StreamEvent>& events,
                               const ExperimentOptions& o, Timestamp now) {
  ExactWindowStore oracle(o.window, o.mode);
  for (const StreamEvent& e : events) oracle.add(e.ts, e.key, e.value);
  std::vector<RangeRow> rows;
  for (std::uint64_t r : range_ladder(now)) {
    RangeRow point{"point", r, r > o.window, 0, 0.0, 0.0, sketch.point_error_bound()};
    RangeRow join{"self_join", r, r > o.window, 0, 0.0, 0.0, sketch.inner_error_bound()};
    if (!point.skipped) {
      const auto freqs = oracle.frequencies(r, now);
      const double l1 = static_cast<double>(oracle.l1(r, now));
      std::vector<std::pair<Key, std::uint64_t>> keys(freqs.begin(), freqs.end());
      if (keys.size() > o.key_cap) {
        std::mt19937_64 rng(o.seed ^ 0x6b657973ULL);
        std::shuffle(keys.begin(), keys.end(), rng);
        keys.resize(o.key_cap);
      }
      double sum = 0.0;
      for (const auto& [key, f] : keys) {
        const double err =
            std::abs(sketch.point_query(key, r, now) - static_cast<double>(f)) / l1;
        sum += err;
        point.max_error = std::max(point.max_error, err);
      }
      point.queries = keys.size();
      point.avg_error = keys.empty() ? 0.0 : sum / static_cast<double>(keys.size());

      join.queries = 1;
      if (l1 > 0) {
        const double exact = static_cast<double>(oracle.self_join(r, now));
        join.avg_error = std::abs(sketch.self_join(r, now) - exact) / (l1 * l1);
      }
      join.max_error = join.avg_error;
    }
    rows.push_back(point);
    rows.push_back(join);
  }
  return rows;
}

double counter_error(const EcmSketch& sketch, const std::vector<StreamEvent>& events,
                     std::uint64_t window, Timestamp now) {
  double sum = 0.0;
  std::size_t cells = 0;
  for (std::uint64_t r : range_ladder(now)) {
    if (r > window) break;
    std::vector<double> exact(static_cast<std::size_t>(sketch.width()) * sketch.depth(), 0.0);
    for (const StreamEvent& e : events) {
      if (!in_suffix(e.ts, now, r)) continue;
      for (std::uint32_t row = 0; row < sketch.depth(); ++row) {
        exact[row * sketch.width() + sketch.column(row, e.key)] += static_cast<double>(e.value);
      }
    }
    const auto est = sketch.grid(r, now);
    for (std::size_t i = 0; i < est.size(); ++i) sum += std::abs(est[i] - exact[i]);
    cells += est.size();
  }
  return cells == 0 ? 0.0 : sum / static_cast<double>(cells);
}

ExperimentReport run_replay(const ExperimentOptions& o) {
  ExperimentReport rep;
  rep.command = "replay";
  rep.options = o;
  rep.stream_description = describe_stream(o);
  const auto events = load_events(o);
  EcmSketch sketch = make_sketch(o, o.backend);
  const auto start = Clock::now();
  ingest(sketch, events);
  const double secs = seconds_since(start);
  rep.events = events.size();
  rep.now = sketch.now();
  rep.update_rate = secs > 0 ? static_cast<double>(events.size()) / secs : 0.0;
  rep.rows = evaluate(sketch, events, o, rep.now);
  rep.memory = sketch.memory_report();
  rep.frame = sketch.serialize();
  return rep;
}

ExperimentReport run_tree(const ExperimentOptions& o) {
  if (o.nodes == 0) throw ConfigError("tree needs at least one node");
  if (o.mode == WindowMode::count_based) {
    throw UnsupportedMergeError("count-based windows cannot be aggregated");
  }
  ExperimentReport rep;
  rep.command = "tree";
  rep.options = o;
  rep.stream_description = describe_stream(o);
  const auto events = load_events(o);

  EcmSketch central = make_sketch(o, o.backend);
  const auto start = Clock::now();
  ingest(central, events);
  const double secs = seconds_since(start);
  rep.update_rate = secs > 0 ? static_cast<double>(events.size()) / secs : 0.0;

  std::vector<EcmSketch> layer(o.nodes, make_sketch(o, o.backend));
  for (std::size_t i = 0; i < events.size(); ++i) {
    const StreamEvent& e = events[i];
    layer[i % o.nodes].add(e.key, e.ts, e.value);
  }

  TreeSummary t;
  t.nodes = o.nodes;
  const double eps_prime = central.plan().epsilon_sw;
  // Children ship their frames to the parent, which decodes and merges.
  while (layer.size() > 1) {
    std::vector<EcmSketch> next;
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
      const auto a = layer[i].serialize();
      const auto b = layer[i + 1].serialize();
      t.network_bytes += a.size() + b.size();
      t.frames += 2;
      const EcmSketch da = EcmSketch::deserialize(a);
      const EcmSketch db = EcmSketch::deserialize(b);
      const EcmSketch* inputs[] = {&da, &db};
      next.push_back(EcmSketch::compose(inputs, eps_prime));
    }
    if (layer.size() % 2 == 1) next.push_back(std::move(layer.back()));
    layer = std::move(next);
    ++t.height;
  }
  const EcmSketch& root = layer.front();

  rep.events = events.size();
  rep.now = central.now();
  const auto central_rows = evaluate(central, events, o, rep.now);
  rep.rows = evaluate(root, events, o, rep.now);
  t.centralized_point = mean_error(central_rows, "point");
  t.distributed_point = mean_error(rep.rows, "point");
  t.point_ratio = ratio(t.distributed_point, t.centralized_point);
  t.centralized_self_join = mean_error(central_rows, "self_join");
  t.distributed_self_join = mean_error(rep.rows, "self_join");
  t.self_join_ratio = ratio(t.distributed_self_join, t.centralized_self_join);
  t.bound_ratio = ratio(root.point_error_bound(), central.point_error_bound());
  t.centralized_counter = counter_error(central, events, o.window, rep.now);
  t.distributed_counter = counter_error(root, events, o.window, rep.now);
  t.counter_ratio = ratio(t.distributed_counter, t.centralized_counter);
  rep.tree = t;
  rep.memory = root.memory_report();
  rep.frame = root.serialize();
  return rep;
}

ExperimentReport run_bench(const ExperimentOptions& o) {
  ExperimentReport rep;
  rep.command = "bench";
  rep.options = o;
  rep.stream_description = describe_stream(o);
  const auto events = load_events(o);
  rep.events = events.size();
  for (Backend b : o.bench_backends) {
    ExperimentOptions ob = o;
    // Randomized waves only carry the point-query plan.
    if (b == Backend::rw) ob.profile = QueryProfile::point;
    BenchRow row;
    row.backend = b;
    row.events = events.size();
    double best = std::numeric_limits<double>::infinity();
    for (int rep_i = 0; rep_i < 3; ++rep_i) {
      EcmSketch sketch = make_sketch(ob, b);
      const auto start = Clock::now();
      ingest(sketch, events);
      best = std::min(best, seconds_since(start));
    }
    row.seconds = best;
    row.rate = best > 0 ? static_cast<double>(events.size()) / best : 0.0;

    EcmSketch sketch = make_sketch(ob, b);
    std::vector<double> lat;
    lat.reserve(events.size());
    for (const StreamEvent& e : events) {
      const auto s = Clock::now();
      sketch.add(e.key, e.ts, e.value);
      lat.push_back(std::chrono::duration<double, std::nano>(Clock::now() - s).count());
    }
    std::sort(lat.begin(), lat.end());
    row.p50_ns = percentile(lat, 0.5);
    row.p99_ns = percentile(lat, 0.99);
    row.max_ns = lat.empty() ? 0.0 : lat.back();
    rep.bench.push_back(row);
  }
  return rep;
}

ExperimentReport run_monitor_report(const MonitorConfig& config) {
  ExperimentReport rep;
  rep.command = "monitor";
  rep.options.stream = config.stream;
  rep.options.epsilon = config.epsilon;
  rep.options.delta = config.delta;
  rep.options.backend = config.backend;
  rep.options.window = config.window;
  rep.options.nodes = config.sites;
  rep.options.seed = config.seed;
  rep.stream_description = StreamSpec::parse(config.stream, config.seed).describe();
  const auto events = load_stream(StreamSpec::parse(config.stream, config.seed));
  const auto assigned = assign_round_robin(events, config.sites);
  rep.monitor = run_monitor(config, assigned);
  rep.events = events.size();
  rep.now = events.empty() ? 0 : events.back().ts;
  return rep;
}

void write_table(std::ostream& out, const ExperimentReport& rep) {
  const ExperimentOptions& o = rep.options;
  out << rep.command << ": " << rep.stream_description << ", " << rep.events
      << " events\n";
  if (rep.command != "monitor") {
    out << "  backend=" << to_string(o.backend) << " eps=" << num(o.epsilon)
        << " delta=" << num(o.delta) << " profile=" << to_string(o.profile)
        << " window=" << o.window
        << " mode=" << (o.mode == WindowMode::time_based ? "time" : "count") << "\n";
  }
  if (!rep.rows.empty()) {
    out << "  " << std::left << std::setw(10) << "query" << std::right
        << std::setw(12) << "range" << std::setw(9) << "queries" << std::setw(14)
        << "avg_err" << std::setw(14) << "max_err" << std::setw(12) << "bound" << "\n";
    for (const RangeRow& r : rep.rows) {
      out << "  " << std::left << std::setw(10) << r.query << std::right
          << std::setw(12) << r.range;
      if (r.skipped) {
        out << "  skipped (range exceeds window)\n";
        continue;
      }
      out << std::setw(9) << r.queries << std::setw(14) << num(r.avg_error)
          << std::setw(14) << num(r.max_error) << std::setw(12) << num(r.bound) << "\n";
    }
  }
  if (rep.command == "replay" || rep.command == "tree") {
    out << "  memory: model " << rep.memory.model_bytes << " B, actual "
        << rep.memory.actual_bytes << " B, " << rep.memory.counters << " counters\n";
    out << "  update rate: " << num(rep.update_rate) << " events/s\n";
  }
  if (rep.tree) {
    const TreeSummary& t = *rep.tree;
    out << "  tree: " << t.nodes << " nodes, height " << t.height << ", "
        << t.frames << " frames, " << t.network_bytes << " bytes\n"
        << "  point error centralized:distributed " << num(t.centralized_point)
        << ":" << num(t.distributed_point) << " ratio " << num(t.point_ratio)
        << " (bound " << num(t.bound_ratio) << ")\n"
        << "  self-join error centralized:distributed "
        << num(t.centralized_self_join) << ":" << num(t.distributed_self_join)
        << " ratio " << num(t.self_join_ratio) << "\n"
        << "  counter error centralized:distributed " << num(t.centralized_counter)
        << ":" << num(t.distributed_counter) << " ratio " << num(t.counter_ratio) << "\n";
  }
  for (const BenchRow& b : rep.bench) {
    out << "  " << std::left << std::setw(4) << to_string(b.backend) << std::right
        << std::setw(14) << num(b.rate) << " updates/s  p50 " << num(b.p50_ns)
        << " ns  p99 " << num(b.p99_ns) << " ns  max " << num(b.max_ns) << " ns\n";
  }
  if (rep.monitor) {
    const MonitorSummary& m = *rep.monitor;
    out << "  sites=" << o.nodes << " syncs=" << m.syncs
        << " violations=" << m.violations << " true_crossings=" << m.true_crossings
        << " missed=" << m.missed_crossings << "\n"
        << "  bytes=" << m.bytes << " naive_bytes=" << m.naive_bytes
        << " savings=" << num(m.savings()) << "\n";
  }
}

void write_csv(std::ostream& out, const ExperimentReport& rep) {
  out << "# schema=" << kReportSchema << " command=" << rep.command << "\n";
  out << "kind,name,range,status,count,avg_error,max_error,bound,rate,p50_ns,p99_ns,max_ns\n";
  for (const RangeRow& r : rep.rows) {
    out << "range," << r.query << "," << r.range << ",";
    if (r.skipped) {
      out << "skipped,0,,,,,,,\n";
      continue;
    }
    out << "ok," << r.queries << "," << num(r.avg_error) << "," << num(r.max_error)
        << "," << num(r.bound) << ",,,,\n";
  }
  for (const BenchRow& b : rep.bench) {
    out << "bench," << to_string(b.backend) << "," << b.events << ",ok," << b.events
        << ",,,," << num(b.rate) << "," << num(b.p50_ns) << "," << num(b.p99_ns)
        << "," << num(b.max_ns) << "\n";
  }
}

std::string summary_json(const ExperimentReport& rep) {
  using nlohmann::ordered_json;
  const ExperimentOptions& o = rep.options;
  ordered_json j;
  j["schema"] = kReportSchema;
  j["command"] = rep.command;
  j["stream"] = rep.stream_description;
  j["seed"] = o.seed;
  j["events"] = rep.events;
  j["now"] = rep.now;
  if (rep.command != "monitor") {
    j["backend"] = std::string(to_string(o.backend));
    j["epsilon"] = o.epsilon;
    j["delta"] = o.delta;
    j["profile"] = std::string(to_string(o.profile));
    j["window"] = o.window;
    j["mode"] = o.mode == WindowMode::time_based ? "time" : "count";
    j["key_cap"] = o.key_cap;
  }
  if (rep.command == "replay" || rep.command == "tree") {
    j["memory"] = {{"model_bits", rep.memory.model_bits},
                   {"model_bytes", rep.memory.model_bytes},
                   {"actual_bytes", rep.memory.actual_bytes},
                   {"counters", rep.memory.counters}};
    j["frame_bytes"] = rep.frame.size();
  }
  if (rep.tree) {
    const TreeSummary& t = *rep.tree;
    j["tree"] = {{"nodes", t.nodes},
                 {"height", t.height},
                 {"centralized_point", t.centralized_point},
                 {"distributed_point", t.distributed_point},
                 {"point_ratio", t.point_ratio},
                 {"centralized_self_join", t.centralized_self_join},
                 {"distributed_self_join", t.distributed_self_join},
                 {"self_join_ratio", t.self_join_ratio},
                 {"bound_ratio", t.bound_ratio},
                 {"centralized_counter", t.centralized_counter},
                 {"distributed_counter", t.distributed_counter},
                 {"counter_ratio", t.counter_ratio},
                 {"network_bytes", t.network_bytes},
                 {"frames", t.frames}};
  }
  if (rep.monitor) {
    const MonitorSummary& m = *rep.monitor;
    j["monitor"] = {{"sites", o.nodes},
                    {"syncs", m.syncs},
                    {"violations", m.violations},
                    {"true_crossings", m.true_crossings},
                    {"missed_crossings", m.missed_crossings},
                    {"bytes", m.bytes},
                    {"naive_bytes", m.naive_bytes},
                    {"savings", m.savings()}};
  }
  return j.dump(2) + "\n";
}

void write_outputs(const std::filesystem::path& dir, const ExperimentReport& rep) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw IoError("cannot write '" + (dir / name).string() + "'");
    return f;
  };
  {
    auto f = open("report.csv");
    write_csv(f, rep);
  }
  {
    auto f = open("summary.json");
    f << summary_json(rep);
  }
  if (!rep.frame.empty()) {
    auto f = open(rep.command == "tree" ? "root.ecms" : "sketch.ecms");
    f.write(reinterpret_cast<const char*>(rep.frame.data()),
            static_cast<std::streamsize>(rep.frame.size()));
  }
  if (rep.monitor) {
    auto f = open("monitor_log.jsonl");
    write_log(f, rep.monitor->log);
  }
}

}  // namespace ecm
