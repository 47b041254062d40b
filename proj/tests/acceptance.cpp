// Acceptance checks: one PASS/FAIL line per criterion, exit status 0 only
// when every selected criterion passes.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecm/ecm_sketch.hpp"
#include "ecm/exact_oracle.hpp"
#include "ecm/exponential_histogram.hpp"
#include "ecm/geo_monitor.hpp"
#include "ecm/harness.hpp"
#include "ecm/heavy_hitters.hpp"
#include "ecm/randomized_wave.hpp"
#include "ecm/streams.hpp"

using namespace ecm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const char* kStandardStream = "zipf:1.0,65536,100000";

// 1 and 2 share one replay.
struct PointRun {
  double within = 0;       // fraction of probes with |err| <= 0.1 L1
  double max_rel = 0;      // max |err| / L1
  std::size_t under_ok = 0;
  std::size_t probes = 0;
  double eps_sw = 0;
  double seconds = 0;
};

const PointRun& point_run() {
  static const PointRun run = [] {
    PointRun out;
    const auto t0 = Clock::now();
    const auto events = generate(StreamSpec::parse(kStandardStream, 1));
    ExperimentOptions o;
    EcmSketch sketch = make_sketch(o, Backend::eh);
    ExactWindowStore oracle(o.window);
    for (const auto& e : events) {
      sketch.add(e.key, e.ts, e.value);
      oracle.add(e.ts, e.key, e.value);
    }
    out.eps_sw = sketch.plan().epsilon_sw;
    const Timestamp now = sketch.now();
    std::mt19937_64 rng(0x5eed1);
    std::uniform_real_distribution<double> expo(0.0, 5.0);
    std::size_t within = 0;
    for (out.probes = 0; out.probes < 500; ++out.probes) {
      const auto r = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(std::llround(std::pow(10.0, expo(rng)))));
      // Probe a key that actually occurs in the range.
      const std::size_t first = events.size() - std::min<std::size_t>(r, events.size());
      std::uniform_int_distribution<std::size_t> pick(first, events.size() - 1);
      const Key key = events[pick(rng)].key;
      const double f = static_cast<double>(oracle.frequency(key, r, now));
      const double l1 = static_cast<double>(oracle.l1(r, now));
      const double est = sketch.point_query(key, r, now);
      const double err = std::abs(est - f);
      if (err <= 0.1 * l1) ++within;
      out.max_rel = std::max(out.max_rel, err / l1);
      if (f - est <= out.eps_sw * f + 1e-9) ++out.under_ok;
    }
    out.within = static_cast<double>(within) / static_cast<double>(out.probes);
    out.seconds = since(t0);
    return out;
  }();
  return run;
}

Outcome point_bound() {
  const PointRun& r = point_run();
  const bool ok = r.within >= 0.9 && r.max_rel < 0.1 && r.seconds < 30;
  return {ok, fmt("%.1f%% of %zu probes within 0.1*L1 (need >= 90%%), max error %.4f*L1 "
                  "(need < 0.1), %.1f s",
                  100 * r.within, r.probes, r.max_rel, r.seconds)};
}

Outcome underestimation() {
  const PointRun& r = point_run();
  return {r.under_ok == r.probes,
          fmt("%zu/%zu probes with f - f_hat <= eps_sw*f (eps_sw = %.5f)", r.under_ok,
              r.probes, r.eps_sw)};
}

Outcome self_join_bound() {
  const auto t0 = Clock::now();
  const int seeds = 10;
  int good = 0;
  double worst = 0;
  for (int s = 1; s <= seeds; ++s) {
    const auto events = generate(StreamSpec::parse(kStandardStream, s));
    ExperimentOptions o;
    o.epsilon = 0.2;
    o.profile = QueryProfile::inner_product;
    o.seed = s;
    EcmSketch sketch = make_sketch(o, Backend::eh);
    ExactWindowStore oracle(o.window);
    for (const auto& e : events) {
      sketch.add(e.key, e.ts, e.value);
      oracle.add(e.ts, e.key, e.value);
    }
    bool all = true;
    for (std::uint64_t r = 1; r <= (std::uint64_t{1} << 17); r <<= 1) {
      const double l1 = static_cast<double>(oracle.l1(r, sketch.now()));
      const double truth = static_cast<double>(oracle.self_join(r, sketch.now()));
      const double err = std::abs(sketch.self_join(r, sketch.now()) - truth) / (l1 * l1);
      worst = std::max(worst, err);
      if (err > 0.2) all = false;
    }
    good += all;
  }
  const double secs = since(t0);
  const bool ok = good * 10 >= seeds * 9 && secs < 60;
  return {ok, fmt("%d/%d seeds within 0.2*L1^2 on all 18 dyadic ranges (need >= 90%%), "
                  "worst %.4f, %.1f s",
                  good, seeds, worst, secs)};
}

Outcome eh_merge_bound() {
  const double eps = 0.1;
  const double two_way = eps + eps + eps * eps;
  const double four_way = multi_level_error(eps, 2);
  std::size_t checked = 0, bad = 0;
  double worst2 = 0, worst4 = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (std::size_t k : {2u, 4u}) {
      std::mt19937_64 rng(seed * 31 + k);
      std::vector<std::size_t> owner;
      for (std::size_t i = 0; i < k; ++i) owner.insert(owner.end(), 10000, i);
      std::shuffle(owner.begin(), owner.end(), rng);
      std::vector<Timestamp> times(owner.size());
      Timestamp t = 0;
      for (auto& ts : times) ts = (t += 1 + rng() % 3);
      const std::uint64_t n = t / 2;  // half the span, so expiry happens
      const WindowConfig cfg{n, WindowMode::time_based, eps, 0};
      std::vector<ExponentialHistogram> leaves(k, ExponentialHistogram(cfg));
      ExactWindowStore oracle(n);
      for (std::size_t i = 0; i < owner.size(); ++i) {
        leaves[owner[i]].insert(times[i]);
        oracle.add(times[i], 0);
      }
      ExponentialHistogram merged(cfg);
      if (k == 2) {
        std::array<const ExponentialHistogram*, 2> in{&leaves[0], &leaves[1]};
        merged = ExponentialHistogram::merge(in, eps);
      } else {
        std::array<const ExponentialHistogram*, 2> l{&leaves[0], &leaves[1]};
        std::array<const ExponentialHistogram*, 2> r{&leaves[2], &leaves[3]};
        const auto a = ExponentialHistogram::merge(l, eps);
        const auto b = ExponentialHistogram::merge(r, eps);
        std::array<const ExponentialHistogram*, 2> top{&a, &b};
        merged = ExponentialHistogram::merge(top, eps);
      }
      const double bound = k == 2 ? two_way : four_way;
      for (int j = 0; j < 20; ++j) {
        const auto r = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(std::pow(double(n), j / 19.0))));
        const double truth = static_cast<double>(oracle.l1(r, t));
        const double est = static_cast<double>(merged.query(r, t));
        const double rel = truth == 0 ? (est == 0 ? 0 : 1e9) : std::abs(est - truth) / truth;
        (k == 2 ? worst2 : worst4) = std::max(k == 2 ? worst2 : worst4, rel);
        ++checked;
        if (rel > bound + 1e-12) ++bad;
      }
    }
  }
  return {bad == 0, fmt("%zu suffix queries, %zu over bound; worst 2-way %.4f (<= %.2f), "
                        "worst 4-way %.4f (<= %.2f)",
                        checked, bad, worst2, two_way, worst4, four_way)};
}

Outcome rw_lossless() {
  int identical = 0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(1000 + s);
    const WindowConfig cfg{5000, WindowMode::time_based, 0.1, 0};
    const RwParams p{0.1, 36.0, static_cast<std::uint64_t>(s)};
    RandomizedWave a(cfg, p), b(cfg, p), c(cfg, p), direct(cfg, p);
    RandomizedWave* parts[] = {&a, &b, &c};
    for (Timestamp t = 1; t <= 10000; ++t) {
      const std::uint64_t id = rw_event_id(rng() % 65536, t, 0);
      parts[rng() % 3]->insert_event(t, id);
      direct.insert_event(t, id);
    }
    std::array<const RandomizedWave*, 3> in{&a, &b, &c};
    const RandomizedWave merged = RandomizedWave::merge(in);
    bool same = merged.level_count() == direct.level_count() &&
                merged.copies() == direct.copies();
    for (std::size_t cp = 0; same && cp < direct.copies(); ++cp) {
      for (std::size_t l = 0; same && l < direct.level_count(); ++l) {
        same = merged.level(cp, l) == direct.level(cp, l);
      }
    }
    identical += same && merged == direct;
  }
  return {identical == seeds,
          fmt("%d/%d seeds: 3-way merged wave level contents identical to direct build",
              identical, seeds)};
}

Outcome heavy_hitters() {
  const int seeds = 100;
  int found = 0, polluted = 0;
  for (int s = 0; s < seeds; ++s) {
    HeavyHitterOptions o;
    o.universe_bits = 10;
    o.epsilon = 0.05;
    o.delta = 0.1;
    o.phi = 0.2;
    const WindowConfig w{10000, WindowMode::time_based, 0.1, 0};
    HeavyHitters hh(o, w, static_cast<std::uint64_t>(s));
    ExactWindowStore oracle(10000);
    const auto events = generate(StreamSpec::parse("hot:1024,10000,0.3", s));
    for (const auto& e : events) {
      hh.add(e.key, e.ts);
      oracle.add(e.ts, e.key);
    }
    const Timestamp now = events.back().ts;
    const auto hits = hh.detect(0.2, 10000, now);
    const double l1 = static_cast<double>(oracle.l1(10000, now));
    const Key planted = planted_key(1024, s);
    bool has = false, below = false;
    for (const auto& h : hits) {
      has |= h.key == planted;
      below |= static_cast<double>(oracle.frequency(h.key, 10000, now)) < 0.2 * l1;
    }
    found += has;
    polluted += below;
  }
  const bool ok = found == seeds && polluted <= seeds / 10;
  return {ok, fmt("planted key found in %d/%d seeds (need all); sub-threshold items "
                  "reported in %d/%d seeds (need <= 10%%)",
                  found, seeds, polluted, seeds)};
}

Outcome memory_ratio() {
  ExperimentOptions o;
  const auto eh = run_replay(o);
  o.backend = Backend::rw;
  const auto rw = run_replay(o);
  const double ratio = static_cast<double>(rw.memory.model_bytes) /
                       static_cast<double>(eh.memory.model_bytes);
  return {ratio >= 10.0, fmt("RW %llu model bytes vs EH %llu: %.1fx (need >= 10x)",
                             (unsigned long long)rw.memory.model_bytes,
                             (unsigned long long)eh.memory.model_bytes, ratio)};
}

Outcome aggregation_loss() {
  ExperimentOptions o;
  o.nodes = 4;
  const auto rep = run_tree(o);
  const TreeSummary& t = *rep.tree;
  const bool ok = t.point_ratio <= t.bound_ratio && t.point_ratio >= 1.0 - 1e-9;
  return {ok, fmt("point error centralized %.6f, distributed %.6f, ratio %.6f "
                  "(need in [1-1e-9, %.4f]); counter-level ratio %.3f",
                  t.centralized_point, t.distributed_point, t.point_ratio, t.bound_ratio,
                  t.counter_ratio)};
}

Outcome throughput() {
  ExperimentOptions o;
  const auto rep = run_bench(o);
  double eh = 0, dw = 0, rw = 0;
  for (const auto& b : rep.bench) {
    (b.backend == Backend::eh ? eh : b.backend == Backend::dw ? dw : rw) = b.rate;
  }
  const bool ok = eh >= dw && dw >= rw;
  return {ok, fmt("updates/s EH %.3g, DW %.3g, RW %.3g (need EH >= DW >= RW)", eh, dw, rw)};
}

Outcome monitor() {
  const MonitorConfig c;  // 4 sites, burst:1000,200,0.9, T = 3000
  const auto events = generate(StreamSpec::parse(c.stream, c.seed));
  const auto s = run_monitor(c, assign_round_robin(events, c.sites));
  const bool ok = s.events == 200 && s.true_crossings >= 1 && s.missed_crossings == 0 &&
                  s.savings() >= 0.3;
  return {ok, fmt("%zu events, %zu true crossings, %zu missed, %zu syncs, %llu bytes vs "
                  "naive %llu (savings %.1f%%, need >= 30%%)",
                  s.events, s.true_crossings, s.missed_crossings, s.syncs,
                  (unsigned long long)s.bytes, (unsigned long long)s.naive_bytes,
                  100 * s.savings())};
}

Outcome determinism() {
  std::vector<std::string> failures;
  const auto events = generate(StreamSpec::parse("zipf:1.0,4096,20000", 3));
  for (Backend b : {Backend::eh, Backend::dw, Backend::rw}) {
    ExperimentOptions o;
    o.seed = 3;
    EcmSketch sketch = make_sketch(o, b);
    for (const auto& e : events) sketch.add(e.key, e.ts, e.value);
    const auto bytes = sketch.serialize();
    const EcmSketch back = EcmSketch::deserialize(bytes);
    bool same = back == sketch && back.serialize() == bytes;
    for (std::uint64_t r : range_ladder(sketch.now())) {
      same = same && back.self_join(r) == sketch.self_join(r);
      for (Key k = 0; k < 64; ++k) same = same && back.point_query(k, r) == sketch.point_query(k, r);
    }
    if (!same) failures.push_back(std::string(to_string(b)) + " round-trip");
  }
  auto text = [](const ExperimentReport& r) {
    std::ostringstream out;
    write_csv(out, r);
    out << summary_json(r);
    out.write(reinterpret_cast<const char*>(r.frame.data()),
              static_cast<std::streamsize>(r.frame.size()));
    return out.str();
  };
  for (Backend b : {Backend::eh, Backend::dw, Backend::rw}) {
    ExperimentOptions o;
    o.stream = "zipf:1.0,4096,20000";
    o.backend = b;
    o.nodes = 4;
    if (text(run_replay(o)) != text(run_replay(o))) {
      failures.push_back(std::string(to_string(b)) + " replay report");
    }
    if (text(run_tree(o)) != text(run_tree(o))) {
      failures.push_back(std::string(to_string(b)) + " tree report");
    }
  }
  if (text(run_monitor_report({})) != text(run_monitor_report({}))) {
    failures.push_back("monitor report");
  }
  std::string what = "round-trips for eh/dw/rw and repeated reports identical";
  if (!failures.empty()) {
    what = "differences:";
    for (const auto& f : failures) what += " " + f;
  }
  return {failures.empty(), what};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("--criterion", only, "run only these criteria (1-11)")
      ->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "point query error bound", point_bound},
      {2, "point query underestimation side", underestimation},
      {3, "self-join error bound", self_join_bound},
      {4, "histogram merge error", eh_merge_bound},
      {5, "randomized wave merge is lossless", rw_lossless},
      {6, "windowed heavy hitters", heavy_hitters},
      {7, "memory ratio RW vs EH", memory_ratio},
      {8, "aggregation loss ratio", aggregation_loss},
      {9, "throughput ordering", throughput},
      {10, "geometric monitor soundness and savings", monitor},
      {11, "determinism and round-trip", determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failed += !out.pass;
    std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": "
              << out.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
