#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "ecm/errors.hpp"
#include "ecm/harness.hpp"
#include "ecm/streams.hpp"

namespace fs = std::filesystem;
using ecm::ExperimentOptions;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ecm_harness_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.rfind("range,", 0) == 0 || line.rfind("bench,", 0) == 0) ++n;
  }
  return n;
}

double max_point_error(const ecm::ExperimentReport& rep) {
  double m = 0;
  for (const auto& r : rep.rows) {
    if (r.query == "point" && !r.skipped) m = std::max(m, r.max_error);
  }
  return m;
}

}  // namespace

TEST_CASE("stream specs parse and generate deterministically") {
  const auto a = ecm::generate(ecm::StreamSpec::parse("zipf:1.0,100,500", 3));
  const auto b = ecm::generate(ecm::StreamSpec::parse("zipf:1.0,100,500", 3));
  const auto c = ecm::generate(ecm::StreamSpec::parse("zipf:1.0,100,500", 4));
  CHECK(a == b);
  CHECK(a != c);
  REQUIRE(a.size() == 500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].ts == i + 1);
    CHECK(a[i].key < 100);
  }
  CHECK(ecm::StreamSpec::parse("uniform:10,20", 1).describe() == "uniform:10,20");
  CHECK_THROWS_AS(ecm::StreamSpec::parse("zipf:1.0,0,5", 1), ecm::ConfigError);
}

TEST_CASE("burst stream plants its key only in the second half") {
  const auto spec = ecm::StreamSpec::parse("burst:1000,400,0.9", 5);
  const auto ev = ecm::generate(spec);
  const auto hot = ecm::planted_key(1000, 5);
  std::size_t first = 0, second = 0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (ev[i].key == hot) ++(i < 200 ? first : second);
  }
  CHECK(first < 5);
  CHECK(second > 160);
}

TEST_CASE("stream files: tabs, defaults, hashing and line-numbered errors") {
  std::istringstream ok("1\t5\n2\tfoo\t3  \n\n2\t7\n");
  const auto ev = ecm::read_stream(ok);
  REQUIRE(ev.size() == 3);
  CHECK(ev[0].key == 5);
  CHECK(ev[0].value == 1);
  CHECK(ev[1].key == ecm::key_hash("foo"));
  CHECK(ev[1].value == 3);

  std::istringstream backwards("5\t1\n3\t1\n");
  try {
    ecm::read_stream(backwards);
    FAIL("expected an error");
  } catch (const ecm::IoError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream garbage("1\t2\nxx\t3\n");
  try {
    ecm::read_stream(garbage);
    FAIL("expected an error");
  } catch (const ecm::IoError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(ecm::read_stream_file("/nonexistent/stream.tsv"), ecm::IoError);
}

TEST_CASE("range ladder covers the stream in powers of ten") {
  CHECK(ecm::range_ladder(0).empty());
  CHECK(ecm::range_ladder(1) == std::vector<std::uint64_t>{1});
  CHECK(ecm::range_ladder(150) == std::vector<std::uint64_t>{1, 10, 100, 1000});
  CHECK(ecm::range_ladder(100000).size() == 6);
}

TEST_CASE("replay of an empty stream writes a header-only report") {
  const fs::path dir = scratch("empty");
  fs::create_directories(dir);
  const fs::path file = dir / "empty.tsv";
  std::ofstream(file).close();
  ExperimentOptions o;
  o.stream = file.string();
  const auto rep = ecm::run_replay(o);
  CHECK(rep.events == 0);
  CHECK(rep.rows.empty());
  std::ostringstream csv;
  ecm::write_csv(csv, rep);
  CHECK(data_rows(csv.str()) == 0);
  CHECK(csv.str().rfind("# schema=1", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("zipf replay with EH stays under the target error") {
  ExperimentOptions o;  // zipf:1.0,65536,100000, eps = delta = 0.1
  const auto rep = ecm::run_replay(o);
  CHECK(rep.events == 100000);
  CHECK(rep.rows.size() == 12);
  CHECK(max_point_error(rep) < 0.1);
  std::ostringstream csv;
  ecm::write_csv(csv, rep);
  CHECK(data_rows(csv.str()) == rep.rows.size());
  CHECK(rep.update_rate > 0);
}

TEST_CASE("memory decreases as the error target loosens") {
  ExperimentOptions o;
  o.stream = "zipf:1.0,65536,20000";
  o.epsilon = 0.05;
  const auto tight = ecm::run_replay(o);
  o.epsilon = 0.25;
  const auto loose = ecm::run_replay(o);
  CHECK(loose.memory.model_bytes < tight.memory.model_bytes);
  CHECK(loose.memory.actual_bytes < tight.memory.actual_bytes);
}

TEST_CASE("ranges beyond the window are marked, not clamped") {
  ExperimentOptions o;
  o.stream = "uniform:100,5000";
  o.window = 1000;
  const auto rep = ecm::run_replay(o);
  REQUIRE(rep.rows.size() == 10);
  for (const auto& r : rep.rows) CHECK(r.skipped == (r.range > 1000));
  std::ostringstream csv;
  ecm::write_csv(csv, rep);
  CHECK(csv.str().find("range,point,10000,skipped") != std::string::npos);
}

TEST_CASE("count-based replay") {
  ExperimentOptions o;
  o.stream = "zipf:1.0,1000,5000";
  o.mode = ecm::WindowMode::count_based;
  o.window = 2000;
  const auto rep = ecm::run_replay(o);
  CHECK(rep.now == 5000);
  CHECK(max_point_error(rep) < 0.1);
  CHECK_THROWS_AS(ecm::run_tree([&] { auto t = o; t.nodes = 2; return t; }()),
                  ecm::UnsupportedMergeError);
}

TEST_CASE("single-node tree is the centralized sketch") {
  ExperimentOptions o;
  o.stream = "zipf:1.0,65536,20000";
  o.nodes = 1;
  const auto rep = ecm::run_tree(o);
  REQUIRE(rep.tree);
  CHECK(rep.tree->point_ratio == 1.0);
  CHECK(rep.tree->self_join_ratio == 1.0);
  CHECK(rep.tree->network_bytes == 0);
  CHECK(rep.tree->height == 0);
}

TEST_CASE("four-node tree: EH within the level bound, RW lossless") {
  ExperimentOptions o;
  o.stream = "zipf:1.0,65536,20000";
  o.nodes = 4;
  const auto eh = ecm::run_tree(o);
  REQUIRE(eh.tree);
  CHECK(eh.tree->height == 2);
  CHECK(eh.tree->frames == 6);
  CHECK(eh.tree->point_ratio <= eh.tree->bound_ratio);
  CHECK(eh.tree->counter_ratio >= 1.0);
  o.backend = ecm::Backend::rw;
  const auto rw = ecm::run_tree(o);
  REQUIRE(rw.tree);
  CHECK(rw.tree->point_ratio == 1.0);
  CHECK(rw.tree->counter_ratio == 1.0);
  CHECK(rw.tree->network_bytes >= 10 * eh.tree->network_bytes);
}

TEST_CASE("bench on a tiny stream yields positive rates") {
  ExperimentOptions o;
  o.stream = "uniform:10,10";
  const auto rep = ecm::run_bench(o);
  REQUIRE(rep.bench.size() == 3);
  for (const auto& b : rep.bench) {
    CHECK(b.events == 10);
    CHECK(b.rate > 0);
    CHECK(b.max_ns >= b.p50_ns);
  }
  std::ostringstream csv;
  ecm::write_csv(csv, rep);
  CHECK(data_rows(csv.str()) == 3);
}

TEST_CASE("reports are byte-identical across runs with the same seed") {
  for (auto backend : {ecm::Backend::eh, ecm::Backend::dw, ecm::Backend::rw}) {
    CAPTURE(ecm::to_string(backend));
    ExperimentOptions o;
    o.stream = "zipf:1.0,4096,20000";
    o.backend = backend;
    o.seed = 9;
    o.nodes = 4;
    for (int pass = 0; pass < 2; ++pass) {
      const auto rep = pass == 0 ? ecm::run_replay(o) : ecm::run_tree(o);
      const fs::path a = scratch("det_a"), b = scratch("det_b");
      ecm::write_outputs(a, rep);
      ecm::write_outputs(b, pass == 0 ? ecm::run_replay(o) : ecm::run_tree(o));
      for (const auto& entry : fs::directory_iterator(a)) {
        CAPTURE(entry.path().filename().string());
        CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
      }
      fs::remove_all(a);
      fs::remove_all(b);
    }
  }
}

TEST_CASE("monitor report writes summary and log") {
  ecm::MonitorConfig c;
  const auto rep = ecm::run_monitor_report(c);
  REQUIRE(rep.monitor);
  CHECK(rep.events == 200);
  const fs::path dir = scratch("monitor");
  ecm::write_outputs(dir, rep);
  const std::string log = slurp(dir / "monitor_log.jsonl");
  std::size_t lines = 0;
  for (char ch : log) lines += ch == '\n';
  CHECK(lines == rep.monitor->log.size());
  CHECK(slurp(dir / "summary.json").find("\"savings\"") != std::string::npos);
  fs::remove_all(dir);
}
