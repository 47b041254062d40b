// Experiment runner: replay | tree | bench | monitor.
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecm/errors.hpp"
#include "ecm/harness.hpp"

namespace {

void add_common(CLI::App* cmd, ecm::ExperimentOptions& o, std::string& backend,
                std::string& profile, std::string& mode, std::string& out) {
  cmd->add_option("--stream", o.stream, "stream file or generator (zipf:s,K,M | uniform:K,M | hot:K,M,p | burst:K,M,p)")
      ->capture_default_str();
  cmd->add_option("--eps", o.epsilon, "target error")->capture_default_str()
      ->check(CLI::Range(1e-6, 0.999999));
  cmd->add_option("--delta", o.delta, "failure probability")->capture_default_str()
      ->check(CLI::Range(1e-9, 0.999999));
  cmd->add_option("--backend", backend, "eh | dw | rw")->capture_default_str()
      ->check(CLI::IsMember({"eh", "dw", "rw"}));
  cmd->add_option("--profile", profile, "point | inner")->capture_default_str()
      ->check(CLI::IsMember({"point", "inner"}));
  cmd->add_option("--window", o.window, "window length N")->capture_default_str();
  cmd->add_option("--mode", mode, "time | count")->capture_default_str()
      ->check(CLI::IsMember({"time", "count"}));
  cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
  cmd->add_option("--key-cap", o.key_cap, "point queries per range before sampling")
      ->capture_default_str();
  cmd->add_option("--out", out, "directory for report.csv, summary.json and frames");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ECM-sketch experiment runner"};
  app.require_subcommand(1);

  ecm::ExperimentOptions o;
  std::string backend = "eh", profile = "point", mode = "time", out;
  std::vector<std::string> bench_backends{"eh", "dw", "rw"};
  std::string config_path;
  std::map<std::string, std::string> overrides;

  auto* replay = app.add_subcommand("replay", "sketch vs exact replay over a range ladder");
  add_common(replay, o, backend, profile, mode, out);

  auto* tree = app.add_subcommand("tree", "hierarchical aggregation vs centralized");
  add_common(tree, o, backend, profile, mode, out);
  tree->add_option("--nodes", o.nodes, "leaf count")->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "update throughput per backend");
  add_common(bench, o, backend, profile, mode, out);
  bench->add_option("--backends", bench_backends, "backends to time")
      ->capture_default_str()->check(CLI::IsMember({"eh", "dw", "rw"}));

  auto* monitor = app.add_subcommand("monitor", "geometric threshold monitoring simulation");
  monitor->add_option("config", config_path, "key=value scenario file (optional)");
  monitor->add_option("--out", out, "directory for summary.json and monitor_log.jsonl");

  CLI11_PARSE(app, argc, argv);

  try {
    o.backend = ecm::parse_backend(backend);
    o.profile = ecm::parse_profile(profile);
    o.mode = mode == "count" ? ecm::WindowMode::count_based : ecm::WindowMode::time_based;
    o.bench_backends.clear();
    for (const auto& b : bench_backends) o.bench_backends.push_back(ecm::parse_backend(b));

    ecm::ExperimentReport report;
    if (replay->parsed()) {
      report = ecm::run_replay(o);
    } else if (tree->parsed()) {
      report = ecm::run_tree(o);
    } else if (bench->parsed()) {
      report = ecm::run_bench(o);
    } else {
      const ecm::MonitorConfig cfg =
          config_path.empty() ? ecm::MonitorConfig{} : ecm::MonitorConfig::load(config_path);
      report = ecm::run_monitor_report(cfg);
    }
    ecm::write_table(std::cout, report);
    if (!out.empty()) ecm::write_outputs(out, report);
  } catch (const ecm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
