// Scenario runner: plan, execute, run, batch, inspect.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "inhand/runner.hpp"

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
  if (g_log_level >= 1) std::cerr << "[inhand] " << msg << "\n";
}

void emit_error(const std::string& stage, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = true;
  j["stage"] = stage;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("INHAND_OUT_DIR")) return env;
  return "out";
}

void print_summary(const inhand::BatchSummary& s) {
  std::cout << "bucket\ttrials\tsuccess_rate\tmean_rot_error\n";
  std::cout << "medium\t" << s.medium.trials << "\t" << s.medium.success_rate() << "\t"
            << s.medium.mean_rot_error() << "\n";
  std::cout << "large\t" << s.large.trials << "\t" << s.large.success_rate() << "\t"
            << s.large.mean_rot_error() << "\n";
}

int inspect_file(const std::string& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) {
    emit_error("inspect", "no such file: " + path);
    return 1;
  }
  std::ifstream in(path);
  std::string first_line;
  std::getline(in, first_line);
  if (first_line.rfind("# inhand.", 0) == 0) {
    // column table: report schema, column names, row count
    const std::string header = first_line.substr(2);
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) ++rows;
    }
    std::cout << "table " << header.substr(0, header.find(' ')) << "\n";
    std::cout << "columns: " << header.substr(header.find(' ') + 1) << "\n";
    std::cout << "rows: " << rows << "\n";
    return 0;
  }
  in.seekg(0);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    emit_error("inspect", std::string("not an artifact: ") + e.what());
    return 1;
  }
  std::cout << "json " << j.value("schema", "(no schema)") << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"in-hand manipulation planner, controller and simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::string log_level = "info";
  long long seed_override = -1;
  app.add_option("--config", config_path, "scenario file")->envname("INHAND_CONFIG");
  app.add_option("--out-dir", out_flag, "artifact directory (or INHAND_OUT_DIR)");
  app.add_option("--seed", seed_override, "override the scenario seed");
  app.add_option("--log-level", log_level, "quiet|info|debug");

  auto* cmd_plan = app.add_subcommand("plan", "enumerate grasps, plan path/trajectory/sequence");
  auto* cmd_exec = app.add_subcommand("execute", "simulate a previously planned scenario");
  auto* cmd_run = app.add_subcommand("run", "plan then execute");
  auto* cmd_batch = app.add_subcommand("batch", "randomized robustness batch");
  auto* cmd_inspect = app.add_subcommand("inspect", "pretty-print an artifact file");

  int n_trials = 20;
  cmd_batch->add_option("--trials", n_trials, "number of trials");
  double fault_time = -1.0;
  cmd_exec->add_option("--fault-retract", fault_time,
                       "inject a finger-retract fault at this execution time (s)");
  cmd_run->add_option("--fault-retract", fault_time,
                      "inject a finger-retract fault at this execution time (s)");
  std::string inspect_path;
  cmd_inspect->add_option("file", inspect_path, "artifact file")->required();

  CLI11_PARSE(app, argc, argv);

  if (log_level == "quiet") {
    g_log_level = 0;
  } else if (log_level == "debug") {
    g_log_level = 2;
  }

  if (cmd_inspect->parsed()) return inspect_file(inspect_path);

  if (config_path.empty()) {
    emit_error("config", "--config is required");
    return 1;
  }

  const std::string out_dir = resolve_out_dir(out_flag);
  inhand::ScenarioConfig cfg;
  try {
    cfg = inhand::load_scenario(config_path);
  } catch (const std::exception& e) {
    emit_error("config", e.what());
    return 1;
  }
  if (seed_override >= 0) {
    cfg.seed = static_cast<std::uint64_t>(seed_override);
    cfg.planner.seed = cfg.seed;
  }

  try {
    if (cmd_plan->parsed()) {
      log_info("planning scenario '" + cfg.name + "' -> " + out_dir);
      const inhand::PlanArtifacts art = inhand::run_plan(cfg, out_dir);
      log_info("plan done: " + std::to_string(art.path.waypoints.size()) + " waypoints, T=" +
               std::to_string(art.trajectory.duration()) + "s, cost=" +
               std::to_string(art.traj_cost.total));
      return 0;
    }
    if (cmd_exec->parsed()) {
      const inhand::PlanArtifacts art = inhand::load_plan_artifacts(cfg, out_dir);
      inhand::ExecuteOptions opts;
      if (fault_time >= 0.0) opts.fault_retract_time = fault_time;
      const inhand::TrialResult res = inhand::run_execute(cfg, art, out_dir, opts);
      log_info(std::string("trial ") + (res.success ? "succeeded" : "failed") +
               " (cause=" + inhand::to_string(res.cause) + ", pos_err=" +
               std::to_string(res.pos_error) + ", rot_err=" + std::to_string(res.rot_error) +
               ")");
      return res.success ? 0 : 2;
    }
    if (cmd_run->parsed()) {
      log_info("planning scenario '" + cfg.name + "' -> " + out_dir);
      const inhand::PlanArtifacts art = inhand::run_plan(cfg, out_dir);
      inhand::ExecuteOptions opts;
      if (fault_time >= 0.0) opts.fault_retract_time = fault_time;
      const inhand::TrialResult res = inhand::run_execute(cfg, art, out_dir, opts);
      log_info(std::string("trial ") + (res.success ? "succeeded" : "failed") +
               " (cause=" + inhand::to_string(res.cause) + ", pos_err=" +
               std::to_string(res.pos_error) + ", rot_err=" + std::to_string(res.rot_error) +
               ")");
      return res.success ? 0 : 2;
    }
    if (cmd_batch->parsed()) {
      log_info("batch of " + std::to_string(n_trials) + " trials -> " + out_dir);
      const inhand::BatchSummary s = inhand::run_batch(cfg, n_trials, out_dir);
      print_summary(s);
      return 0;
    }
  } catch (const inhand::RunnerError& e) {
    emit_error(e.stage, e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("run", e.what());
    return 1;
  }
  return 0;
}
