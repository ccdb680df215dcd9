#pragma once

#include <optional>
#include <random>
#include <string>

#include "inhand/scenario.hpp"

namespace inhand {

struct RunnerError : std::runtime_error {
  std::string stage;
  RunnerError(std::string stage_in, const std::string& msg)
      : std::runtime_error(msg), stage(std::move(stage_in)) {}
};

// Candidate enumeration -> path -> timestamps -> grasp sequence; artifacts
// land in out_dir with deterministic names and content for a fixed seed.
PlanArtifacts run_plan(const ScenarioConfig& cfg, const std::string& out_dir);

struct ExecuteOptions {
  // Fault injection: at this execution time the contact with the lowest link
  // id is forcibly retracted (drop test).
  std::optional<double> fault_retract_time;
  bool write_logs{true};
};

TrialResult run_execute(const ScenarioConfig& cfg, const PlanArtifacts& art,
                        const std::string& out_dir, const ExecuteOptions& opts = {});

struct TrialVariation {
  Eigen::Vector2d start_xy{Eigen::Vector2d::Zero()};
  double start_yaw{0.0};  // rad
  Eigen::Vector2d goal_xy{Eigen::Vector2d::Zero()};
  double goal_z{0.0};
  bool medium{false};
};

TrialVariation sample_variation(const VariationSpec& spec, std::mt19937_64& rng);
// The grouping rule: medium when every position variation is within
// [-medium_pos, medium_pos] and the yaw within [-medium_deg, medium_deg].
bool is_medium_variation(const TrialVariation& v, const VariationSpec& spec);
ScenarioConfig apply_variation(const ScenarioConfig& cfg, const TrialVariation& v);

struct BatchBucket {
  int trials{0};
  int successes{0};
  double sum_rot_error{0.0};

  double success_rate() const { return trials > 0 ? double(successes) / trials : 0.0; }
  double mean_rot_error() const { return trials > 0 ? sum_rot_error / trials : 0.0; }
};

struct BatchSummary {
  BatchBucket medium;
  BatchBucket large;
  std::vector<std::pair<TrialVariation, TrialResult>> trials;
};

// Randomized robustness batch: perturb start/goal per the variation spec,
// re-plan and execute each trial, bucket by the medium/large rule, and write
// the per-trial table plus the summary.
BatchSummary run_batch(const ScenarioConfig& cfg, int n_trials, const std::string& out_dir);

void write_batch_tables(const BatchSummary& s, const std::string& out_dir);

}  // namespace inhand
