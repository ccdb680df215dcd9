#pragma once

#include <optional>
#include <string>
#include <vector>

#include "inhand/controller.hpp"
#include "inhand/cost.hpp"
#include "inhand/model.hpp"
#include "inhand/pathplan.hpp"
#include "inhand/sequencer.hpp"
#include "inhand/sim.hpp"
#include "inhand/traj.hpp"

namespace inhand {

struct ExecutionParams {
  double preroll{1.0};       // settle time before the trajectory starts (s)
  double posthold{1.0};      // hold time at the goal before evaluation (s)
  double drop_margin{0.05};  // object this far below the reference height = dropped
  double manager_dt{0.1};    // grasp sequence manager period (10 Hz)
  double collision_tol{5e-4};  // link/palm penetration depth treated as collision
  double max_extra_time{30.0};  // budget beyond preroll + T + posthold
  double pos_tol{0.005};     // success thresholds on the final pose
  double rot_tol{0.1};
};

struct VariationSpec {
  double start_xy{0.03};       // +- range (m)
  double start_yaw_deg{20.0};  // +- range (deg)
  double goal_xy{0.025};       // +- range (m)
  double goal_z_lo{-0.03};
  double goal_z_hi{0.01};
  double medium_pos{0.01};     // bucket rule
  double medium_deg{10.0};
};

// Declarative task description; everything the pipeline needs.
struct ScenarioConfig {
  std::string name;
  std::string hand_file;
  std::string object_file;
  HandModel hand;
  ObjectModel object;
  Environment env;
  Pose start_pose;
  Pose goal_pose;
  std::vector<std::pair<int, int>> initial_grasp;  // (link, object point)
  PairingMap pairing;
  ExternalWrench w_ext;
  CostWeights cost_weights;
  RewardWeights reward_weights;
  Eigen::VectorXd q_home;
  IkParams ik;
  double ik_valid_threshold{1e-6};  // d* bound for pose validity (m^2)
  PathPlanParams planner;
  TrajParams trajectory;
  WrenchParams wrench;
  ControllerGains gains;
  TransitionThresholds transitions;
  SimParams sim;
  ExecutionParams exec;
  VariationSpec variation;
  std::uint64_t seed{0};

  Grasp make_initial_grasp() const;
};

// Load and validate a scenario file; model paths resolve relative to it.
ScenarioConfig load_scenario(const std::string& path);

// Candidate filter: IK at the nominal pose, then inter-finger link-link and
// link-environment collision checks (with the palm).
std::function<bool(const Grasp&)> make_static_feasibility_filter(const ScenarioConfig& cfg,
                                                                 const Pose& nominal_pose);

// ---------------------------------------------------------------------------
// Artifacts.
// ---------------------------------------------------------------------------

struct PlanArtifacts {
  std::vector<Grasp> candidates;
  PosePath path;
  ObjectTrajectory trajectory;
  TrajectoryCost traj_cost;
  GraspSequencePlan plan;
  double plan_seconds{0.0};
};

void write_plan_artifacts(const PlanArtifacts& art, const ScenarioConfig& cfg,
                          const std::string& out_dir);
PlanArtifacts load_plan_artifacts(const ScenarioConfig& cfg, const std::string& dir);

// Column-oriented trajectory table (schema-versioned single header line).
void write_trajectory_tsv(const ObjectTrajectory& traj, const TrajectoryCost& cost,
                          const std::string& path);

enum class FailureCause { None, Dropped, Collision, PoseError, PlanningFailed };
const char* to_string(FailureCause c);

struct TrialResult {
  bool success{false};
  FailureCause cause{FailureCause::None};
  double pos_error{0.0};
  double rot_error{0.0};
  double plan_seconds{0.0};
  double exec_seconds{0.0};
  std::string message;
};

void write_trial_result(const TrialResult& r, const std::string& path);

}  // namespace inhand
