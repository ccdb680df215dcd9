#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "inhand/ik.hpp"
#include "inhand/model.hpp"

namespace inhand {

struct PosePath {
  std::vector<Pose> waypoints;  // first = start, last = goal
  std::vector<int> witness;     // per waypoint: index of a reachable grasp
  double length{0.0};           // summed pose distance
};

struct PoseValidity {
  bool valid{false};
  int witness{-1};
};

using ValidityFn = std::function<PoseValidity(const Pose&)>;

struct PathPlanError : std::runtime_error {
  enum class Kind { StartInvalid, GoalInvalid, Disconnected };
  Kind kind;
  PathPlanError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct PathPlanParams {
  int samples{2000};
  double radius_scale{1.0};
  std::uint64_t seed{0};
  double lambda_rot{0.1};   // meters of cost per radian of rotation
  double box_margin{0.10};  // sampling box inflation around start/goal (m)
  double seg_step_pos{0.005};
  double seg_step_rot{5.0 * 3.14159265358979323846 / 180.0};
  bool shortcut{true};
  int shortcut_passes{4};
};

// Pose metric ||dp|| + lambda * relative angle.
double pose_distance(const Pose& a, const Pose& b, double lambda_rot);

// Validity of a single object pose: collision-free against the environment
// and the palm, and reachable by at least one candidate grasp (IK error d*
// below threshold). Returns the first reachable grasp in candidate order.
PoseValidity is_valid_pose(const Pose& pose, const HandModel& hand, const ObjectModel& obj,
                           const Environment& env, const std::vector<Grasp>& candidates,
                           double d_threshold, const Eigen::VectorXd& q_home,
                           const IkParams& ik_params = {});

// Convenience factory binding is_valid_pose to its models. The returned
// callable keeps a warm-start hint (last successful witness) internally and
// must only be used from one thread.
ValidityFn make_validity_fn(const HandModel& hand, const ObjectModel& obj,
                            const Environment& env, const std::vector<Grasp>& candidates,
                            double d_threshold, const Eigen::VectorXd& q_home,
                            const IkParams& ik_params = {});

// PRM*-flavored roadmap planner over object poses: uniform pose sampling in a
// box around start/goal, log-scaled connection radius, shortest path by the
// pose metric, optional shortcutting. Deterministic for a fixed seed.
PosePath plan_path(const Pose& start, const Pose& goal, const ValidityFn& validity,
                   const PathPlanParams& params);

}  // namespace inhand
