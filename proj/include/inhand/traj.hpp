#pragma once

#include <Eigen/Dense>
#include <vector>

#include "inhand/cost.hpp"
#include "inhand/pathplan.hpp"
#include "inhand/spline.hpp"

namespace inhand {

// Time-parameterized object trajectory: waypoint timestamps, the 7 component
// splines (3 position + 4 quaternion, scalar-last), and M uniform samples.
struct ObjectTrajectory {
  std::vector<Pose> waypoints;
  Eigen::VectorXd timestamps;  // size N, t(0) = 0
  CubicBSpline position;       // 3 components
  CubicBSpline quaternion;     // 4 components, fitted on sign-aligned waypoints
  std::vector<TrajSample> samples;

  double duration() const { return timestamps(timestamps.size() - 1); }
  int sample_count() const { return static_cast<int>(samples.size()); }
  // Pose/velocity state at an arbitrary time (clamped to [0, T]).
  TrajSample at(double t) const;
};

struct TrajParams {
  int M{16};             // sample count
  double dt_min{0.2};    // minimum waypoint spacing (s)
  double T_max{10.0};    // duration cap (s)
  int opt_evals{200};    // timestamp-optimization evaluation budget
  double opt_rho_end{1e-5};
};

// Interpolate the path with clamped cubic B-splines (zero end velocity) at
// the given timestamps and sample M points at uniform time spacing. Angular
// velocity and acceleration come from the normalized quaternion curve
// derivatives. Throws on unordered timestamps or quaternion waypoints that
// cannot be sign-aligned; asserts the interpolated quaternion norm stays
// within 0.05 of unit before renormalizing.
ObjectTrajectory fit_and_sample(const PosePath& path, const Eigen::VectorXd& timestamps, int M);

struct TrajectoryCost {
  double total{0.0};                // Z1
  std::vector<int> best_grasp;      // arg-min candidate per sample
  std::vector<double> sample_cost;  // c*(m)
};

// Z1 = sum over samples of min over candidate grasps of
//      d*(m,G) + w_e e*(m,G) + w_f f*(m,G); ties pick the lower grasp index.
TrajectoryCost trajectory_cost(const ObjectTrajectory& traj,
                               const std::vector<Grasp>& candidates,
                               GraspCostEvaluator& evaluator);

struct TimestampOptimization {
  ObjectTrajectory trajectory;
  TrajectoryCost cost;
  double initial_cost{0.0};
  int evaluations{0};
};

// Choose waypoint timestamps minimizing Z1 subject to t_1 = 0,
// t_{i-1} + dt_min <= t_i, t_N <= T_max, starting from uniform spacing at
// T_max, with a derivative-free trust-region search. The result never costs
// more than the initial guess. Throws when (N-1) dt_min > T_max.
TimestampOptimization optimize_timestamps(const PosePath& path,
                                          const std::vector<Grasp>& candidates,
                                          GraspCostEvaluator& evaluator,
                                          const TrajParams& params);

}  // namespace inhand
