#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "inhand/cost.hpp"
#include "inhand/model.hpp"
#include "inhand/traj.hpp"

namespace inhand {

enum class ActionKind { NoChange, Add, Remove, SlideTo };

// Grasp change command. Add/SlideTo target a (link, object point) candidate;
// Remove targets whatever contact sits on the link.
struct SeqAction {
  ActionKind kind{ActionKind::NoChange};
  int link{-1};
  int object_point{-1};
};

bool operator==(const SeqAction& a, const SeqAction& b);
std::string to_string(const SeqAction& a, const HandModel* hand = nullptr);

// MDP state at sample m: joint positions, reference and goal poses, current
// grasp, and the task's external wrench.
struct SeqState {
  Eigen::VectorXd q;
  Pose ref_pose;
  Pose goal_pose;
  int m{1};  // 1-based sample index
  int M{1};
  Grasp grasp;
  ExternalWrench w_ext;
};

// Full discrete action space: per link with n candidate points, n adds,
// n slides and one remove, plus the global no-change. Deterministic order:
// no-change first, then links ascending with adds, slides, remove.
std::vector<SeqAction> action_space(const HandModel& hand, const PairingMap& pairing);

struct ApplyResult {
  Grasp grasp;
  bool valid{true};
};

// Grasp update for an action. Invalid actions (add on an occupied link,
// remove/slide without a contact) leave the grasp unchanged and clear the
// flag; validity is data for the transition penalty, not an error.
ApplyResult apply_action(const Grasp& grasp, const SeqAction& a, const HandModel& hand,
                         const ObjectModel& obj);

struct RewardWeights {
  double r_collision{-1e4};
  double f_star_guard{1e-9};  // division guard for the force-ratio term
};

struct RewardBreakdown {
  double total{0.0};
  double ik_term{0.0};        // -w1 dp*
  double wrench_term{0.0};    // -w2 e*
  double force_term{0.0};     // +w3 f_hat_total / f*
  double t_penalty{0.0};
  double s_penalty{0.0};
  bool collision{false};
};

struct RewardInputs {
  double dp_star{0.0};
  double e_star{0.0};
  double f_star{0.0};
  double f_hat_total{0.0};
  bool ext_active{false};  // nonzero external wrench at this sample
  double t_penalty{0.0};
  double s_penalty{0.0};
  bool collision{false};
};

// Piecewise weight schedule applied to precomputed metrics:
//   w1 = 100/dp*  if dp* >= 1e-4, else 200
//   w2 = 100/e*   if e*  >= 1,    else 50
//   w3 = 2000 if e* < 1 and the external wrench is nonzero at m,
//        10   if e* < 1 and it is zero, 0 otherwise
// and R = -w1 dp* - w2 e* + w3 f_hat_total / max(f*, guard) - t - s.
RewardBreakdown reward_arithmetic(const RewardInputs& in, const RewardWeights& weights = {});

// Transition penalty: 2 for add/slide onto the contact already held, 2 for
// removing an absent contact, 10 for sliding on a link with no contact.
double transition_penalty(const Grasp& g, const SeqAction& a);

// Sliding penalty w4 ds + w5 theta: chord distance between the two object
// points and the angle between the object normals there (threshold and
// weight evaluated in degrees, the product in radians); w4 = 10.
double sliding_penalty(const Grasp& g, const SeqAction& a, const ObjectModel& obj);

// Reward for taking action a in state (m, G): metrics are evaluated on the
// commanded grasp, penalties against the current grasp, combined by
// reward_arithmetic.
RewardBreakdown reward(const SeqState& s, const SeqAction& a, const TrajSample& sample,
                       GraspCostEvaluator& evaluator, const RewardWeights& weights = {});

struct PlanStep {
  SeqAction action;
  Grasp grasp;  // grasp after the action
  RewardBreakdown reward;
};

struct GraspSequencePlan {
  std::vector<PlanStep> steps;  // one per sample, m = 1..M
  double total_cost{0.0};       // sum of -reward
};

// Optimal grasp sequence by dynamic programming over the layered
// (sample, grasp) graph: edges are single actions, edge weight is -reward,
// grasps must keep >= 2 contacts and one contact per finger. Ties break
// toward the earlier action. Throws when every sequence hits a collision
// state.
GraspSequencePlan plan_dp(const ObjectTrajectory& traj, const Grasp& start_grasp,
                          const PairingMap& pairing, GraspCostEvaluator& evaluator,
                          const RewardWeights& weights = {});

// Policy interface: a pure function of the sequence state.
class GraspPolicy {
 public:
  virtual ~GraspPolicy() = default;
  virtual SeqAction decide(const SeqState& s) const = 0;
};

// Reference implementation: looks the action up in a precomputed plan;
// no-change outside the plan's range.
class PlanLookupPolicy : public GraspPolicy {
 public:
  explicit PlanLookupPolicy(GraspSequencePlan plan) : plan_(std::move(plan)) {}
  SeqAction decide(const SeqState& s) const override;
  const GraspSequencePlan& plan() const { return plan_; }

 private:
  GraspSequencePlan plan_;
};

// One-step reward maximizer over the full action space.
class GreedyPolicy : public GraspPolicy {
 public:
  GreedyPolicy(const HandModel& hand, const ObjectModel& obj, const PairingMap& pairing,
               GraspCostEvaluator& evaluator, const ObjectTrajectory& traj,
               RewardWeights weights = {});
  SeqAction decide(const SeqState& s) const override;

 private:
  std::vector<SeqAction> actions_;
  GraspCostEvaluator& evaluator_;
  const ObjectTrajectory& traj_;
  const HandModel& hand_;
  const ObjectModel& obj_;
  RewardWeights weights_;
};

}  // namespace inhand
