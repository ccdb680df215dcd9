#include "inhand/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace inhand {

bool operator==(const SeqAction& a, const SeqAction& b) {
  return a.kind == b.kind && a.link == b.link && a.object_point == b.object_point;
}

std::string to_string(const SeqAction& a, const HandModel* hand) {
  auto link_name = [&](int l) {
    return hand ? hand->link_name(l) : "link" + std::to_string(l);
  };
  switch (a.kind) {
    case ActionKind::NoChange:
      return "n";
    case ActionKind::Add:
      return "a(" + link_name(a.link) + ":" + std::to_string(a.object_point) + ")";
    case ActionKind::Remove:
      return "r(" + link_name(a.link) + ")";
    case ActionKind::SlideTo:
      return "s(" + link_name(a.link) + ":" + std::to_string(a.object_point) + ")";
  }
  return "?";
}

std::vector<SeqAction> action_space(const HandModel& hand, const PairingMap& pairing) {
  std::vector<SeqAction> out;
  out.push_back(SeqAction{});  // no-change first
  for (const auto& [link, pts] : pairing) {
    (void)hand;
    std::vector<int> sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    for (int p : sorted) out.push_back({ActionKind::Add, link, p});
    for (int p : sorted) out.push_back({ActionKind::SlideTo, link, p});
    out.push_back({ActionKind::Remove, link, -1});
  }
  return out;
}

ApplyResult apply_action(const Grasp& grasp, const SeqAction& a, const HandModel& hand,
                         const ObjectModel& obj) {
  ApplyResult res{grasp, true};
  switch (a.kind) {
    case ActionKind::NoChange:
      return res;
    case ActionKind::Add: {
      if (grasp.find_link(a.link) != nullptr) {
        res.valid = false;
        return res;
      }
      res.grasp.contacts.push_back(make_contact(hand, obj, a.link, a.object_point));
      res.grasp.sort_contacts();
      return res;
    }
    case ActionKind::Remove: {
      auto& cs = res.grasp.contacts;
      const auto it = std::find_if(cs.begin(), cs.end(),
                                   [&](const ContactInfo& c) { return c.link == a.link; });
      if (it == cs.end()) {
        res.valid = false;
        return res;
      }
      cs.erase(it);
      return res;
    }
    case ActionKind::SlideTo: {
      auto& cs = res.grasp.contacts;
      const auto it = std::find_if(cs.begin(), cs.end(),
                                   [&](const ContactInfo& c) { return c.link == a.link; });
      if (it == cs.end()) {
        res.valid = false;
        return res;
      }
      const std::string link_point_id;  // keep the link-side point
      ContactInfo updated = make_contact(hand, obj, a.link, a.object_point, link_point_id);
      updated.c_J = it->c_J;
      *it = updated;
      return res;
    }
  }
  return res;
}

// Transition penalty (three invalid patterns; exact values).
double transition_penalty(const Grasp& g, const SeqAction& a) {
  const ContactInfo* on_link = g.find_link(a.link);
  const bool same_contact = on_link != nullptr && on_link->object_point == a.object_point;
  switch (a.kind) {
    case ActionKind::Add:
      return same_contact ? 2.0 : 0.0;
    case ActionKind::SlideTo:
      if (on_link == nullptr) return 10.0;  // slide on a link with no contact
      return same_contact ? 2.0 : 0.0;
    case ActionKind::Remove:
      return on_link == nullptr ? 2.0 : 0.0;
    case ActionKind::NoChange:
      return 0.0;
  }
  return 0.0;
}

double sliding_penalty(const Grasp& g, const SeqAction& a, const ObjectModel& obj) {
  if (a.kind != ActionKind::SlideTo) return 0.0;
  const ContactInfo* cur = g.find_link(a.link);
  if (cur == nullptr) return 0.0;  // invalid slide: handled by the t penalty
  const ObjectContactPoint& from = obj.contacts.at(cur->object_point);
  const ObjectContactPoint& to = obj.contacts.at(a.object_point);
  const double ds = (to.point - from.point).norm();
  const double cosang = std::clamp(from.normal.dot(to.normal), -1.0, 1.0);
  const double theta = std::acos(cosang);
  const double theta_deg = theta * 180.0 / 3.14159265358979323846;
  const double w4 = 10.0;
  const double w5 = theta_deg < 100.0 ? theta_deg / 2.0 : 10.0;
  return w4 * ds + w5 * theta;
}

RewardBreakdown reward_arithmetic(const RewardInputs& in, const RewardWeights& weights) {
  RewardBreakdown out;
  if (in.collision) {
    out.collision = true;
    out.total = weights.r_collision;
    return out;
  }
  const double w1 = in.dp_star >= 1e-4 ? 100.0 / in.dp_star : 200.0;
  const double w2 = in.e_star >= 1.0 ? 100.0 / in.e_star : 50.0;
  const double w3 = in.e_star < 1.0 ? (in.ext_active ? 2000.0 : 10.0) : 0.0;
  out.ik_term = -w1 * in.dp_star;
  out.wrench_term = -w2 * in.e_star;
  out.force_term = w3 * in.f_hat_total / std::max(in.f_star, weights.f_star_guard);
  out.t_penalty = in.t_penalty;
  out.s_penalty = in.s_penalty;
  out.total =
      out.ik_term + out.wrench_term + out.force_term - out.t_penalty - out.s_penalty;
  return out;
}

RewardBreakdown reward(const SeqState& s, const SeqAction& a, const TrajSample& sample,
                       GraspCostEvaluator& evaluator, const RewardWeights& weights) {
  const ApplyResult applied =
      apply_action(s.grasp, a, evaluator.hand(), evaluator.object());

  const GraspSampleCost& c = evaluator.evaluate(applied.grasp, sample, s.m, s.M);
  RewardInputs in;
  in.collision = c.collision;
  in.dp_star = c.max_dp;
  in.e_star = c.e_star;
  in.f_star = c.f_star;
  in.f_hat_total = c.f_hat_total;
  in.ext_active = s.w_ext.active_at(s.m, s.M) &&
                  (s.w_ext.force.norm() > 0.0 || s.w_ext.torque.norm() > 0.0);
  in.t_penalty = transition_penalty(s.grasp, a);
  in.s_penalty = sliding_penalty(s.grasp, a, evaluator.object());
  return reward_arithmetic(in, weights);
}

namespace {

using GraspKey = std::vector<std::pair<int, int>>;

bool grasp_admissible(const Grasp& g, const HandModel& hand) {
  if (g.size() < 2) return false;
  std::vector<int> fingers;
  for (const auto& c : g.contacts) fingers.push_back(hand.finger_of_link(c.link));
  std::sort(fingers.begin(), fingers.end());
  return std::adjacent_find(fingers.begin(), fingers.end()) == fingers.end();
}

}  // namespace

GraspSequencePlan plan_dp(const ObjectTrajectory& traj, const Grasp& start_grasp,
                          const PairingMap& pairing, GraspCostEvaluator& evaluator,
                          const RewardWeights& weights) {
  const HandModel& hand = evaluator.hand();
  const ObjectModel& obj = evaluator.object();
  const int M = traj.sample_count();
  const std::vector<SeqAction> actions = action_space(hand, pairing);

  if (!grasp_admissible(start_grasp, hand)) {
    throw std::invalid_argument("plan_dp: start grasp needs >= 2 contacts, one per finger");
  }

  // Forward reachability, layer by layer. Grasps are interned by key.
  std::vector<Grasp> grasps{start_grasp};
  std::map<GraspKey, int> ids{{start_grasp.key(), 0}};
  auto intern = [&](const Grasp& g) {
    const GraspKey key = g.key();
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    const int id = static_cast<int>(grasps.size());
    grasps.push_back(g);
    ids.emplace(key, id);
    return id;
  };

  // edge: action index -> successor grasp id (or -1 for inadmissible)
  std::vector<std::vector<int>> successors;  // per grasp id
  auto expand = [&](int gid) {
    while (static_cast<int>(successors.size()) <= gid) successors.emplace_back();
    if (!successors[gid].empty()) return;
    successors[gid].reserve(actions.size());
    for (const auto& a : actions) {
      const ApplyResult r = apply_action(grasps[gid], a, hand, obj);
      if (!r.valid || r.grasp == grasps[gid]) {
        successors[gid].push_back(gid);  // stays, possibly penalized
      } else if (grasp_admissible(r.grasp, hand)) {
        successors[gid].push_back(intern(r.grasp));
      } else {
        successors[gid].push_back(-1);  // would drop below two contacts
      }
    }
  };

  std::vector<std::vector<int>> layer(M + 1);
  layer[0] = {0};
  for (int m = 0; m < M - 1; ++m) {
    std::set<int> next;
    for (int gid : layer[m]) {
      expand(gid);
      for (int succ : successors[gid]) {
        if (succ >= 0) next.insert(succ);
      }
    }
    layer[m + 1].assign(next.begin(), next.end());
  }
  for (int gid : layer[M - 1]) expand(gid);

  // Backward value iteration: V[m][gid] = max_a R(m, gid, a) + V[m+1][succ].
  // Rewards at sample m use the state grasp (before the action) in the
  // penalties and the commanded grasp in the metrics.
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<std::map<int, std::pair<double, int>>> V(M + 2);  // gid -> (value, best action)

  auto edge_reward = [&](int m, int gid, int ai) {
    SeqState s;
    s.m = m;
    s.M = M;
    s.grasp = grasps[gid];
    s.w_ext = evaluator.external_wrench();
    return reward(s, actions[ai], traj.samples[m - 1], evaluator, weights);
  };

  for (int m = M; m >= 1; --m) {
    for (int gid : layer[m - 1]) {
      double best = neg_inf;
      int best_a = -1;
      for (int ai = 0; ai < static_cast<int>(actions.size()); ++ai) {
        const int succ = successors[gid][ai];
        if (succ < 0) continue;
        const RewardBreakdown rb = edge_reward(m, gid, ai);
        if (rb.collision) continue;  // collision states end the episode
        double value = rb.total;
        if (m < M) {
          const auto it = V[m + 1].find(succ);
          if (it == V[m + 1].end()) continue;
          value += it->second.first;
        }
        if (value > best) {  // strict: ties keep the earlier action
          best = value;
          best_a = ai;
        }
      }
      if (best_a >= 0) V[m][gid] = {best, best_a};
    }
  }

  const auto it0 = V[1].find(0);
  if (it0 == V[1].end()) {
    throw std::runtime_error("plan_dp: no feasible sequence (all paths hit collision states)");
  }

  GraspSequencePlan plan;
  plan.total_cost = -it0->second.first;
  int gid = 0;
  for (int m = 1; m <= M; ++m) {
    const int ai = V[m].at(gid).second;
    PlanStep step;
    step.action = actions[ai];
    step.reward = edge_reward(m, gid, ai);
    gid = successors[gid][ai];
    step.grasp = grasps[gid];
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

SeqAction PlanLookupPolicy::decide(const SeqState& s) const {
  if (s.m < 1 || s.m > static_cast<int>(plan_.steps.size())) return SeqAction{};
  return plan_.steps[s.m - 1].action;
}

GreedyPolicy::GreedyPolicy(const HandModel& hand, const ObjectModel& obj,
                           const PairingMap& pairing, GraspCostEvaluator& evaluator,
                           const ObjectTrajectory& traj, RewardWeights weights)
    : actions_(action_space(hand, pairing)),
      evaluator_(evaluator),
      traj_(traj),
      hand_(hand),
      obj_(obj),
      weights_(weights) {}

SeqAction GreedyPolicy::decide(const SeqState& s) const {
  if (s.m < 1 || s.m > traj_.sample_count()) return SeqAction{};
  const TrajSample& sample = traj_.samples[s.m - 1];
  double best = -std::numeric_limits<double>::infinity();
  SeqAction best_a{};
  for (const auto& a : actions_) {
    const ApplyResult r = apply_action(s.grasp, a, hand_, obj_);
    if (r.valid && !(r.grasp == s.grasp) && !grasp_admissible(r.grasp, hand_)) continue;
    const RewardBreakdown rb = reward(s, a, sample, evaluator_, weights_);
    if (rb.total > best) {
      best = rb.total;
      best_a = a;
    }
  }
  return best_a;
}

}  // namespace inhand
