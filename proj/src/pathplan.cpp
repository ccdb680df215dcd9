#include "inhand/pathplan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <queue>
#include <random>

namespace inhand {

double pose_distance(const Pose& a, const Pose& b, double lambda_rot) {
  return (a.p - b.p).norm() + lambda_rot * rotation_angle<double>(a.R, b.R);
}

PoseValidity is_valid_pose(const Pose& pose, const HandModel& hand, const ObjectModel& obj,
                           const Environment& env, const std::vector<Grasp>& candidates,
                           double d_threshold, const Eigen::VectorXd& q_home,
                           const IkParams& ik_params) {
  // object vs environment, object vs palm
  std::vector<Primitive> obj_world;
  obj_world.reserve(obj.primitives.size());
  for (const auto& p : obj.primitives) obj_world.push_back(transformed(p, pose));
  if (any_overlap(obj_world, env.statics)) return {};
  std::vector<Primitive> palm_world;
  for (const auto& p : hand.palm) palm_world.push_back(transformed(p, hand.base_pose));
  if (any_overlap(obj_world, palm_world)) return {};

  for (int g = 0; g < static_cast<int>(candidates.size()); ++g) {
    const IkResult res = solve_ik(hand, q_home, pose, candidates[g], env, ik_params);
    if (res.d_star < d_threshold) return {true, g};
  }
  return {};
}

ValidityFn make_validity_fn(const HandModel& hand, const ObjectModel& obj,
                            const Environment& env, const std::vector<Grasp>& candidates,
                            double d_threshold, const Eigen::VectorXd& q_home,
                            const IkParams& ik_params) {
  auto hint = std::make_shared<int>(-1);
  return [=, &hand, &obj, &env, &candidates](const Pose& pose) -> PoseValidity {
    std::vector<Primitive> obj_world;
    obj_world.reserve(obj.primitives.size());
    for (const auto& p : obj.primitives) obj_world.push_back(transformed(p, pose));
    if (any_overlap(obj_world, env.statics)) return {};
    std::vector<Primitive> palm_world;
    for (const auto& p : hand.palm) palm_world.push_back(transformed(p, hand.base_pose));
    if (any_overlap(obj_world, palm_world)) return {};

    // try the last successful grasp first, then the rest in order
    if (*hint >= 0 && *hint < static_cast<int>(candidates.size())) {
      const IkResult res = solve_ik(hand, q_home, pose, candidates[*hint], env, ik_params);
      if (res.d_star < d_threshold) return {true, *hint};
    }
    for (int g = 0; g < static_cast<int>(candidates.size()); ++g) {
      if (g == *hint) continue;
      const IkResult res = solve_ik(hand, q_home, pose, candidates[g], env, ik_params);
      if (res.d_star < d_threshold) {
        *hint = g;
        return {true, g};
      }
    }
    return {};
  };
}

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  // Shoemake: uniform quaternion from three uniforms.
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
  const double two_pi = 2.0 * 3.14159265358979323846;
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  Eigen::Quaterniond q(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2),
                       a * std::cos(two_pi * u2), b * std::sin(two_pi * u3));
  return q.toRotationMatrix();
}

bool segment_valid(const Pose& a, const Pose& b, const ValidityFn& validity,
                   const PathPlanParams& prm) {
  const double dp = (a.p - b.p).norm();
  const double da = rotation_angle<double>(a.R, b.R);
  const int steps = std::max(1, static_cast<int>(std::ceil(
                                    std::max(dp / prm.seg_step_pos, da / prm.seg_step_rot))));
  for (int i = 1; i < steps; ++i) {
    const double s = static_cast<double>(i) / steps;
    if (!validity(slerp_pose(a, b, s)).valid) return false;
  }
  return true;
}

}  // namespace

PosePath plan_path(const Pose& start, const Pose& goal, const ValidityFn& validity,
                   const PathPlanParams& params) {
  const PoseValidity sv = validity(start);
  if (!sv.valid) throw PathPlanError(PathPlanError::Kind::StartInvalid, "start pose invalid");
  const PoseValidity gv = validity(goal);
  if (!gv.valid) throw PathPlanError(PathPlanError::Kind::GoalInvalid, "goal pose invalid");

  auto metric = [&](const Pose& a, const Pose& b) {
    return pose_distance(a, b, params.lambda_rot);
  };

  std::vector<Pose> nodes{start, goal};
  std::vector<int> witnesses{sv.witness, gv.witness};

  PosePath out;
  // Direct connection first: it is both the common case at desk scale and the
  // shortest possible answer.
  if (metric(start, goal) < 1e-12 || segment_valid(start, goal, validity, params)) {
    out.waypoints = {start, goal};
    out.witness = {sv.witness, gv.witness};
    out.length = metric(start, goal);
    return out;
  }

  // Sample the roadmap.
  std::mt19937_64 rng(params.seed);
  Eigen::Vector3d lo = start.p.cwiseMin(goal.p).array() - params.box_margin;
  Eigen::Vector3d hi = start.p.cwiseMax(goal.p).array() + params.box_margin;
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  std::uniform_real_distribution<double> uz(lo.z(), hi.z());
  for (int i = 0; i < params.samples; ++i) {
    Pose p;
    p.p = Eigen::Vector3d(ux(rng), uy(rng), uz(rng));
    p.R = random_rotation(rng);
    const PoseValidity v = validity(p);
    if (v.valid) {
      nodes.push_back(p);
      witnesses.push_back(v.witness);
    }
  }

  const int n = static_cast<int>(nodes.size());
  // PRM* connection radius: gamma (log n / n)^(1/6) for the 6-D pose space,
  // scaled to the sampling box diagonal.
  const double space_scale = (hi - lo).norm() + params.lambda_rot * 3.14159265358979323846;
  const double radius = std::max(
      1e-6, params.radius_scale * space_scale *
                std::pow(std::log(static_cast<double>(n) + 1.0) / (n + 1.0), 1.0 / 6.0));

  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = metric(nodes[i], nodes[j]);
      if (d <= radius) {
        adj[i].push_back({j, d});
        adj[j].push_back({i, d});
      }
    }
  }

  // Dijkstra with lazy edge validation.
  std::map<std::pair<int, int>, bool> edge_ok;
  auto check_edge = [&](int i, int j) {
    const auto key = std::minmax(i, j);
    auto it = edge_ok.find(key);
    if (it != edge_ok.end()) return it->second;
    const bool ok = segment_valid(nodes[i], nodes[j], validity, params);
    edge_ok[key] = ok;
    return ok;
  };

  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  dist[0] = 0.0;
  pq.push({0.0, 0});
  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    if (i == 1) break;
    for (const auto& [j, w] : adj[i]) {
      if (dist[i] + w >= dist[j]) continue;
      if (!check_edge(i, j)) continue;
      dist[j] = dist[i] + w;
      prev[j] = i;
      pq.push({dist[j], j});
    }
  }
  if (!std::isfinite(dist[1])) {
    throw PathPlanError(PathPlanError::Kind::Disconnected,
                        "no path within the sample budget (roadmap disconnected)");
  }

  std::vector<int> chain;
  for (int v = 1; v >= 0; v = prev[v]) {
    chain.push_back(v);
    if (v == 0) break;
  }
  std::reverse(chain.begin(), chain.end());

  // Shortcutting: try to splice out interior waypoints, longest jumps first.
  if (params.shortcut) {
    for (int pass = 0; pass < params.shortcut_passes; ++pass) {
      bool improved = false;
      size_t i = 0;
      while (i + 2 < chain.size()) {
        size_t j = chain.size() - 1;
        for (; j > i + 1; --j) {
          if (check_edge(chain[i], chain[j])) {
            chain.erase(chain.begin() + i + 1, chain.begin() + j);
            improved = true;
            break;
          }
        }
        ++i;
      }
      if (!improved) break;
    }
  }

  for (int idx : chain) {
    out.waypoints.push_back(nodes[idx]);
    out.witness.push_back(witnesses[idx]);
  }
  out.length = 0.0;
  for (size_t i = 1; i < out.waypoints.size(); ++i) {
    out.length += metric(out.waypoints[i - 1], out.waypoints[i]);
  }
  return out;
}

}  // namespace inhand
