#include "inhand/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "inhand/model_io.hpp"

namespace inhand {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int resolve_link(const HandModel& hand, const std::string& name) {
  const int l = hand.link_by_name(name);
  if (l < 0) throw std::invalid_argument("scenario: unknown link '" + name + "'");
  return l;
}

int resolve_point(const ObjectModel& obj, const std::string& name) {
  const int p = obj.contact_index(name);
  if (p < 0) throw std::invalid_argument("scenario: unknown object contact '" + name + "'");
  return p;
}

}  // namespace

Grasp ScenarioConfig::make_initial_grasp() const {
  Grasp g;
  for (const auto& [link, pt] : initial_grasp) {
    g.contacts.push_back(make_contact(hand, object, link, pt));
  }
  g.sort_contacts();
  return g;
}

ScenarioConfig load_scenario(const std::string& path) {
  const json j = load_json_file(path);
  if (j.value("schema", "") != "inhand.scenario.v1") {
    throw std::invalid_argument(path + ": expected schema 'inhand.scenario.v1'");
  }
  const auto dir = std::filesystem::path(path).parent_path();

  ScenarioConfig cfg;
  cfg.name = j.value("name", "scenario");
  cfg.hand_file = (dir / j.at("hand").get<std::string>()).string();
  cfg.object_file = (dir / j.at("object").get<std::string>()).string();
  cfg.hand = load_hand(cfg.hand_file);
  cfg.object = load_object(cfg.object_file);
  cfg.env = Environment::floor_at(j.value("floor_z", 0.0));
  if (j.contains("statics")) {
    for (const auto& p : j.at("statics")) cfg.env.statics.push_back(parse_primitive(p));
  }
  cfg.start_pose = parse_pose(j.at("start_pose"));
  cfg.goal_pose = parse_pose(j.at("goal_pose"));

  for (const auto& g : j.at("initial_grasp")) {
    cfg.initial_grasp.emplace_back(resolve_link(cfg.hand, g.at("link").get<std::string>()),
                                   resolve_point(cfg.object, g.at("point").get<std::string>()));
  }
  for (const auto& pr : j.at("pairing")) {
    const int link = resolve_link(cfg.hand, pr.at("link").get<std::string>());
    std::vector<int> pts;
    for (const auto& p : pr.at("points")) pts.push_back(resolve_point(cfg.object, p));
    cfg.pairing[link] = pts;
  }

  if (j.contains("external_wrench")) {
    const auto& w = j.at("external_wrench");
    if (w.contains("force")) cfg.w_ext.force = parse_vec3(w.at("force"));
    if (w.contains("torque")) cfg.w_ext.torque = parse_vec3(w.at("torque"));
    cfg.w_ext.last_sample_only = w.value("last_sample_only", true);
  }

  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    cfg.cost_weights.w_e = w.value("w_e", cfg.cost_weights.w_e);
    cfg.cost_weights.w_f = w.value("w_f", cfg.cost_weights.w_f);
    cfg.wrench.w_t = w.value("w_t", cfg.wrench.w_t);
    cfg.reward_weights.r_collision = w.value("r_collision", cfg.reward_weights.r_collision);
  }
  if (j.contains("ik")) {
    const auto& v = j.at("ik");
    cfg.ik.gain = v.value("gain", cfg.ik.gain);
    cfg.ik.d_threshold = v.value("d_threshold", cfg.ik.d_threshold);
    cfg.ik.max_iterations = v.value("max_iterations", cfg.ik.max_iterations);
  }
  if (j.contains("planner")) {
    const auto& v = j.at("planner");
    cfg.planner.samples = v.value("samples", cfg.planner.samples);
    cfg.planner.radius_scale = v.value("radius_scale", cfg.planner.radius_scale);
    cfg.planner.box_margin = v.value("box_margin", cfg.planner.box_margin);
    cfg.planner.lambda_rot = v.value("lambda_rot", cfg.planner.lambda_rot);
    cfg.planner.seg_step_pos = v.value("seg_step_pos", cfg.planner.seg_step_pos);
    cfg.planner.shortcut = v.value("shortcut", cfg.planner.shortcut);
  }
  // the planner's pose-validity threshold on d*
  cfg.ik_valid_threshold = j.contains("planner")
                               ? j.at("planner").value("d_threshold", 1e-6)
                               : 1e-6;
  if (j.contains("trajectory")) {
    const auto& v = j.at("trajectory");
    cfg.trajectory.M = v.value("M", cfg.trajectory.M);
    cfg.trajectory.dt_min = v.value("dt_min", cfg.trajectory.dt_min);
    cfg.trajectory.T_max = v.value("T_max", cfg.trajectory.T_max);
    cfg.trajectory.opt_evals = v.value("opt_evals", cfg.trajectory.opt_evals);
  }
  if (j.contains("wrench")) {
    const auto& v = j.at("wrench");
    cfg.wrench.mu = v.value("mu", cfg.wrench.mu);
    cfg.wrench.pyramid_sides = v.value("pyramid_sides", cfg.wrench.pyramid_sides);
  }

  const int dof = cfg.hand.dof();
  double kpj = 20.0;
  if (j.contains("gains")) {
    const auto& v = j.at("gains");
    cfg.gains.k_p1 = v.value("k_p1", cfg.gains.k_p1);
    cfg.gains.k_d1 = v.value("k_d1", cfg.gains.k_d1);
    cfg.gains.k_p2 = v.value("k_p2", cfg.gains.k_p2);
    cfg.gains.k_d2 = v.value("k_d2", cfg.gains.k_d2);
    cfg.gains.dt = v.value("dt", cfg.gains.dt);
    kpj = v.value("k_pj", kpj);
  }
  cfg.gains.K_pj = Eigen::VectorXd::Constant(dof, kpj);

  if (j.contains("transitions")) {
    const auto& v = j.at("transitions");
    cfg.transitions.touch_force = v.value("touch_force", cfg.transitions.touch_force);
    cfg.transitions.confirm_force = v.value("confirm_force", cfg.transitions.confirm_force);
    cfg.transitions.confirm_time = v.value("confirm_time", cfg.transitions.confirm_time);
    cfg.transitions.release_time = v.value("release_time", cfg.transitions.release_time);
    cfg.transitions.timeout = v.value("timeout", cfg.transitions.timeout);
    cfg.transitions.approach_speed = v.value("approach_speed", cfg.transitions.approach_speed);
    cfg.transitions.slide_speed = v.value("slide_speed", cfg.transitions.slide_speed);
    cfg.transitions.slide_tol = v.value("slide_tol", cfg.transitions.slide_tol);
  }
  if (j.contains("sim")) {
    const auto& v = j.at("sim");
    cfg.sim.dt = v.value("dt", cfg.sim.dt);
    cfg.sim.mu = v.value("mu", cfg.sim.mu);
    cfg.sim.contact_stiffness = v.value("contact_stiffness", cfg.sim.contact_stiffness);
    cfg.sim.contact_damping = v.value("contact_damping", cfg.sim.contact_damping);
    cfg.sim.friction_reg_vel = v.value("friction_reg_vel", cfg.sim.friction_reg_vel);
    cfg.sim.joint_inertia = v.value("joint_inertia", cfg.sim.joint_inertia);
    cfg.sim.joint_kd = v.value("joint_kd", cfg.sim.joint_kd);
  }
  cfg.wrench.mu = cfg.sim.mu;  // one friction coefficient for planning and sim
  if (j.contains("execution")) {
    const auto& v = j.at("execution");
    cfg.exec.preroll = v.value("preroll", cfg.exec.preroll);
    cfg.exec.posthold = v.value("posthold", cfg.exec.posthold);
    cfg.exec.drop_margin = v.value("drop_margin", cfg.exec.drop_margin);
    cfg.exec.manager_dt = v.value("manager_dt", cfg.exec.manager_dt);
    cfg.exec.collision_tol = v.value("collision_tol", cfg.exec.collision_tol);
    cfg.exec.max_extra_time = v.value("max_extra_time", cfg.exec.max_extra_time);
  }
  if (j.contains("variation")) {
    const auto& v = j.at("variation");
    cfg.variation.start_xy = v.value("start_xy", cfg.variation.start_xy);
    cfg.variation.start_yaw_deg = v.value("start_yaw_deg", cfg.variation.start_yaw_deg);
    cfg.variation.goal_xy = v.value("goal_xy", cfg.variation.goal_xy);
    cfg.variation.goal_z_lo = v.value("goal_z_lo", cfg.variation.goal_z_lo);
    cfg.variation.goal_z_hi = v.value("goal_z_hi", cfg.variation.goal_z_hi);
  }

  cfg.q_home = Eigen::VectorXd::Zero(dof);
  if (j.contains("q_home")) {
    const auto& v = j.at("q_home");
    if (static_cast<int>(v.size()) != dof) {
      throw std::invalid_argument("scenario: q_home must have one entry per joint");
    }
    for (int i = 0; i < dof; ++i) cfg.q_home(i) = v[i].get<double>();
  }
  cfg.seed = j.value("seed", 0);
  cfg.planner.seed = cfg.seed;

  return cfg;
}

std::function<bool(const Grasp&)> make_static_feasibility_filter(const ScenarioConfig& cfg,
                                                                 const Pose& nominal_pose) {
  return [&cfg, nominal_pose](const Grasp& g) {
    const IkResult ik = solve_ik(cfg.hand, cfg.q_home, nominal_pose, g, cfg.env, cfg.ik);
    if (ik.termination == IkTermination::EnvironmentContact) return false;
    const auto poses = forward_kinematics(cfg.hand, ik.q_star);
    // inter-finger link-link collisions
    const int nf = static_cast<int>(cfg.hand.fingers.size());
    for (int fa = 0; fa < nf; ++fa) {
      for (int fb = fa + 1; fb < nf; ++fb) {
        for (size_t la = 0; la < cfg.hand.fingers[fa].links.size(); ++la) {
          for (size_t lb = 0; lb < cfg.hand.fingers[fb].links.size(); ++lb) {
            const int ga = cfg.hand.global_link(fa, static_cast<int>(la));
            const int gb = cfg.hand.global_link(fb, static_cast<int>(lb));
            for (const auto& pa : cfg.hand.link(ga).collision) {
              for (const auto& pb : cfg.hand.link(gb).collision) {
                if (overlap(transformed(pa, poses[ga]), transformed(pb, poses[gb]))) {
                  return false;
                }
              }
            }
          }
        }
      }
    }
    // links vs environment
    const auto prims = hand_world_primitives(cfg.hand, poses, /*with_palm=*/false);
    for (const auto& lp : prims) {
      for (const auto& sp : cfg.env.statics) {
        if (distance(sp, lp) < 0.0) return false;
      }
    }
    return true;
  };
}

const char* to_string(FailureCause c) {
  switch (c) {
    case FailureCause::None:
      return "none";
    case FailureCause::Dropped:
      return "dropped";
    case FailureCause::Collision:
      return "collision";
    case FailureCause::PoseError:
      return "pose-error";
    case FailureCause::PlanningFailed:
      return "planning-failed";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Artifact serialization.
// ---------------------------------------------------------------------------

namespace {

ordered_json opose(const Pose& p) {
  const Vector4<double> q = rotation_to_quat<double>(p.R);
  ordered_json out;
  out["p"] = {p.p.x(), p.p.y(), p.p.z()};
  out["quat"] = {q(0), q(1), q(2), q(3)};
  return out;
}

ordered_json grasp_to_json(const Grasp& g) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : g.contacts) {
    ordered_json e;
    e["link"] = c.link;
    e["point"] = c.object_point;
    arr.push_back(e);
  }
  return arr;
}

Grasp grasp_from_json(const json& arr, const ScenarioConfig& cfg) {
  Grasp g;
  for (const auto& e : arr) {
    g.contacts.push_back(
        make_contact(cfg.hand, cfg.object, e.at("link").get<int>(), e.at("point").get<int>()));
  }
  g.sort_contacts();
  return g;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

SeqAction action_from_json(const json& e) {
  SeqAction a;
  const std::string k = e.at("kind").get<std::string>();
  if (k == "no_change") {
    a.kind = ActionKind::NoChange;
  } else if (k == "add") {
    a.kind = ActionKind::Add;
  } else if (k == "remove") {
    a.kind = ActionKind::Remove;
  } else if (k == "slide_to") {
    a.kind = ActionKind::SlideTo;
  } else {
    throw std::invalid_argument("bad action kind: " + k);
  }
  a.link = e.value("link", -1);
  a.object_point = e.value("point", -1);
  return a;
}

ordered_json action_to_json(const SeqAction& a) {
  ordered_json e;
  switch (a.kind) {
    case ActionKind::NoChange:
      e["kind"] = "no_change";
      break;
    case ActionKind::Add:
      e["kind"] = "add";
      break;
    case ActionKind::Remove:
      e["kind"] = "remove";
      break;
    case ActionKind::SlideTo:
      e["kind"] = "slide_to";
      break;
  }
  if (a.link >= 0) e["link"] = a.link;
  if (a.object_point >= 0) e["point"] = a.object_point;
  return e;
}

}  // namespace

void write_trajectory_tsv(const ObjectTrajectory& traj, const TrajectoryCost& cost,
                          const std::string& path) {
  std::string out =
      "# inhand.trajectory.v1 t px py pz qx qy qz qw vx vy vz wx wy wz ax ay az alx aly alz "
      "grasp\n";
  for (int m = 0; m < traj.sample_count(); ++m) {
    const TrajSample& s = traj.samples[m];
    const Vector4<double> q = rotation_to_quat<double>(s.pose.R);
    std::string row = fmt(s.t);
    auto push3 = [&](const Eigen::Vector3d& v) {
      for (int i = 0; i < 3; ++i) row += "\t" + fmt(v(i));
    };
    push3(s.pose.p);
    for (int i = 0; i < 4; ++i) row += "\t" + fmt(q(i));
    push3(s.v);
    push3(s.w);
    push3(s.dv);
    push3(s.dw);
    row += "\t" + std::to_string(m < static_cast<int>(cost.best_grasp.size())
                                     ? cost.best_grasp[m]
                                     : -1);
    out += row + "\n";
  }
  write_text(path, out);
}

void write_plan_artifacts(const PlanArtifacts& art, const ScenarioConfig& cfg,
                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  // path.json: waypoints + witness grasps
  {
    ordered_json j;
    j["schema"] = "inhand.path.v1";
    j["length"] = art.path.length;
    ordered_json wps = ordered_json::array();
    for (size_t i = 0; i < art.path.waypoints.size(); ++i) {
      ordered_json w;
      w["pose"] = opose(art.path.waypoints[i]);
      w["witness"] = art.path.witness[i];
      wps.push_back(w);
    }
    j["waypoints"] = wps;
    write_text((dir / "path.json").string(), j.dump(2) + "\n");
  }
  // candidates.json
  {
    ordered_json j;
    j["schema"] = "inhand.candidates.v1";
    ordered_json arr = ordered_json::array();
    for (const auto& g : art.candidates) arr.push_back(grasp_to_json(g));
    j["grasps"] = arr;
    write_text((dir / "candidates.json").string(), j.dump(2) + "\n");
  }
  // trajectory meta + table
  {
    ordered_json j;
    j["schema"] = "inhand.trajmeta.v1";
    j["M"] = art.trajectory.sample_count();
    ordered_json ts = ordered_json::array();
    for (int i = 0; i < art.trajectory.timestamps.size(); ++i) {
      ts.push_back(art.trajectory.timestamps(i));
    }
    j["timestamps"] = ts;
    ordered_json wps = ordered_json::array();
    for (const auto& w : art.trajectory.waypoints) wps.push_back(opose(w));
    j["waypoints"] = wps;
    j["cost"] = art.traj_cost.total;
    write_text((dir / "trajectory_meta.json").string(), j.dump(2) + "\n");
    write_trajectory_tsv(art.trajectory, art.traj_cost, (dir / "trajectory.tsv").string());
  }
  // plan.json + human-readable per-sample log
  {
    ordered_json j;
    j["schema"] = "inhand.plan.v1";
    j["total_cost"] = art.plan.total_cost;
    ordered_json steps = ordered_json::array();
    for (const auto& st : art.plan.steps) {
      ordered_json e;
      e["action"] = action_to_json(st.action);
      e["grasp"] = grasp_to_json(st.grasp);
      e["reward"] = st.reward.total;
      steps.push_back(e);
    }
    j["steps"] = steps;
    write_text((dir / "plan.json").string(), j.dump(2) + "\n");

    std::string log = "# inhand.planlog.v1 m action grasp r_total r_ik r_wrench r_force t_pen "
                      "s_pen\n";
    for (size_t m = 0; m < art.plan.steps.size(); ++m) {
      const PlanStep& st = art.plan.steps[m];
      std::string gs;
      for (const auto& c : st.grasp.contacts) {
        if (!gs.empty()) gs += ",";
        gs += cfg.hand.link_name(c.link) + ":" + cfg.object.contacts[c.object_point].id;
      }
      if (gs.empty()) gs = "-";
      log += std::to_string(m + 1) + "\t" + to_string(st.action, &cfg.hand) + "\t" + gs + "\t" +
             fmt(st.reward.total) + "\t" + fmt(st.reward.ik_term) + "\t" +
             fmt(st.reward.wrench_term) + "\t" + fmt(st.reward.force_term) + "\t" +
             fmt(st.reward.t_penalty) + "\t" + fmt(st.reward.s_penalty) + "\n";
    }
    write_text((dir / "plan_log.tsv").string(), log);
  }
}

PlanArtifacts load_plan_artifacts(const ScenarioConfig& cfg, const std::string& dir_in) {
  namespace fs = std::filesystem;
  const fs::path dir(dir_in);
  PlanArtifacts art;

  {
    const json j = load_json_file((dir / "candidates.json").string());
    for (const auto& e : j.at("grasps")) art.candidates.push_back(grasp_from_json(e, cfg));
  }
  {
    const json j = load_json_file((dir / "path.json").string());
    for (const auto& w : j.at("waypoints")) {
      art.path.waypoints.push_back(parse_pose(w.at("pose")));
      art.path.witness.push_back(w.at("witness").get<int>());
    }
    art.path.length = j.value("length", 0.0);
  }
  {
    const json j = load_json_file((dir / "trajectory_meta.json").string());
    const auto& ts = j.at("timestamps");
    Eigen::VectorXd timestamps(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) timestamps(static_cast<int>(i)) = ts[i].get<double>();
    art.trajectory = fit_and_sample(art.path, timestamps, j.at("M").get<int>());
    art.traj_cost.total = j.value("cost", 0.0);
  }
  {
    const json j = load_json_file((dir / "plan.json").string());
    art.plan.total_cost = j.value("total_cost", 0.0);
    for (const auto& e : j.at("steps")) {
      PlanStep st;
      st.action = action_from_json(e.at("action"));
      st.grasp = grasp_from_json(e.at("grasp"), cfg);
      st.reward.total = e.value("reward", 0.0);
      art.plan.steps.push_back(std::move(st));
    }
  }
  return art;
}

void write_trial_result(const TrialResult& r, const std::string& path) {
  ordered_json j;
  j["schema"] = "inhand.result.v1";
  j["success"] = r.success;
  j["cause"] = to_string(r.cause);
  j["pos_error"] = r.pos_error;
  j["rot_error"] = r.rot_error;
  j["plan_seconds"] = r.plan_seconds;
  j["exec_seconds"] = r.exec_seconds;
  j["message"] = r.message;
  write_text(path, j.dump(2) + "\n");
}

}  // namespace inhand
