#include "inhand/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "inhand/sim.hpp"

namespace inhand {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PlanArtifacts run_plan(const ScenarioConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  PlanArtifacts art;

  try {
    art.candidates = enumerate_grasp_candidates(
        cfg.hand, cfg.object, cfg.pairing, make_static_feasibility_filter(cfg, cfg.start_pose));
  } catch (const std::exception& e) {
    throw RunnerError("candidates", e.what());
  }
  if (art.candidates.empty()) {
    throw RunnerError("candidates", "no feasible grasp candidates (task unplannable)");
  }
  const Grasp g_s = cfg.make_initial_grasp();
  if (std::find(art.candidates.begin(), art.candidates.end(), g_s) == art.candidates.end()) {
    throw RunnerError("candidates", "initial grasp is not among the enumerated candidates");
  }

  GraspCostEvaluator evaluator(cfg.hand, cfg.object, cfg.env, cfg.q_home, cfg.ik, cfg.wrench,
                               cfg.cost_weights, cfg.w_ext);

  try {
    const ValidityFn validity =
        make_validity_fn(cfg.hand, cfg.object, cfg.env, art.candidates, cfg.ik_valid_threshold,
                         cfg.q_home, cfg.ik);
    art.path = plan_path(cfg.start_pose, cfg.goal_pose, validity, cfg.planner);
  } catch (const std::exception& e) {
    throw RunnerError("path", e.what());
  }

  try {
    TimestampOptimization opt =
        optimize_timestamps(art.path, art.candidates, evaluator, cfg.trajectory);
    art.trajectory = std::move(opt.trajectory);
    art.traj_cost = std::move(opt.cost);
  } catch (const std::exception& e) {
    throw RunnerError("trajectory", e.what());
  }

  try {
    art.plan = plan_dp(art.trajectory, g_s, cfg.pairing, evaluator, cfg.reward_weights);
  } catch (const std::exception& e) {
    throw RunnerError("sequence", e.what());
  }

  art.plan_seconds = seconds_since(t0);
  try {
    write_plan_artifacts(art, cfg, out_dir);
  } catch (const std::exception& e) {
    throw RunnerError("artifacts", e.what());
  }
  return art;
}

TrialResult run_execute(const ScenarioConfig& cfg, const PlanArtifacts& art,
                        const std::string& out_dir, const ExecuteOptions& opts) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  TrialResult result;

  const Grasp g_s = cfg.make_initial_grasp();
  const IkResult ik0 =
      solve_ik(cfg.hand, cfg.q_home, cfg.start_pose, g_s, cfg.env, cfg.ik);
  Simulator sim(cfg.hand, cfg.object, cfg.env, cfg.sim, cfg.gains.K_pj);
  SimState state = sim.make_state(cfg.start_pose, ik0.q_star);

  auto policy = std::make_shared<PlanLookupPolicy>(art.plan);
  ManipulationController controller(cfg.hand, cfg.object, art.trajectory, policy, g_s,
                                    cfg.goal_pose, cfg.gains, cfg.transitions, cfg.wrench,
                                    cfg.w_ext, ik0.q_star, cfg.exec.preroll);

  const double T = art.trajectory.duration();
  const int M = art.trajectory.sample_count();
  const double t_total_nominal = cfg.exec.preroll + T + cfg.exec.posthold;
  const double t_budget = t_total_nominal + cfg.exec.max_extra_time;

  const int ctrl_every = std::max(1, static_cast<int>(std::round(cfg.gains.dt / cfg.sim.dt)));
  const int mgr_every =
      std::max(1, static_cast<int>(std::round(cfg.exec.manager_dt / cfg.sim.dt)));

  std::ofstream telemetry;
  std::ofstream simlog;
  if (opts.write_logs) {
    fs::create_directories(out_dir);
    telemetry.open((fs::path(out_dir) / "telemetry.tsv").string(), std::ios::binary);
    telemetry << "# inhand.telemetry.v1 t traj_t m phase pos_err rot_err";
    for (int i = 0; i < cfg.hand.dof(); ++i) telemetry << " qref" << i;
    for (int i = 0; i < cfg.hand.dof(); ++i) telemetry << " q" << i;
    telemetry << " px py pz qx qy qz qw";
    for (int l = 0; l < cfg.hand.num_links(); ++l) telemetry << " fstar" << l << " fmeas" << l;
    telemetry << "\n";
    simlog.open((fs::path(out_dir) / "simlog.tsv").string(), std::ios::binary);
    simlog << "# inhand.simlog.v1 t px py pz qx qy qz qw vx vy vz wx wy wz\n";
  }

  Eigen::VectorXd q_ref = ik0.q_star;
  bool fault_done = false;
  long step_index = 0;
  bool dropped = false;
  bool collided = false;

  auto check_failures = [&]() {
    const double t_ref = std::clamp(controller.trajectory_time(), 0.0, T);
    const double ref_z = art.trajectory.at(t_ref).pose.p.z();
    if (state.p.z() < ref_z - cfg.exec.drop_margin) {
      dropped = true;
      return;
    }
    // unintended collisions: links or palm penetrating the environment, palm
    // hitting the object
    const auto poses = forward_kinematics(cfg.hand, state.q);
    const auto prims = hand_world_primitives(cfg.hand, poses, /*with_palm=*/true);
    for (const auto& lp : prims) {
      for (const auto& sp : cfg.env.statics) {
        if (distance(sp, lp) < -cfg.exec.collision_tol) {
          collided = true;
          return;
        }
      }
    }
    std::vector<Primitive> palm_world;
    for (const auto& p : cfg.hand.palm) palm_world.push_back(transformed(p, cfg.hand.base_pose));
    std::vector<Primitive> obj_world;
    const Pose op = state.object_pose();
    for (const auto& p : cfg.object.primitives) obj_world.push_back(transformed(p, op));
    if (any_overlap(palm_world, obj_world, -cfg.exec.collision_tol)) collided = true;
  };

  while (state.t < t_budget) {
    const bool plan_finished = controller.trajectory_time() >= T - 1e-9 &&
                               controller.next_sample() > M && !controller.transition();
    if (plan_finished && state.t >= t_total_nominal) break;

    if (step_index % mgr_every == 0) {
      ControlSnapshot snap;
      snap.t = state.t;
      snap.q = state.q;
      snap.object_pose = state.object_pose();
      snap.link_forces = sim.sense_contacts(state);
      controller.manager_update(snap);
    }
    if (step_index % ctrl_every == 0) {
      ControlSnapshot snap;
      snap.t = state.t;
      snap.q = state.q;
      snap.object_pose = state.object_pose();
      snap.link_forces = sim.sense_contacts(state);
      try {
        q_ref = controller.control_cycle(snap);
      } catch (const std::exception& e) {
        result.cause = FailureCause::PlanningFailed;
        result.message = std::string("controller: ") + e.what();
        break;
      }

      if (opts.write_logs) {
        const ControlTelemetry& tm = controller.telemetry();
        const Pose op = snap.object_pose;
        const Vector4<double> qv = rotation_to_quat<double>(op.R);
        telemetry << fmt(snap.t) << "\t" << fmt(tm.traj_time) << "\t" << tm.sample_index << "\t"
                  << (tm.transition.empty() ? "-" : tm.transition) << "\t"
                  << fmt((op.p - tm.ref_pose.p).norm()) << "\t"
                  << fmt(rotation_angle<double>(op.R, tm.ref_pose.R));
        for (int i = 0; i < q_ref.size(); ++i) telemetry << "\t" << fmt(q_ref(i));
        for (int i = 0; i < state.q.size(); ++i) telemetry << "\t" << fmt(state.q(i));
        for (int i = 0; i < 3; ++i) telemetry << "\t" << fmt(op.p(i));
        for (int i = 0; i < 4; ++i) telemetry << "\t" << fmt(qv(i));
        std::vector<Eigen::Vector3d> fstar(cfg.hand.num_links(), Eigen::Vector3d::Zero());
        for (const auto& [link, f] : tm.desired_forces) fstar[link] = f;
        for (int l = 0; l < cfg.hand.num_links(); ++l) {
          telemetry << "\t" << fmt(fstar[l].norm()) << "\t"
                    << fmt(snap.link_forces[l].force.norm());
        }
        telemetry << "\n";
      }
    }

    // fault injection: yank the first grasp finger outward
    if (opts.fault_retract_time && !fault_done &&
        state.t >= cfg.exec.preroll + *opts.fault_retract_time) {
      fault_done = true;
      const auto [jb, je] = cfg.hand.finger_joint_span(0);
      for (int i = jb; i < je; ++i) q_ref(i) = cfg.q_home(i);
    }
    if (fault_done) {
      const auto [jb, je] = cfg.hand.finger_joint_span(0);
      for (int i = jb; i < je; ++i) q_ref(i) = cfg.q_home(i);
    }

    const bool wext_now = controller.trajectory_time() >= T - 1e-9;
    const Eigen::Vector3d fe = (cfg.w_ext.last_sample_only && !wext_now)
                                   ? Eigen::Vector3d::Zero()
                                   : cfg.w_ext.force;
    const Eigen::Vector3d te = (cfg.w_ext.last_sample_only && !wext_now)
                                   ? Eigen::Vector3d::Zero()
                                   : cfg.w_ext.torque;
    try {
      sim.step(state, q_ref, fe, te);
    } catch (const std::exception& e) {
      result.cause = FailureCause::PlanningFailed;
      result.message = std::string("sim: ") + e.what();
      break;
    }
    ++step_index;

    if (opts.write_logs && step_index % ctrl_every == 0) {
      const Pose op = state.object_pose();
      const Vector4<double> qv = rotation_to_quat<double>(op.R);
      simlog << fmt(state.t);
      for (int i = 0; i < 3; ++i) simlog << "\t" << fmt(op.p(i));
      for (int i = 0; i < 4; ++i) simlog << "\t" << fmt(qv(i));
      for (int i = 0; i < 3; ++i) simlog << "\t" << fmt(state.v(i));
      for (int i = 0; i < 3; ++i) simlog << "\t" << fmt(state.w(i));
      simlog << "\n";
    }

    if (step_index % ctrl_every == 0) {
      check_failures();
      if (dropped || collided) break;
    }
  }

  const Pose final_pose = state.object_pose();
  result.pos_error = (final_pose.p - cfg.goal_pose.p).norm();
  result.rot_error = rotation_angle<double>(final_pose.R, cfg.goal_pose.R);
  if (result.cause == FailureCause::None) {
    if (dropped) {
      result.cause = FailureCause::Dropped;
    } else if (collided) {
      result.cause = FailureCause::Collision;
    } else if (result.pos_error > cfg.exec.pos_tol || result.rot_error > cfg.exec.rot_tol) {
      result.cause = FailureCause::PoseError;
    }
  }
  result.success = (result.cause == FailureCause::None);
  result.plan_seconds = art.plan_seconds;
  result.exec_seconds = seconds_since(t0);

  if (opts.write_logs) {
    write_trial_result(result, (fs::path(out_dir) / "result.json").string());
  }
  return result;
}

TrialVariation sample_variation(const VariationSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  TrialVariation v;
  v.start_xy.x() = uniform(-spec.start_xy, spec.start_xy);
  v.start_xy.y() = uniform(-spec.start_xy, spec.start_xy);
  v.start_yaw = uniform(-spec.start_yaw_deg, spec.start_yaw_deg) * 3.14159265358979323846 / 180.0;
  v.goal_xy.x() = uniform(-spec.goal_xy, spec.goal_xy);
  v.goal_xy.y() = uniform(-spec.goal_xy, spec.goal_xy);
  v.goal_z = uniform(spec.goal_z_lo, spec.goal_z_hi);
  v.medium = is_medium_variation(v, spec);
  return v;
}

bool is_medium_variation(const TrialVariation& v, const VariationSpec& spec) {
  const double yaw_deg = std::abs(v.start_yaw) * 180.0 / 3.14159265358979323846;
  return std::abs(v.start_xy.x()) <= spec.medium_pos &&
         std::abs(v.start_xy.y()) <= spec.medium_pos && yaw_deg <= spec.medium_deg &&
         std::abs(v.goal_xy.x()) <= spec.medium_pos &&
         std::abs(v.goal_xy.y()) <= spec.medium_pos && std::abs(v.goal_z) <= spec.medium_pos;
}

ScenarioConfig apply_variation(const ScenarioConfig& cfg, const TrialVariation& v) {
  ScenarioConfig out = cfg;
  out.start_pose.p.x() += v.start_xy.x();
  out.start_pose.p.y() += v.start_xy.y();
  out.start_pose.R =
      rotation_about(Eigen::Vector3d::UnitZ(), v.start_yaw) * out.start_pose.R;
  out.goal_pose.p.x() += v.goal_xy.x();
  out.goal_pose.p.y() += v.goal_xy.y();
  out.goal_pose.p.z() += v.goal_z;
  return out;
}

BatchSummary run_batch(const ScenarioConfig& cfg, int n_trials, const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (n_trials < 1) throw RunnerError("batch", "n_trials must be at least 1");
  fs::create_directories(out_dir);

  BatchSummary summary;
  std::mt19937_64 rng(cfg.seed);
  for (int i = 0; i < n_trials; ++i) {
    const TrialVariation v = sample_variation(cfg.variation, rng);
    ScenarioConfig trial_cfg = apply_variation(cfg, v);
    trial_cfg.seed = cfg.seed + 1000 + i;
    trial_cfg.planner.seed = trial_cfg.seed;
    const std::string trial_dir = (fs::path(out_dir) / ("trial_" + std::to_string(i))).string();

    TrialResult res;
    try {
      const PlanArtifacts art = run_plan(trial_cfg, trial_dir);
      ExecuteOptions opts;
      opts.write_logs = false;
      res = run_execute(trial_cfg, art, trial_dir, opts);
    } catch (const RunnerError& e) {
      res.success = false;
      res.cause = FailureCause::PlanningFailed;
      res.message = e.stage + ": " + e.what();
    } catch (const std::exception& e) {
      res.success = false;
      res.cause = FailureCause::PlanningFailed;
      res.message = e.what();
    }
    write_trial_result(res, (fs::path(trial_dir) / "result.json").string());

    BatchBucket& bucket = v.medium ? summary.medium : summary.large;
    bucket.trials += 1;
    bucket.successes += res.success ? 1 : 0;
    bucket.sum_rot_error += res.rot_error;
    summary.trials.emplace_back(v, res);
  }

  write_batch_tables(summary, out_dir);
  return summary;
}

void write_batch_tables(const BatchSummary& s, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out((fs::path(out_dir) / "batch_trials.tsv").string(), std::ios::binary);
    out << "# inhand.batchtrials.v1 trial bucket start_dx start_dy start_yaw goal_dx goal_dy "
           "goal_dz success cause pos_error rot_error\n";
    for (size_t i = 0; i < s.trials.size(); ++i) {
      const auto& [v, r] = s.trials[i];
      out << i << "\t" << (v.medium ? "medium" : "large") << "\t" << fmt(v.start_xy.x()) << "\t"
          << fmt(v.start_xy.y()) << "\t" << fmt(v.start_yaw) << "\t" << fmt(v.goal_xy.x())
          << "\t" << fmt(v.goal_xy.y()) << "\t" << fmt(v.goal_z) << "\t" << (r.success ? 1 : 0)
          << "\t" << to_string(r.cause) << "\t" << fmt(r.pos_error) << "\t" << fmt(r.rot_error)
          << "\n";
    }
  }
  {
    std::ofstream out((fs::path(out_dir) / "batch_summary.tsv").string(), std::ios::binary);
    out << "# inhand.batchsummary.v1 bucket trials success_rate mean_rot_error\n";
    out << "medium\t" << s.medium.trials << "\t" << fmt(s.medium.success_rate()) << "\t"
        << fmt(s.medium.mean_rot_error()) << "\n";
    out << "large\t" << s.large.trials << "\t" << fmt(s.large.success_rate()) << "\t"
        << fmt(s.large.mean_rot_error()) << "\n";
  }
}

}  // namespace inhand
