#include "panslam/trial.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <thread>
#include <cstdio>
#include <cstdlib>

#include "panslam/planner.hpp"

namespace panslam::sim {

namespace {

using ctrl::PlatformMode;

Eigen::MatrixXd velocity_measurement_matrix() {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 6);
  H(0, 3) = 1.0;
  H(1, 4) = 1.0;
  H(2, 5) = 1.0;
  return H;
}

// True occupied-class cell within radius of (x, y) in the latest map.
bool occupied_class_near(const ClassGrid& cls, double x, double y, double r) {
  const auto& s = cls.spec;
  const int x0 = s.cell_x(x - r), x1 = s.cell_x(x + r);
  const int y0 = s.cell_y(y - r), y1 = s.cell_y(y + r);
  const double r2 = r * r;
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      if (!s.contains(ix, iy)) continue;
      if (cls.at(ix, iy) != gridkern::CellClass::kOccupied) continue;
      const double dx = s.center_x(ix) - x, dy = s.center_y(iy) - y;
      if (dx * dx + dy * dy <= r2) return true;
    }
  }
  return false;
}

// Reactive speed cap from the raw scan. For every scan direction that has a
// positive component along the commanded motion, the admissible travel is
// (range - radius - margin) / cos(offset); the command is scaled so one
// control period cannot close the gap to unmapped structure. Rays near
// perpendicular barely constrain, so wall-following stays live while head-on
// approaches brake smoothly.
void lrf_speed_guard(const std::vector<double>& lrf, double theta_est,
                     double robot_radius, double ctrl_dt,
                     ExtendedVelocity& cmd) {
  const double speed = hypot2(cmd.vx, cmd.vy);
  if (speed < 1e-9) return;
  const double c = std::cos(theta_est), s = std::sin(theta_est);
  const double bx = c * cmd.vx + s * cmd.vy;
  const double by = -s * cmd.vx + c * cmd.vy;
  const double dir = std::atan2(by, bx);
  const double margin = 0.03;
  double allowed = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 360; ++i) {
    const double off = wrap_pi(deg2rad(static_cast<double>(i)) - dir);
    const double ca = std::cos(off);
    if (ca < 0.05) continue;
    const double gap = lrf[static_cast<std::size_t>(i)] - robot_radius - margin;
    allowed = std::min(allowed, std::max(0.0, gap) / ca);
  }
  const double cap = allowed / (2.0 * ctrl_dt);
  if (speed > cap) {
    const double k = cap / speed;
    cmd.vx *= k;
    cmd.vy *= k;
  }
}

}  // namespace

std::string method_name(const BatchCell& cell) {
  return ctrl::to_string(cell.mode) + (cell.merged ? "" : "_NC");
}

TrialOutput run_trial(const cfg::ExperimentConfig& cfg, std::uint64_t seed) {
  const world::Environment env = world::load_environment(
      cfg.env_path, cfg.env_resolution, cfg.env_origin_x, cfg.env_origin_y);
  return run_trial(cfg, seed, env);
}

TrialOutput run_trial(const cfg::ExperimentConfig& cfg, std::uint64_t seed,
                      const world::Environment& env) {
  TrialOutput out;
  metrics::TrialRecord& rec = out.record;
  rec.mode = ctrl::to_string(cfg.mode);
  rec.merged = cfg.merged;
  rec.seed = seed;
  rec.duration = cfg.duration;

  const Pose2D start{cfg.start_x, cfg.start_y, cfg.start_theta};
  world::World world(env, cfg.world, cfg.kin, cfg.camera, start, 0.0, seed);
  std::mt19937_64 loop_rng(seed ^ 0x9E3779B97F4A7C15ull);

  out.ground_truth = world::ground_truth_classes(
      env, cfg.map_resolution, cfg.start_x, cfg.start_y, cfg.world.robot_radius);
  map::OccupancyGrid grid(out.ground_truth.spec, cfg.map);

  // Robot filter [x y theta vx vy dtheta], camera filter [gamma dgamma].
  const est::ProcessModel robot_model = est::unicycle_lateral_model(
      cfg.est.q_pos, cfg.est.q_theta, cfg.est.q_vel, cfg.est.q_omega);
  const est::ProcessModel cam_model =
      est::constant_rate_model(cfg.est.q_gamma, cfg.est.q_dgamma);
  est::GaussianEstimate robot;
  robot.mean = Eigen::VectorXd::Zero(6);
  robot.mean << start.x, start.y, start.theta, 0.0, 0.0, 0.0;
  Eigen::VectorXd pr(6);
  pr << cfg.est.init_pos_var, cfg.est.init_pos_var, cfg.est.init_theta_var,
      cfg.est.init_vel_var, cfg.est.init_vel_var, cfg.est.init_vel_var;
  robot.cov = pr.asDiagonal();
  est::GaussianEstimate camera;
  camera.mean = Eigen::VectorXd::Zero(2);
  camera.cov = Eigen::Vector2d(1e-8, 1e-6).asDiagonal();

  const Eigen::MatrixXd H_vel = velocity_measurement_matrix();
  Eigen::MatrixXd H_gyro = Eigen::MatrixXd::Zero(1, 6);
  H_gyro(0, 5) = 1.0;
  Eigen::MatrixXd H_enc = Eigen::MatrixXd::Zero(1, 2);
  H_enc(0, 0) = 1.0;
  Eigen::MatrixXd H_rate = Eigen::MatrixXd::Zero(1, 2);
  H_rate(0, 1) = 1.0;
  const double tick = cfg.world.noise.encoder_tick;
  const double enc_var = tick * tick / 12.0;
  const double gyro_var =
      std::max(cfg.world.noise.sigma_gyro * cfg.world.noise.sigma_gyro, 1e-12);
  const double wheel_var = std::max(
      cfg.world.noise.sigma_wheel_vel * cfg.world.noise.sigma_wheel_vel, 1e-12);

  graph::PoseGraph& graph = out.graph;
  Eigen::Matrix3d accum_cov = Eigen::Matrix3d::Zero();
  double gamma_var_at_last_node = 0.0;
  // Per-node camera rays for map regeneration after graph corrections.
  std::vector<std::vector<world::CamRay>> node_rays;
  bool graph_dirty = false;
  double last_rebuild = 0.0;
  Pose2D raw_anchor;  // odometry-frame pose at the latest node insertion

  ctrl::RecedingHorizonController controller(cfg.mode, cfg.ctrl);
  std::optional<plan::PlanResult> plan;
  double last_plan_time = -1e9;
  ClassGrid latest_cls = grid.class_grid();
  double stuck_time = 0.0;
  std::optional<std::pair<double, double>> banned_goal;
  double banned_until = -1.0;
  double retreat_until = -1.0;
  double retreat_dir = 0.0;  // world-frame escape heading

  const double dt = cfg.ctrl.step_dt;
  const int substeps = std::max(1, static_cast<int>(std::round(dt / cfg.sim_dt)));
  const double sub_dt = dt / substeps;
  double fault_time = 0.0;
  double next_sample = 0.0;

  auto sample_metrics = [&](double t) {
    const auto ent = grid.entropy();
    rec.entropy_norm.push_back({t, ent.normalized});
    rec.path_length.push_back({t, world.path_length()});
    rec.wheel_rotation.push_back({t, world.wheel_rotation()});
    rec.loop_count.push_back({t, static_cast<double>(rec.n_loop_closures)});
    rec.bac.push_back(
        {t, metrics::balanced_accuracy(grid.class_grid(), out.ground_truth)});
  };

  while (world.state().time < cfg.duration - 1e-9) {
    const double t = world.state().time;

    // --- sense ---
    world::SensorFrame frame = world.sense(grid.spec());

    // --- estimate ---
    // The sensors describe the window that just executed (zero-order hold):
    // correct the rate states with them first, then integrate the window.
    robot = est::ekf_update(robot,
                            (Eigen::Vector3d() << frame.wheel_vel_body.vx,
                             frame.wheel_vel_body.vy, frame.wheel_vel_body.dtheta)
                                .finished(),
                            H_vel, wheel_var * Eigen::Matrix3d::Identity(), {},
                            {2});
    {
      const Eigen::Vector3d v_icp(frame.odom_delta.x / dt,
                                  frame.odom_delta.y / dt,
                                  frame.odom_delta.theta / dt);
      Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
      const double sxy = std::max(frame.odom_sigma_xy, 1e-6) / dt;
      const double sth = std::max(frame.odom_sigma_theta, 1e-6) / dt;
      R(0, 0) = sxy * sxy;
      R(1, 1) = sxy * sxy;
      R(2, 2) = sth * sth;
      robot = est::ekf_update(robot, v_icp, H_vel, R, {}, {2});
    }
    robot = est::ekf_update(robot,
                            Eigen::VectorXd::Constant(1, frame.imu_base_gyro),
                            H_gyro, Eigen::MatrixXd::Constant(1, 1, gyro_var),
                            {}, {2});
    robot = est::ekf_predict(robot, robot_model, dt);

    const est::DifferentialImuMeasurement diff = est::differential_imu(
        frame.imu_base_gyro, t, frame.imu_cam_gyro, t);
    camera = est::ekf_update(camera, Eigen::VectorXd::Constant(1, diff.rel_rate),
                             H_rate,
                             Eigen::MatrixXd::Constant(1, 1, cfg.est.diff_imu_variance));
    camera = est::ekf_predict(camera, cam_model, dt);
    const double gamma_enc = static_cast<double>(frame.encoder_ticks) * tick;
    camera = est::ekf_update(camera, Eigen::VectorXd::Constant(1, gamma_enc),
                             H_enc, Eigen::MatrixXd::Constant(1, 1, enc_var),
                             {0}, {0});

    // --- merge ---
    est::MergedState merged;
    double gamma_used = 0.0;
    if (cfg.merged) {
      merged = est::merge_states({t, robot}, {t, camera});
      gamma_used = camera.mean(0);
      rec.merged_var_violation.push_back(std::abs(
          merged.cov(2, 2) - (robot.cov(2, 2) + camera.cov(0, 0))));
    } else {
      merged = est::compose_unmerged({t, robot}, gamma_enc, diff.rel_rate);
      gamma_used = gamma_enc;
    }

    // Map-frame pose: the filters run in the odometry frame, whose heading
    // has no absolute reference; anchoring the current odometry delta on the
    // latest optimized node keeps the published pose graph-consistent.
    Pose2D map_pose = merged.pose();
    if (!graph.nodes.empty()) {
      map_pose = se2_compose(graph.nodes.back().pose,
                             se2_between(raw_anchor, merged.pose()));
    }
    est::MergedState slam_state = merged;
    slam_state.x = map_pose.x;
    slam_state.y = map_pose.y;
    slam_state.psi = map_pose.theta;
    const double theta_base =
        wrap_pi(map_pose.theta - gamma_used);  // base heading, map frame

    // --- map through the estimated pose ---
    const auto hits_est =
        map::project_camera_rays(grid.spec(), map_pose.x, map_pose.y,
                                 map_pose.theta, frame.cam_rays,
                                 cfg.camera.max_depth);
    grid.update(hits_est);

    // --- pose graph ---
    {
      const double sxy = std::max(frame.odom_sigma_xy, 1e-6);
      const double sth = std::max(frame.odom_sigma_theta, 1e-6);
      accum_cov(0, 0) += sxy * sxy;
      accum_cov(1, 1) += sxy * sxy;
      accum_cov(2, 2) += sth * sth;
    }
    std::vector<std::int32_t> signature;
    signature.reserve(hits_est.size());
    for (const auto& h : hits_est)
      if (grid.spec().contains(h.ix, h.iy))
        signature.push_back(static_cast<std::int32_t>(grid.spec().index(h.ix, h.iy)));

    Eigen::Matrix3d edge_cov = accum_cov;
    if (cfg.merged) {
      // The edge connects two merged headings: both ends' camera-angle
      // variance enters the relative rotation uncertainty.
      edge_cov(2, 2) += gamma_var_at_last_node + camera.cov(0, 0);
    }
    const Pose2D true_merged{world.state().pose.x, world.state().pose.y,
                             world.state().psi()};
    if (auto nid = graph::maybe_add_node(graph, map_pose, signature, edge_cov,
                                         cfg.node_policy, t, true_merged)) {
      accum_cov.setZero();
      gamma_var_at_last_node = cfg.merged ? camera.cov(0, 0) : 0.0;
      node_rays.push_back(frame.cam_rays);
      raw_anchor = merged.pose();
      if (auto loop =
              graph::detect_loop_closure(graph, *nid, cfg.loop_policy, loop_rng)) {
        graph.edges.push_back(*loop);
        ++rec.n_loop_closures;
        const auto opt = graph::optimize_graph(graph);
        double moved = 0.0;
        for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
          moved = std::max(moved,
                           hypot2(opt.poses[i].x - graph.nodes[i].pose.x,
                                  opt.poses[i].y - graph.nodes[i].pose.y));
          graph.nodes[i].pose = opt.poses[i];
        }
        if (moved > 0.01) graph_dirty = true;
        const auto& corrected = graph.nodes[static_cast<std::size_t>(*nid)].pose;
        const double s2 = cfg.loop_policy.sigma_xy * cfg.loop_policy.sigma_xy;
        const Eigen::Vector2d before = robot.mean.head<2>();
        robot = est::fuse_loop_closure_xy(
            robot, Eigen::Vector2d(corrected.x, corrected.y),
            s2 * Eigen::Matrix2d::Identity());
        // The fusion shifts the filter toward the map frame; move the
        // odometry anchor with it so the anchored delta stays pure odometry.
        raw_anchor.x += robot.mean(0) - before(0);
        raw_anchor.y += robot.mean(1) - before(1);
      }
    }

    // Regenerate the map from the corrected node poses after closures, the
    // way a graph-based back-end republishes its 2-D projection. Incremental
    // painting continues on top between rebuilds.
    // Rebuild cost grows with the node count; stretch the cadence as the
    // graph grows so a long trial stays roughly linear.
    const double rebuild_period = std::max(
        cfg.map_rebuild_period, 0.02 * static_cast<double>(graph.nodes.size()));
    if (graph_dirty && t - last_rebuild >= rebuild_period) {
      map::OccupancyGrid fresh(grid.spec(), cfg.map);
      for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& n = graph.nodes[i];
        fresh.update(map::project_camera_rays(grid.spec(), n.pose.x, n.pose.y,
                                              n.pose.theta, node_rays[i],
                                              cfg.camera.max_depth));
      }
      grid = std::move(fresh);
      graph_dirty = false;
      last_rebuild = t;
    }

    // --- record ---
    rec.est_trajectory.push_back({t, map_pose.x, map_pose.y});
    rec.true_trajectory.push_back(
        {t, world.state().pose.x, world.state().pose.y});
    rec.theta_true_trace.push_back(world.state().pose.theta);
    out.estimate_trace.push_back(
        {t, robot.mean, robot.cov.diagonal()});
    if (t >= next_sample - 1e-9) {
      sample_metrics(t);
      next_sample += cfg.sample_period;
    }

    // --- plan ---
    const bool reached =
        plan &&
        hypot2(plan->waypoint.x - slam_state.x,
               plan->waypoint.y - slam_state.y) <
            cfg.node_policy.min_displacement &&
        std::abs(wrap_pi(plan->waypoint.psi - slam_state.psi)) < 0.25;
    if (stuck_time > 2.0 && t >= retreat_until && plan) {
      // Pinned against something the guard will not let us approach: back
      // away from the closest return, drop this goal, replan.
      std::size_t closest = 0;
      for (std::size_t i = 1; i < frame.lrf_ranges.size(); ++i)
        if (frame.lrf_ranges[i] < frame.lrf_ranges[closest]) closest = i;
      retreat_dir = wrap_pi(theta_base + deg2rad(static_cast<double>(closest)) + kPi);
      retreat_until = t + 1.0;
      banned_goal = {plan->waypoint.x, plan->waypoint.y};
      banned_until = t + 10.0;
      plan.reset();
      stuck_time = 0.0;
    }
    if (!plan || reached || t - last_plan_time >= cfg.plan_period) {
      latest_cls = grid.class_grid();
      auto frontiers = plan::detect_frontiers(latest_cls);
      if (frontiers.empty() && world.path_length() > 0.5) {
        rec.exploration_complete = true;
        break;
      }
      if (banned_goal && t < banned_until) {
        // Drop clusters around a goal the robot could not approach.
        std::erase_if(frontiers, [&](const plan::FrontierCluster& c) {
          return hypot2(c.centroid_x - banned_goal->first,
                        c.centroid_y - banned_goal->second) < 0.8;
        });
        if (frontiers.empty()) banned_goal.reset();
      }
      plan::PlannerParams pp;
      pp.inflate_radius = cfg.world.robot_radius + cfg.map_resolution;
      plan = plan::select_waypoint(frontiers, slam_state, latest_cls,
                                   cfg.camera, pp);
      last_plan_time = t;
      if (!plan && world.path_length() > 0.5) {
        rec.exploration_complete = true;
        break;
      }
    }

    // --- control ---
    ExtendedVelocity cmd{};
    bool fault = false;
    if (t < retreat_until) {
      cmd.vx = 0.3 * std::cos(retreat_dir);
      cmd.vy = 0.3 * std::sin(retreat_dir);
    } else if (plan) {
      auto sol = controller.solve(slam_state, theta_base, *plan);
      cmd = sol.command;
      fault = sol.fault;
    } else {
      fault = true;  // nothing reachable yet; hold still and retry
    }
    lrf_speed_guard(frame.lrf_ranges, theta_base, cfg.world.robot_radius, dt,
                    cmd);
    // Planned first-step motion must stay clear of mapped obstacles.
    if (occupied_class_near(latest_cls, slam_state.x + cmd.vx * dt,
                            slam_state.y + cmd.vy * dt,
                            cfg.world.robot_radius)) {
      cmd.vx = 0.0;
      cmd.vy = 0.0;
      fault = true;
    }
    rec.dpsi_cmd_trace.push_back(cmd.dtheta + cmd.dgamma);
    {
      const bool wants_motion =
          plan && hypot2(plan->waypoint.x - slam_state.x,
                         plan->waypoint.y - slam_state.y) > 0.35;
      const bool barely_moving = hypot2(cmd.vx, cmd.vy) < 0.02;
      stuck_time = (wants_motion && barely_moving) ? stuck_time + dt : 0.0;
    }
    fault_time = fault ? fault_time + dt : 0.0;
    if (fault_time > cfg.fault_timeout) {
      rec.failed = true;
      rec.failure_reason = "controller fault persisted";
      break;
    }

    if (std::getenv("PANSLAM_TRACE") && (rec.est_trajectory.size() % 10 == 1)) {
      std::printf(
          "t=%5.1f pos=(%.2f,%.2f) th=%.2f psi_ref=%.2f wp=(%.2f,%.2f) "
          "plen=%.2f cmd=(%.2f,%.2f,%.2f,%.2f) fault=%d\n",
          t, slam_state.x, slam_state.y, slam_state.psi,
          plan ? plan->waypoint.psi : 0.0, plan ? plan->waypoint.x : 0.0,
          plan ? plan->waypoint.y : 0.0, plan ? plan->path_length : -1.0,
          cmd.vx, cmd.vy, cmd.dtheta, cmd.dgamma, fault ? 1 : 0);
    }
    const kin::WheelCommand wheels =
        kin::extended_wheel_speeds(theta_base, cmd, cfg.kin);
    for (int i = 0; i < substeps; ++i) {
      world.step(wheels, sub_dt);
      const auto& tw = world.state().twist;
      const double c = std::cos(world.state().pose.theta);
      const double s = std::sin(world.state().pose.theta);
      rec.body_vy_trace.push_back(-s * tw.vx + c * tw.vy);
    }
    if (world.had_contact()) {
      rec.failed = true;
      rec.failure_reason = "collision";
      break;
    }
  }

  // --- final metrics ---
  sample_metrics(world.state().time);
  rec.total_path_length = world.path_length();
  rec.total_wheel_rotation = world.wheel_rotation();
  rec.n_graph_nodes = graph.nodes.size();
  out.final_map = grid.class_grid();
  rec.final_bac = metrics::balanced_accuracy(out.final_map, out.ground_truth);
  rec.final_entropy_norm = grid.entropy().normalized;
  if (rec.est_trajectory.size() >= 2)
    rec.final_ate = metrics::ate_rmse(rec.est_trajectory, rec.true_trajectory);
  return out;
}

namespace {

// Run fn(i) for i in [0, n) on up to `jobs` worker threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, n);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

BatchResult run_batch(const cfg::ExperimentConfig& cfg,
                      const std::vector<BatchCell>& cells) {
  if (cells.empty()) throw std::invalid_argument("run_batch: no cells");
  const world::Environment env = world::load_environment(
      cfg.env_path, cfg.env_resolution, cfg.env_origin_x, cfg.env_origin_y);

  BatchResult result;
  const int max_attempts = 2 * cfg.n_trials;
  for (const auto& cell : cells) {
    cfg::ExperimentConfig trial_cfg = cfg;
    trial_cfg.mode = cell.mode;
    trial_cfg.merged = cell.merged;

    CellResult cr;
    cr.cell = cell;
    std::vector<metrics::TrialRecord> attempts(
        static_cast<std::size_t>(max_attempts));
    std::vector<std::uint8_t> done(static_cast<std::size_t>(max_attempts), 0);

    // Waves of `jobs` trials over the shared seed list until enough succeed.
    int launched = 0, successes = 0;
    while (launched < max_attempts && successes < cfg.n_trials) {
      const int wave = std::min(cfg.jobs, max_attempts - launched);
      const int base = launched;
      parallel_for(wave, cfg.jobs, [&](int i) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(base + i);
        attempts[static_cast<std::size_t>(base + i)] =
            run_trial(trial_cfg, seed, env).record;
        done[static_cast<std::size_t>(base + i)] = 1;
      });
      launched += wave;
      successes = 0;
      for (int i = 0; i < launched; ++i)
        if (done[static_cast<std::size_t>(i)] &&
            !attempts[static_cast<std::size_t>(i)].failed)
          ++successes;
    }

    int kept_successes = 0;
    for (int i = 0; i < launched; ++i) {
      const auto& r = attempts[static_cast<std::size_t>(i)];
      cr.trials.push_back(r);
      if (!r.failed) ++kept_successes;
      if (kept_successes >= cfg.n_trials) break;
    }
    cr.summary = metrics::summarize(method_name(cell), cr.trials,
                                    static_cast<std::size_t>(cfg.n_trials));
    result.cells.push_back(std::move(cr));
  }
  return result;
}

BatchResult run_batch_to_dir(const cfg::ExperimentConfig& cfg,
                             const std::vector<BatchCell>& cells) {
  BatchResult result = run_batch(cfg, cells);
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<metrics::SummaryRow> rows;
  for (const auto& cell : result.cells) {
    for (const auto& trial : cell.trials) {
      const std::string name = method_name(cell.cell) + "_seed" +
                               std::to_string(trial.seed) + ".csv";
      io::write_trial_csv(cfg.out_dir + "/" + name, trial, cfg.sample_period);
    }
    rows.push_back(cell.summary);
  }
  io::write_summary_csv(cfg.out_dir + "/summary.csv", rows);
  return result;
}

}  // namespace panslam::sim
