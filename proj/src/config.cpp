#include "panslam/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "panslam/angles.hpp"

namespace panslam::cfg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class KeyValues {
 public:
  explicit KeyValues(const std::string& text) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw std::invalid_argument("config: bad section at line " +
                                      std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("config: expected key=value at line " +
                                    std::to_string(lineno));
      std::string key = trim(line.substr(0, eq));
      if (key.empty())
        throw std::invalid_argument("config: empty key at line " +
                                    std::to_string(lineno));
      if (!section.empty() && key.find('.') == std::string::npos)
        key = section + "." + key;
      values_[key] = trim(line.substr(eq + 1));
    }
  }

  bool take_string(const std::string& key, std::string& out) {
    auto it = values_.find(key);
    if (it == values_.end()) return false;
    out = it->second;
    values_.erase(it);
    return true;
  }
  void take(const std::string& key, double& out) {
    std::string s;
    if (!take_string(key, s)) return;
    try {
      std::size_t pos = 0;
      out = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad number for " + key + ": '" + s + "'");
    }
  }
  void take(const std::string& key, int& out) {
    double d = out;
    take(key, d);
    out = static_cast<int>(d);
  }
  void take(const std::string& key, std::uint64_t& out) {
    std::string s;
    if (!take_string(key, s)) return;
    try {
      out = std::stoull(s);
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad integer for " + key);
    }
  }
  void take(const std::string& key, bool& out) {
    std::string s;
    if (!take_string(key, s)) return;
    if (s == "true" || s == "1")
      out = true;
    else if (s == "false" || s == "0")
      out = false;
    else
      throw std::invalid_argument("config: bad boolean for " + key + ": '" + s + "'");
  }
  void take_list3(const std::string& key, std::array<double, 3>& out) {
    std::string s;
    if (!take_string(key, s)) return;
    std::istringstream ss(s);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
      if (i >= 3) throw std::invalid_argument("config: " + key + " needs 3 values");
      out[static_cast<std::size_t>(i++)] = std::stod(trim(tok));
    }
    if (i != 3) throw std::invalid_argument("config: " + key + " needs 3 values");
  }

  void expect_empty() const {
    if (values_.empty()) return;
    std::string msg = "config: unknown keys:";
    for (const auto& [k, v] : values_) msg += " " + k;
    throw std::invalid_argument(msg);
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  KeyValues kv(text);
  ExperimentConfig c;

  kv.take_string("run.env", c.env_path);
  std::string mode;
  if (kv.take_string("run.mode", mode)) c.mode = ctrl::mode_from_string(mode);
  kv.take("run.merged", c.merged);
  kv.take("run.duration", c.duration);
  kv.take("run.trials", c.n_trials);
  kv.take("run.seed", c.seed);
  kv.take_string("run.out_dir", c.out_dir);
  kv.take("run.sim_dt", c.sim_dt);
  kv.take("run.plan_period", c.plan_period);
  kv.take("run.map_rebuild_period", c.map_rebuild_period);
  kv.take("run.sample_period", c.sample_period);
  kv.take("run.fault_timeout", c.fault_timeout);
  kv.take("run.jobs", c.jobs);

  kv.take("env.resolution", c.env_resolution);
  kv.take("env.origin_x", c.env_origin_x);
  kv.take("env.origin_y", c.env_origin_y);
  kv.take("env.start_x", c.start_x);
  kv.take("env.start_y", c.start_y);
  kv.take("env.start_theta", c.start_theta);

  kv.take("kin.D", c.kin.wheel_center_distance);
  kv.take("kin.r", c.kin.wheel_radius);
  kv.take_list3("kin.alpha", c.kin.wheel_angles);
  kv.take("kin.joint_gear", c.kin.joint_gear_ratio);
  kv.take("kin.wheel_omega_limit", c.kin.wheel_omega_limit);
  c.kin.finalize();

  kv.take("world.lrf_max_range", c.world.lrf_max_range);
  kv.take("world.robot_radius", c.world.robot_radius);
  kv.take("world.sigma_gyro", c.world.noise.sigma_gyro);
  kv.take("world.odom_a_t", c.world.noise.odom_a_t);
  kv.take("world.odom_b_t", c.world.noise.odom_b_t);
  kv.take("world.odom_a_r", c.world.noise.odom_a_r);
  kv.take("world.odom_b_r", c.world.noise.odom_b_r);
  kv.take("world.sigma_wheel_vel", c.world.noise.sigma_wheel_vel);
  double tick_deg = rad2deg(c.world.noise.encoder_tick);
  kv.take("world.encoder_tick_deg", tick_deg);
  c.world.noise.encoder_tick = deg2rad(tick_deg);

  double fov_deg = rad2deg(c.camera.fov);
  kv.take("cam.fov_deg", fov_deg);
  c.camera.fov = deg2rad(fov_deg);
  kv.take("cam.max_depth", c.camera.max_depth);
  double ray_step_deg = rad2deg(c.camera.ray_step);
  kv.take("cam.ray_step_deg", ray_step_deg);
  c.camera.ray_step = deg2rad(ray_step_deg);

  kv.take("map.resolution", c.map_resolution);
  kv.take("map.l_occ", c.map.l_occ);
  kv.take("map.l_free", c.map.l_free);
  kv.take("map.l_max", c.map.l_max);
  kv.take("map.p_occupied", c.map.p_occupied);
  kv.take("map.p_free", c.map.p_free);

  kv.take("graph.node_dist", c.node_policy.min_displacement);
  kv.take("graph.node_angle", c.node_policy.min_rotation);
  kv.take("graph.loop_min_sep", c.loop_policy.min_node_separation);
  kv.take("graph.loop_radius", c.loop_policy.radius);
  kv.take("graph.loop_overlap", c.loop_policy.min_overlap);
  kv.take("graph.loop_sigma_xy", c.loop_policy.sigma_xy);
  kv.take("graph.loop_sigma_theta", c.loop_policy.sigma_theta);

  kv.take("ctrl.horizon", c.ctrl.horizon_steps);
  kv.take("ctrl.dt", c.ctrl.step_dt);
  kv.take("ctrl.v_max", c.ctrl.v_max);
  kv.take("ctrl.w_max", c.ctrl.w_max);
  kv.take("ctrl.w_pos", c.ctrl.w_pos);
  kv.take("ctrl.w_head", c.ctrl.w_head);
  kv.take("ctrl.w_effort", c.ctrl.w_effort);
  kv.take("ctrl.max_iterations", c.ctrl.max_iterations);
  kv.take("ctrl.lookahead", c.ctrl.lookahead);
  kv.take("ctrl.pursuit_gain", c.ctrl.pursuit_gain);

  kv.take("est.q_pos", c.est.q_pos);
  kv.take("est.q_theta", c.est.q_theta);
  kv.take("est.q_vel", c.est.q_vel);
  kv.take("est.q_omega", c.est.q_omega);
  kv.take("est.init_pos_var", c.est.init_pos_var);
  kv.take("est.init_theta_var", c.est.init_theta_var);
  kv.take("est.init_vel_var", c.est.init_vel_var);
  kv.take("est.q_gamma", c.est.q_gamma);
  kv.take("est.q_dgamma", c.est.q_dgamma);
  kv.take("est.diff_imu_variance", c.est.diff_imu_variance);

  kv.expect_empty();

  if (!(c.duration > 0.0))
    throw std::invalid_argument("config: duration must be > 0");
  if (c.n_trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(c.sim_dt > 0.0) || c.sim_dt > c.ctrl.step_dt)
    throw std::invalid_argument("config: sim_dt must be in (0, ctrl.dt]");
  if (c.jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& o) {
  if (!o.env.empty()) cfg.env_path = o.env;
  if (!o.mode.empty()) cfg.mode = ctrl::mode_from_string(o.mode);
  if (!o.merged.empty()) {
    if (o.merged == "true")
      cfg.merged = true;
    else if (o.merged == "false")
      cfg.merged = false;
    else
      throw std::invalid_argument("--merged expects true or false");
  }
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.n_trials = *o.trials;
  if (o.duration) cfg.duration = *o.duration;
}

}  // namespace panslam::cfg
