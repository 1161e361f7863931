#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panslam/estimation.hpp"
#include "panslam/geometry.hpp"
#include "panslam/planner.hpp"

namespace panslam::ctrl {

/// Platform variants: A locks the camera joint, HH rotates base and camera
/// together, OC locks the base heading (semi-holonomic, linear dynamics),
/// Y0 forbids lateral body velocity (non-holonomic) with a pure-pursuit base
/// heading and solver-driven camera.
enum class PlatformMode { kA, kHH, kOC, kY0 };

PlatformMode mode_from_string(const std::string& s);
std::string to_string(PlatformMode m);

struct ControllerConfig {
  int horizon_steps = 20;
  double step_dt = 0.1;
  double v_max = 1.0;      // m/s translation bound
  double w_max = 1.0;      // rad/s per-actuator and whole-system bound
  double w_pos = 1.0;
  double w_head = 0.5;
  double w_effort = 0.05;
  int max_iterations = 60;
  double improve_tol = 1e-9;
  double lookahead = 0.6;      // m, Y0 pure pursuit
  double pursuit_gain = 2.0;   // Y0 heading gain
};

/// Active constraint set for a mode.
struct ModeConstraints {
  bool dtheta_locked = false;   // OC
  bool dgamma_locked = false;   // A
  bool body_vy_zero = false;    // Y0
  double v_max = 1.0;
  double w_max = 1.0;
};

ModeConstraints constraints_of(PlatformMode mode, const ControllerConfig& cfg);

/// Exact Euclidean projection of a command onto the mode's feasible set:
/// translation ball, per-rate boxes, coupled |dtheta + dgamma| <= w_max, and
/// the mode locks. theta_est is the base heading used for the Y0 body frame.
ExtendedVelocity apply_mode_constraints(PlatformMode mode,
                                        const ExtendedVelocity& u,
                                        const ControllerConfig& cfg,
                                        double theta_est);

/// Largest violation of the mode's constraint set by u (0 when feasible).
double constraint_violation(PlatformMode mode, const ExtendedVelocity& u,
                            const ControllerConfig& cfg, double theta_est);

/// Nearest point of (a, b) in the hexagon |a|<=w, |b|<=w, |a+b|<=w.
std::pair<double, double> project_rate_pair(double a, double b, double w);

struct SolveResult {
  ExtendedVelocity command;
  bool fault = false;
  double cost = 0.0;
  std::vector<double> cost_trace;  // accepted iterate costs, non-increasing
};

/// Receding-horizon tracking controller. Minimizes position error to carrot
/// points along the path, camera-heading error to the waypoint heading, and
/// control effort, over horizon_steps of step_dt, subject to the mode's
/// constraints. Projected gradient with backtracking: cost never increases
/// across accepted iterates and returned commands violate no constraint.
class RecedingHorizonController {
 public:
  RecedingHorizonController(PlatformMode mode, const ControllerConfig& cfg)
      : mode_(mode), cfg_(cfg) {}

  SolveResult solve(const est::MergedState& state, double theta_est,
                    const plan::PlanResult& plan);

  void reset() { warm_.clear(); }
  PlatformMode mode() const { return mode_; }
  const ControllerConfig& config() const { return cfg_; }

 private:
  PlatformMode mode_;
  ControllerConfig cfg_;
  std::vector<ExtendedVelocity> warm_;
};

/// Y0 pure-pursuit heading rate toward the path lookahead point, clamped to
/// [-w_max, w_max].
double pure_pursuit_rate(double x, double y, double theta,
                         const std::vector<std::pair<double, double>>& path,
                         double lookahead, double gain, double w_max);

}  // namespace panslam::ctrl
