#include "panslam/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace panslam::ctrl {

PlatformMode mode_from_string(const std::string& s) {
  if (s == "A") return PlatformMode::kA;
  if (s == "HH") return PlatformMode::kHH;
  if (s == "OC") return PlatformMode::kOC;
  if (s == "Y0") return PlatformMode::kY0;
  throw std::invalid_argument("unknown platform mode '" + s + "'");
}

std::string to_string(PlatformMode m) {
  switch (m) {
    case PlatformMode::kA: return "A";
    case PlatformMode::kHH: return "HH";
    case PlatformMode::kOC: return "OC";
    case PlatformMode::kY0: return "Y0";
  }
  return "?";
}

ModeConstraints constraints_of(PlatformMode mode, const ControllerConfig& cfg) {
  ModeConstraints c;
  c.v_max = cfg.v_max;
  c.w_max = cfg.w_max;
  switch (mode) {
    case PlatformMode::kA: c.dgamma_locked = true; break;
    case PlatformMode::kHH: break;
    case PlatformMode::kOC: c.dtheta_locked = true; break;
    case PlatformMode::kY0: c.body_vy_zero = true; break;
  }
  return c;
}

std::pair<double, double> project_rate_pair(double a, double b, double w) {
  const double tol = 1e-15;
  if (std::abs(a) <= w + tol && std::abs(b) <= w + tol &&
      std::abs(a + b) <= w + tol)
    return {std::clamp(a, -w, w), std::clamp(b, -w, w)};

  // Hexagon vertices in order.
  const double vx[6] = {w, 0, -w, -w, 0, w};
  const double vy[6] = {0, w, w, 0, -w, -w};
  double best_a = w, best_b = 0, best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) {
    const int j = (i + 1) % 6;
    const double ex = vx[j] - vx[i], ey = vy[j] - vy[i];
    const double len2 = ex * ex + ey * ey;
    double t = ((a - vx[i]) * ex + (b - vy[i]) * ey) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const double px = vx[i] + t * ex, py = vy[i] + t * ey;
    const double d = (a - px) * (a - px) + (b - py) * (b - py);
    if (d < best_d) {
      best_d = d;
      best_a = px;
      best_b = py;
    }
  }
  return {best_a, best_b};
}

namespace {

void project_translation(double& vx, double& vy, double v_max) {
  const double n = hypot2(vx, vy);
  if (n > v_max) {
    const double s = v_max / n;
    vx *= s;
    vy *= s;
  }
}

}  // namespace

ExtendedVelocity apply_mode_constraints(PlatformMode mode,
                                        const ExtendedVelocity& u,
                                        const ControllerConfig& cfg,
                                        double theta_est) {
  ExtendedVelocity out = u;
  switch (mode) {
    case PlatformMode::kA: {
      out.dgamma = 0.0;
      out.dtheta = std::clamp(out.dtheta, -cfg.w_max, cfg.w_max);
      project_translation(out.vx, out.vy, cfg.v_max);
      break;
    }
    case PlatformMode::kHH: {
      auto [a, b] = project_rate_pair(out.dtheta, out.dgamma, cfg.w_max);
      out.dtheta = a;
      out.dgamma = b;
      project_translation(out.vx, out.vy, cfg.v_max);
      break;
    }
    case PlatformMode::kOC: {
      out.dtheta = 0.0;
      out.dgamma = std::clamp(out.dgamma, -cfg.w_max, cfg.w_max);
      project_translation(out.vx, out.vy, cfg.v_max);
      break;
    }
    case PlatformMode::kY0: {
      // Forward speed along the estimated base heading only.
      const double c = std::cos(theta_est), s = std::sin(theta_est);
      double v = c * out.vx + s * out.vy;  // body-frame forward component
      v = std::clamp(v, -cfg.v_max, cfg.v_max);
      out.vx = v * c;
      out.vy = v * s;
      out.dtheta = std::clamp(out.dtheta, -cfg.w_max, cfg.w_max);
      out.dgamma = std::clamp(out.dgamma, std::max(-cfg.w_max, -cfg.w_max - out.dtheta),
                              std::min(cfg.w_max, cfg.w_max - out.dtheta));
      break;
    }
  }
  return out;
}

double constraint_violation(PlatformMode mode, const ExtendedVelocity& u,
                            const ControllerConfig& cfg, double theta_est) {
  double v = 0.0;
  v = std::max(v, hypot2(u.vx, u.vy) - cfg.v_max);
  v = std::max(v, std::abs(u.dtheta) - cfg.w_max);
  v = std::max(v, std::abs(u.dgamma) - cfg.w_max);
  v = std::max(v, std::abs(u.dtheta + u.dgamma) - cfg.w_max);
  switch (mode) {
    case PlatformMode::kA: v = std::max(v, std::abs(u.dgamma)); break;
    case PlatformMode::kHH: break;
    case PlatformMode::kOC: v = std::max(v, std::abs(u.dtheta)); break;
    case PlatformMode::kY0: {
      const double c = std::cos(theta_est), s = std::sin(theta_est);
      v = std::max(v, std::abs(-s * u.vx + c * u.vy));
      break;
    }
  }
  return std::max(v, 0.0);
}

double pure_pursuit_rate(double x, double y, double theta,
                         const std::vector<std::pair<double, double>>& path,
                         double lookahead, double gain, double w_max) {
  if (path.empty()) return 0.0;
  // Nearest path point, then first point at least `lookahead` away from us.
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double d = hypot2(path[i].first - x, path[i].second - y);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  std::size_t target = path.size() - 1;
  for (std::size_t i = nearest; i < path.size(); ++i) {
    if (hypot2(path[i].first - x, path[i].second - y) >= lookahead) {
      target = i;
      break;
    }
  }
  const double dx = path[target].first - x, dy = path[target].second - y;
  if (hypot2(dx, dy) < 1e-9) return 0.0;
  const double desired = std::atan2(dy, dx);
  return std::clamp(gain * wrap_pi(desired - theta), -w_max, w_max);
}

namespace {

struct Carrots {
  std::vector<double> rx, ry, rpsi;
};

Carrots make_carrots(const plan::PlanResult& plan, double x0, double y0,
                     int n, double advance) {
  Carrots c;
  c.rx.resize(static_cast<std::size_t>(n));
  c.ry.resize(static_cast<std::size_t>(n));
  c.rpsi.resize(static_cast<std::size_t>(n));

  const auto& path = plan.path;
  if (path.size() < 2) {
    for (int k = 0; k < n; ++k) {
      c.rx[static_cast<std::size_t>(k)] = plan.waypoint.x;
      c.ry[static_cast<std::size_t>(k)] = plan.waypoint.y;
      c.rpsi[static_cast<std::size_t>(k)] = plan.waypoint.psi;
    }
    return c;
  }
  std::vector<double> s(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i)
    s[i] = s[i - 1] + hypot2(path[i].first - path[i - 1].first,
                             path[i].second - path[i - 1].second);
  // Arclength of the nearest path point to the current position.
  double s0 = 0.0, best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double d = hypot2(path[i].first - x0, path[i].second - y0);
    if (d < best) {
      best = d;
      s0 = s[i];
    }
  }
  auto point_at = [&](double arc) -> std::pair<std::pair<double, double>, double> {
    if (arc >= s.back())
      return {path.back(),
              plan.gaze.empty() ? plan.waypoint.psi : plan.waypoint.psi};
    std::size_t i = 1;
    while (i < s.size() && s[i] < arc) ++i;
    const double seg = s[i] - s[i - 1];
    const double w = seg > 1e-12 ? (arc - s[i - 1]) / seg : 0.0;
    const double gaze = plan.gaze.empty() ? plan.waypoint.psi : plan.gaze[i - 1];
    return {{path[i - 1].first + w * (path[i].first - path[i - 1].first),
             path[i - 1].second + w * (path[i].second - path[i - 1].second)},
            gaze};
  };
  for (int k = 0; k < n; ++k) {
    const auto [p, gaze] = point_at(s0 + advance * (k + 1));
    c.rx[static_cast<std::size_t>(k)] = p.first;
    c.ry[static_cast<std::size_t>(k)] = p.second;
    c.rpsi[static_cast<std::size_t>(k)] = gaze;
  }
  return c;
}

}  // namespace

SolveResult RecedingHorizonController::solve(const est::MergedState& state,
                                             double theta_est,
                                             const plan::PlanResult& plan) {
  SolveResult res;
  const int n = cfg_.horizon_steps;
  const double dt = cfg_.step_dt;

  const Carrots ref =
      make_carrots(plan, state.x, state.y, n, cfg_.v_max * dt);

  auto project_all = [&](std::vector<ExtendedVelocity>& u) {
    for (auto& uk : u) uk = apply_mode_constraints(mode_, uk, cfg_, theta_est);
  };

  // Cost of a control sequence via forward rollout.
  auto rollout_cost = [&](const std::vector<ExtendedVelocity>& u,
                          std::vector<double>* ex = nullptr,
                          std::vector<double>* ey = nullptr,
                          std::vector<double>* epsi = nullptr,
                          std::vector<double>* theta_seq = nullptr) {
    double x = state.x, y = state.y, th = theta_est, psi = state.psi;
    double cost = 0.0;
    for (int k = 0; k < n; ++k) {
      const auto& uk = u[static_cast<std::size_t>(k)];
      double dth = uk.dtheta;
      double vx = uk.vx, vy = uk.vy;
      if (mode_ == PlatformMode::kY0) {
        dth = pure_pursuit_rate(x, y, th, plan.path, cfg_.lookahead,
                                cfg_.pursuit_gain, cfg_.w_max);
        const double c = std::cos(th), s = std::sin(th);
        const double v = c * uk.vx + s * uk.vy;
        vx = v * c;
        vy = v * s;
      }
      if (theta_seq) (*theta_seq)[static_cast<std::size_t>(k)] = th;
      x += vx * dt;
      y += vy * dt;
      th = wrap_pi(th + dth * dt);
      psi = wrap_pi(psi + (dth + uk.dgamma) * dt);
      const double exk = x - ref.rx[static_cast<std::size_t>(k)];
      const double eyk = y - ref.ry[static_cast<std::size_t>(k)];
      const double epk = wrap_pi(psi - ref.rpsi[static_cast<std::size_t>(k)]);
      if (ex) (*ex)[static_cast<std::size_t>(k)] = exk;
      if (ey) (*ey)[static_cast<std::size_t>(k)] = eyk;
      if (epsi) (*epsi)[static_cast<std::size_t>(k)] = epk;
      cost += cfg_.w_pos * (exk * exk + eyk * eyk) + cfg_.w_head * epk * epk +
              cfg_.w_effort * (uk.vx * uk.vx + uk.vy * uk.vy +
                               uk.dtheta * uk.dtheta + uk.dgamma * uk.dgamma);
    }
    return cost;
  };

  // Warm start: previous solution shifted one step, else zeros.
  std::vector<ExtendedVelocity> u(static_cast<std::size_t>(n));
  if (static_cast<int>(warm_.size()) == n) {
    for (int k = 0; k < n - 1; ++k) u[static_cast<std::size_t>(k)] = warm_[static_cast<std::size_t>(k + 1)];
    u[static_cast<std::size_t>(n - 1)] = warm_[static_cast<std::size_t>(n - 1)];
  }
  project_all(u);

  std::vector<double> ex(static_cast<std::size_t>(n)), ey(static_cast<std::size_t>(n)),
      epsi(static_cast<std::size_t>(n)), th_seq(static_cast<std::size_t>(n));
  double cost = rollout_cost(u, &ex, &ey, &epsi, &th_seq);
  res.cost_trace.push_back(cost);

  double step = 0.25;
  for (int iter = 0; iter < cfg_.max_iterations; ++iter) {
    // Suffix sums of the tracking errors give the gradient of the linear
    // rollout; Y0's heading coupling is dropped (descent checked by the
    // line search on the exact cost).
    std::vector<ExtendedVelocity> g(static_cast<std::size_t>(n));
    double sx = 0.0, sy = 0.0, sp = 0.0;
    for (int k = n - 1; k >= 0; --k) {
      sx += ex[static_cast<std::size_t>(k)];
      sy += ey[static_cast<std::size_t>(k)];
      sp += epsi[static_cast<std::size_t>(k)];
      const auto& uk = u[static_cast<std::size_t>(k)];
      auto& gk = g[static_cast<std::size_t>(k)];
      gk.vx = 2.0 * cfg_.w_effort * uk.vx + 2.0 * cfg_.w_pos * dt * sx;
      gk.vy = 2.0 * cfg_.w_effort * uk.vy + 2.0 * cfg_.w_pos * dt * sy;
      gk.dtheta = 2.0 * cfg_.w_effort * uk.dtheta + 2.0 * cfg_.w_head * dt * sp;
      gk.dgamma = 2.0 * cfg_.w_effort * uk.dgamma + 2.0 * cfg_.w_head * dt * sp;
      if (mode_ == PlatformMode::kY0) {
        const double c = std::cos(th_seq[static_cast<std::size_t>(k)]);
        const double s = std::sin(th_seq[static_cast<std::size_t>(k)]);
        const double gv = 2.0 * cfg_.w_effort * (c * uk.vx + s * uk.vy) +
                          2.0 * cfg_.w_pos * dt * (c * sx + s * sy);
        gk.vx = gv * c;
        gk.vy = gv * s;
        gk.dtheta = 0.0;  // not a decision variable under pure pursuit
      }
    }

    bool improved = false;
    for (int ls = 0; ls < 24; ++ls) {
      std::vector<ExtendedVelocity> trial = u;
      for (int k = 0; k < n; ++k) {
        auto& tk = trial[static_cast<std::size_t>(k)];
        const auto& gk = g[static_cast<std::size_t>(k)];
        tk.vx -= step * gk.vx;
        tk.vy -= step * gk.vy;
        tk.dtheta -= step * gk.dtheta;
        tk.dgamma -= step * gk.dgamma;
      }
      project_all(trial);
      const double tc = rollout_cost(trial, &ex, &ey, &epsi, &th_seq);
      if (tc < cost - cfg_.improve_tol) {
        u = std::move(trial);
        cost = tc;
        improved = true;
        if (ls == 0) step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      // Errors were clobbered by the failed trials; restore for exit.
      cost = rollout_cost(u, &ex, &ey, &epsi, &th_seq);
      break;
    }
    res.cost_trace.push_back(cost);
  }

  warm_ = u;
  res.cost = cost;

  ExtendedVelocity cmd = u.front();
  if (mode_ == PlatformMode::kY0) {
    cmd.dtheta = pure_pursuit_rate(state.x, state.y, theta_est, plan.path,
                                   cfg_.lookahead, cfg_.pursuit_gain, cfg_.w_max);
  }
  cmd = apply_mode_constraints(mode_, cmd, cfg_, theta_est);
  if (!cmd.finite()) {
    res.fault = true;
    cmd = {};
  }
  res.command = cmd;
  return res;
}

}  // namespace panslam::ctrl
