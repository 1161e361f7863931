#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panslam/grids.hpp"

namespace panslam::metrics {

struct TimedPose {
  double time = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct TimedSample {
  double time = 0.0;
  double value = 0.0;
};

/// Macro-averaged per-class recall over {free, occupied, unknown}, classes
/// absent from the ground truth excluded. Throws on misaligned grids.
double balanced_accuracy(const ClassGrid& estimate, const ClassGrid& truth);

/// RMSE of planar position error over nearest-time-associated pose pairs
/// (within max_dt). Both trajectories share the map frame; no alignment
/// transform is applied. Throws when fewer than 2 pairs associate.
double ate_rmse(const std::vector<TimedPose>& estimate,
                const std::vector<TimedPose>& truth, double max_dt = 0.05);

/// Plain ratios, missing when the path is shorter than 0.01 m.
std::optional<double> loops_per_meter(std::size_t n_loops, double path_len);
std::optional<double> wheel_rotation_per_meter(double rotation_rad,
                                               double path_len);

/// Last-sample-per-window bucketing with forward fill; leading empty windows
/// take the first sample's value. Samples must be sorted by time. The window
/// count is ceil(t_last / window) (minimum 1); the final window is closed on
/// the right so the last sample always lands inside.
std::vector<double> bucket_series(const std::vector<TimedSample>& samples,
                                  double window = 2.0);

/// Complete per-trial measurement log.
struct TrialRecord {
  std::string mode;
  bool merged = true;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure_reason;
  bool exploration_complete = false;
  double duration = 0.0;

  std::vector<TimedPose> est_trajectory;
  std::vector<TimedPose> true_trajectory;
  std::vector<TimedSample> entropy_norm;  // sampled on the bucket cadence
  std::vector<TimedSample> path_length;
  std::vector<TimedSample> wheel_rotation;
  std::vector<TimedSample> loop_count;
  std::vector<TimedSample> bac;
  std::vector<double> merged_var_violation;  // |var(psi)-var(theta)-var(gamma)|
  std::vector<double> theta_true_trace;      // per control step
  std::vector<double> body_vy_trace;         // executed body-frame vy
  std::vector<double> dpsi_cmd_trace;        // commanded dtheta+dgamma

  double total_path_length = 0.0;
  double total_wheel_rotation = 0.0;
  std::size_t n_loop_closures = 0;
  std::size_t n_graph_nodes = 0;
  double final_bac = 0.0;
  double final_ate = 0.0;
  double final_entropy_norm = 0.0;
};

/// Mean and (sample) standard deviation of per-trial metric values across the
/// successful trials of one batch cell.
struct SummaryRow {
  std::string method;  // e.g. "HH" or "HH_NC"
  std::size_t n_success = 0;
  std::size_t n_requested = 0;
  double bac_mean = 0.0, bac_std = 0.0;
  double wheel_per_m_mean = 0.0, wheel_per_m_std = 0.0;
  double ate_mean = 0.0, ate_std = 0.0;
  double loops_per_m_mean = 0.0, loops_per_m_std = 0.0;
  double path_mean = 0.0, path_std = 0.0;
  double entropy_mean = 0.0, entropy_std = 0.0;
};

SummaryRow summarize(const std::string& method,
                     const std::vector<TrialRecord>& trials,
                     std::size_t n_requested);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& xs);

}  // namespace panslam::metrics
