#pragma once

#include <string>
#include <vector>

#include "panslam/ekf.hpp"
#include "panslam/grids.hpp"
#include "panslam/metrics.hpp"
#include "panslam/pose_graph.hpp"

namespace panslam::io {

/// Fixed-precision float formatting shared by every writer so identical runs
/// produce byte-identical files.
std::string fmt(double v);

/// Per-trial CSV on the 2 s bucket cadence:
/// time,entropy_norm,path_len,wheel_rot,loops,ate,bac
void write_trial_csv(const std::string& path, const metrics::TrialRecord& rec,
                     double window);

/// Batch summary, one row per method cell.
void write_summary_csv(const std::string& path,
                       const std::vector<metrics::SummaryRow>& rows);

/// Estimate trace: time, mean entries, covariance diagonal.
struct EstimateTraceRow {
  double time = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd cov_diag;
};
void write_estimate_trace(const std::string& path,
                          const std::vector<EstimateTraceRow>& rows);

/// PGM map snapshot: 255 free, 0 occupied, 128 unknown. Row 0 is the top of
/// the map (max y), matching the environment file orientation.
void write_class_pgm(const std::string& path, const ClassGrid& grid);

/// g2o-style plain text: VERTEX_SE2 and EDGE_SE2 records (upper-triangular
/// information).
void write_g2o(const std::string& path, const graph::PoseGraph& g);

std::string read_file(const std::string& path);

}  // namespace panslam::io
