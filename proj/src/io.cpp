#include "panslam/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace panslam::io {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("io: cannot write '" + path + "'");
  return out;
}

std::vector<double> bucket_or_empty(const std::vector<metrics::TimedSample>& s,
                                    double window, std::size_t n) {
  auto b = metrics::bucket_series(s, window);
  b.resize(n, b.empty() ? 0.0 : b.back());
  return b;
}

}  // namespace

void write_trial_csv(const std::string& path, const metrics::TrialRecord& rec,
                     double window) {
  auto out = open_out(path);
  out << "time,entropy_norm,path_len,wheel_rot,loops,ate,bac\n";
  std::size_t n = 0;
  for (const auto* s : {&rec.entropy_norm, &rec.path_length, &rec.wheel_rotation,
                        &rec.loop_count, &rec.bac}) {
    n = std::max(n, metrics::bucket_series(*s, window).size());
  }
  if (n == 0) return;
  const auto ent = bucket_or_empty(rec.entropy_norm, window, n);
  const auto len = bucket_or_empty(rec.path_length, window, n);
  const auto rot = bucket_or_empty(rec.wheel_rotation, window, n);
  const auto loops = bucket_or_empty(rec.loop_count, window, n);
  const auto bac = bucket_or_empty(rec.bac, window, n);

  // Running ATE per bucket from the pose pairs seen so far.
  std::vector<metrics::TimedPose> est, truth;
  std::size_t ei = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t_end = (static_cast<double>(k) + 1.0) * window;
    while (ei < rec.est_trajectory.size() &&
           rec.est_trajectory[ei].time <= t_end) {
      est.push_back(rec.est_trajectory[ei]);
      truth.push_back(rec.true_trajectory[ei]);
      ++ei;
    }
    double ate = 0.0;
    if (est.size() >= 2) ate = metrics::ate_rmse(est, truth);
    out << fmt(static_cast<double>(k) * window) << ',' << fmt(ent[k]) << ','
        << fmt(len[k]) << ',' << fmt(rot[k]) << ',' << fmt(loops[k]) << ','
        << fmt(ate) << ',' << fmt(bac[k]) << '\n';
  }
}

void write_summary_csv(const std::string& path,
                       const std::vector<metrics::SummaryRow>& rows) {
  auto out = open_out(path);
  out << "method,n_success,n_requested,bac_mean,bac_std,"
         "wheel_rot_per_m_mean,wheel_rot_per_m_std,ate_mean,ate_std,"
         "loops_per_m_mean,loops_per_m_std,path_len_mean,path_len_std,"
         "entropy_norm_mean,entropy_norm_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.n_success << ',' << r.n_requested << ','
        << fmt(r.bac_mean) << ',' << fmt(r.bac_std) << ','
        << fmt(r.wheel_per_m_mean) << ',' << fmt(r.wheel_per_m_std) << ','
        << fmt(r.ate_mean) << ',' << fmt(r.ate_std) << ','
        << fmt(r.loops_per_m_mean) << ',' << fmt(r.loops_per_m_std) << ','
        << fmt(r.path_mean) << ',' << fmt(r.path_std) << ','
        << fmt(r.entropy_mean) << ',' << fmt(r.entropy_std) << '\n';
  }
}

void write_estimate_trace(const std::string& path,
                          const std::vector<EstimateTraceRow>& rows) {
  auto out = open_out(path);
  out << "time";
  if (!rows.empty()) {
    for (int i = 0; i < rows.front().mean.size(); ++i) out << ",mean" << i;
    for (int i = 0; i < rows.front().cov_diag.size(); ++i) out << ",var" << i;
  }
  out << '\n';
  for (const auto& r : rows) {
    out << fmt(r.time);
    for (int i = 0; i < r.mean.size(); ++i) out << ',' << fmt(r.mean(i));
    for (int i = 0; i < r.cov_diag.size(); ++i) out << ',' << fmt(r.cov_diag(i));
    out << '\n';
  }
}

void write_class_pgm(const std::string& path, const ClassGrid& grid) {
  auto out = open_out(path, true);
  out << "P5\n" << grid.spec.width << ' ' << grid.spec.height << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(grid.spec.width));
  for (int iy = grid.spec.height - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.spec.width; ++ix) {
      switch (grid.at(ix, iy)) {
        case gridkern::CellClass::kFree: row[static_cast<std::size_t>(ix)] = static_cast<char>(255); break;
        case gridkern::CellClass::kOccupied: row[static_cast<std::size_t>(ix)] = 0; break;
        default: row[static_cast<std::size_t>(ix)] = static_cast<char>(128); break;
      }
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

void write_g2o(const std::string& path, const graph::PoseGraph& g) {
  auto out = open_out(path);
  for (const auto& n : g.nodes) {
    out << "VERTEX_SE2 " << n.id << ' ' << fmt(n.pose.x) << ' '
        << fmt(n.pose.y) << ' ' << fmt(n.pose.theta) << '\n';
  }
  for (const auto& e : g.edges) {
    out << "EDGE_SE2 " << e.from << ' ' << e.to << ' ' << fmt(e.rel.x) << ' '
        << fmt(e.rel.y) << ' ' << fmt(e.rel.theta);
    // upper triangular info: xx xy xt yy yt tt
    out << ' ' << fmt(e.info(0, 0)) << ' ' << fmt(e.info(0, 1)) << ' '
        << fmt(e.info(0, 2)) << ' ' << fmt(e.info(1, 1)) << ' '
        << fmt(e.info(1, 2)) << ' ' << fmt(e.info(2, 2)) << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace panslam::io
