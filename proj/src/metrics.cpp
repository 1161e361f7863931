#include "panslam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace panslam::metrics {

double balanced_accuracy(const ClassGrid& estimate, const ClassGrid& truth) {
  if (!estimate.spec.same_layout(truth.spec))
    throw std::invalid_argument("balanced_accuracy: grids not aligned");
  const auto conf =
      gridkern::confusion(truth.cls.data(), estimate.cls.data(), truth.cls.size());
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < 3; ++c) {
    const std::size_t row = conf.m[c][0] + conf.m[c][1] + conf.m[c][2];
    if (row == 0) continue;
    sum += static_cast<double>(conf.m[c][c]) / static_cast<double>(row);
    ++present;
  }
  return present ? sum / present : 0.0;
}

double ate_rmse(const std::vector<TimedPose>& estimate,
                const std::vector<TimedPose>& truth, double max_dt) {
  if (truth.empty() || estimate.empty())
    throw std::invalid_argument("ate_rmse: empty trajectory");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : estimate) {
    // nearest truth sample by time (truth sorted)
    auto it = std::lower_bound(
        truth.begin(), truth.end(), e.time,
        [](const TimedPose& p, double t) { return p.time < t; });
    const TimedPose* best = nullptr;
    if (it != truth.end()) best = &*it;
    if (it != truth.begin()) {
      const TimedPose& prev = *(it - 1);
      if (!best || std::abs(prev.time - e.time) < std::abs(best->time - e.time))
        best = &prev;
    }
    if (!best || std::abs(best->time - e.time) > max_dt) continue;
    const double dx = e.x - best->x, dy = e.y - best->y;
    sum += dx * dx + dy * dy;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("ate_rmse: fewer than 2 associated pairs");
  return std::sqrt(sum / static_cast<double>(n));
}

std::optional<double> loops_per_meter(std::size_t n_loops, double path_len) {
  if (path_len <= 0.01) return std::nullopt;
  return static_cast<double>(n_loops) / path_len;
}

std::optional<double> wheel_rotation_per_meter(double rotation_rad,
                                               double path_len) {
  if (path_len <= 0.01) return std::nullopt;
  return rotation_rad / path_len;
}

std::vector<double> bucket_series(const std::vector<TimedSample>& samples,
                                  double window) {
  if (samples.empty()) return {};
  if (!(window > 0.0))
    throw std::invalid_argument("bucket_series: window must be > 0");
  const double t_last = samples.back().time;
  const std::size_t n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(t_last / window)));
  std::vector<double> out(n);
  std::vector<std::uint8_t> filled(n, 0);
  for (const auto& s : samples) {
    std::size_t idx = static_cast<std::size_t>(std::floor(s.time / window));
    if (idx >= n) idx = n - 1;  // right-closed final window
    out[idx] = s.value;
    filled[idx] = 1;
  }
  // Forward fill; leading gaps take the first sample's value.
  double last = samples.front().value;
  for (std::size_t i = 0; i < n; ++i) {
    if (filled[i])
      last = out[i];
    else
      out[i] = last;
  }
  return out;
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return r;
}

SummaryRow summarize(const std::string& method,
                     const std::vector<TrialRecord>& trials,
                     std::size_t n_requested) {
  SummaryRow row;
  row.method = method;
  row.n_requested = n_requested;
  std::vector<double> bac, wheel, ate, loops, path, entropy;
  for (const auto& t : trials) {
    if (t.failed) continue;
    ++row.n_success;
    bac.push_back(t.final_bac);
    ate.push_back(t.final_ate);
    path.push_back(t.total_path_length);
    entropy.push_back(t.final_entropy_norm);
    if (auto w = wheel_rotation_per_meter(t.total_wheel_rotation,
                                          t.total_path_length))
      wheel.push_back(*w);
    if (auto l = loops_per_meter(t.n_loop_closures, t.total_path_length))
      loops.push_back(*l);
  }
  const auto b = mean_std(bac);
  row.bac_mean = b.mean;
  row.bac_std = b.std;
  const auto w = mean_std(wheel);
  row.wheel_per_m_mean = w.mean;
  row.wheel_per_m_std = w.std;
  const auto a = mean_std(ate);
  row.ate_mean = a.mean;
  row.ate_std = a.std;
  const auto l = mean_std(loops);
  row.loops_per_m_mean = l.mean;
  row.loops_per_m_std = l.std;
  const auto p = mean_std(path);
  row.path_mean = p.mean;
  row.path_std = p.std;
  const auto e = mean_std(entropy);
  row.entropy_mean = e.mean;
  row.entropy_std = e.std;
  return row;
}

}  // namespace panslam::metrics
