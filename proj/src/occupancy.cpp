#include "panslam/occupancy.hpp"

#include <cmath>
#include <stdexcept>

#include "panslam/raycast.hpp"

namespace panslam::map {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

double binary_entropy_bits(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace

OccupancyGrid::OccupancyGrid(const GridSpec& spec, const OccupancyParams& params)
    : spec_(spec),
      params_(params),
      lo_free_thresh_(logit(params.p_free)),
      lo_occ_thresh_(logit(params.p_occupied)),
      log_odds_(spec.size(), 0.0),
      observed_(spec.size(), 0),
      stamp_(spec.size(), 0) {
  if (spec.width <= 0 || spec.height <= 0)
    throw std::invalid_argument("occupancy: empty grid");
  if (!(params.l_occ > 0.0) || !(params.l_free < 0.0) || !(params.l_max > 0.0))
    throw std::invalid_argument("occupancy: bad log-odds parameters");
}

void OccupancyGrid::update(const std::vector<world::CameraHit>& hits) {
  // Pass 1: stamp cells, occupied wins within the frame.
  ++epoch_;
  const std::uint32_t occ_mark = epoch_ * 2, free_mark = epoch_ * 2 - 1;
  for (const auto& h : hits) {
    if (!spec_.contains(h.ix, h.iy)) continue;
    auto& st = stamp_[spec_.index(h.ix, h.iy)];
    if (h.occupied)
      st = occ_mark;
    else if (st != occ_mark)
      st = free_mark;
  }
  // Pass 2: one log-odds increment per touched cell.
  for (const auto& h : hits) {
    if (!spec_.contains(h.ix, h.iy)) continue;
    const std::size_t i = spec_.index(h.ix, h.iy);
    auto& st = stamp_[i];
    if (st != occ_mark && st != free_mark) continue;  // already applied
    const double delta = (st == occ_mark) ? params_.l_occ : params_.l_free;
    st = 0;
    log_odds_[i] = std::clamp(log_odds_[i] + delta, -params_.l_max, params_.l_max);
    observed_[i] = 1;
  }
}

double OccupancyGrid::probability(int ix, int iy) const {
  const std::size_t i = spec_.index(ix, iy);
  if (!observed_[i]) return 0.5;
  return 1.0 / (1.0 + std::exp(-log_odds_[i]));
}

void OccupancyGrid::set_cell(int ix, int iy, double log_odds, bool observed) {
  const std::size_t i = spec_.index(ix, iy);
  log_odds_[i] = log_odds;
  observed_[i] = observed ? 1 : 0;
}

gridkern::ClassCounts OccupancyGrid::classify(std::uint8_t* out_classes) const {
  return gridkern::classify(log_odds_.data(), observed_.data(), spec_.size(),
                            lo_free_thresh_, lo_occ_thresh_, out_classes);
}

ClassGrid OccupancyGrid::class_grid() const {
  ClassGrid g;
  g.spec = spec_;
  g.cls.resize(spec_.size());
  classify(g.cls.data());
  return g;
}

OccupancyGrid::Entropy OccupancyGrid::entropy() const {
  Entropy e;
  for (std::size_t i = 0; i < log_odds_.size(); ++i) {
    if (!observed_[i]) continue;
    ++e.observed_cells;
    const double p = 1.0 / (1.0 + std::exp(-log_odds_[i]));
    e.bits += binary_entropy_bits(p);
  }
  e.normalized = e.observed_cells ? e.bits / static_cast<double>(e.observed_cells)
                                  : 0.0;
  return e;
}

std::size_t OccupancyGrid::observed_count() const {
  std::size_t n = 0;
  for (auto o : observed_) n += o;
  return n;
}

std::vector<world::CameraHit> project_camera_rays(
    const GridSpec& map_spec, double x, double y, double psi,
    const std::vector<world::CamRay>& rays, double max_depth) {
  std::vector<world::CameraHit> hits;
  std::vector<world::CameraHit> ray_cells;
  for (const auto& ray : rays) {
    const double range = std::min(ray.range, max_depth);
    const double a = psi + ray.rel_angle;
    const double dx = std::cos(a), dy = std::sin(a);
    ray_cells.clear();
    walk_ray(map_spec, x, y, dx, dy, range, [&](int ix, int iy, double) {
      ray_cells.push_back({ix, iy, false});
      return RayStep::kContinue;
    });
    if (ray_cells.empty()) continue;
    // The last cell entered within the measured range holds the endpoint;
    // everything before it was traversed.
    if (ray.hit) ray_cells.back().occupied = true;
    hits.insert(hits.end(), ray_cells.begin(), ray_cells.end());
  }
  return hits;
}

}  // namespace panslam::map
