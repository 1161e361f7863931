#include "panslam/environment.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

namespace panslam::world {

namespace {

Environment from_rows(const std::vector<std::string>& rows, double resolution,
                      double ox, double oy) {
  if (rows.empty())
    throw EnvLoadError(EnvError::kMalformed, "environment: empty grid");
  const std::size_t w = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != w)
      throw EnvLoadError(EnvError::kMalformed,
                         "environment: ragged rows in grid file");
  if (w < 3 || rows.size() < 3)
    throw EnvLoadError(EnvError::kMalformed, "environment: grid too small");

  Environment env;
  env.spec = {ox, oy, resolution, static_cast<int>(w),
              static_cast<int>(rows.size())};
  env.occ.assign(env.spec.size(), 0);
  // First file row is the top of the map (max y).
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int iy = static_cast<int>(rows.size() - 1 - k);
    for (std::size_t ix = 0; ix < w; ++ix) {
      const char c = rows[k][ix];
      if (c == '#')
        env.occ[env.spec.index(static_cast<int>(ix), iy)] = 1;
      else if (c != '.')
        throw EnvLoadError(EnvError::kMalformed,
                           std::string("environment: unexpected character '") +
                               c + "'");
    }
  }
  return env;
}

Environment parse_ascii(std::istream& in, double resolution, double ox,
                        double oy) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  return from_rows(rows, resolution, ox, oy);
}

Environment parse_pgm(std::istream& in, double resolution, double ox,
                      double oy) {
  auto next_token = [&in]() -> std::string {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw EnvLoadError(EnvError::kMalformed, "environment: truncated PGM header");
  };
  const std::string magic = next_token();
  if (magic != "P5")
    throw EnvLoadError(EnvError::kMalformed, "environment: not a P5 PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw EnvLoadError(EnvError::kMalformed, "environment: bad PGM header");
  }
  if (w < 3 || h < 3 || maxval <= 0 || maxval > 255)
    throw EnvLoadError(EnvError::kMalformed, "environment: bad PGM dimensions");
  in.get();  // single whitespace after maxval
  std::vector<char> data(static_cast<std::size_t>(w) * h);
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw EnvLoadError(EnvError::kMalformed, "environment: truncated PGM data");

  Environment env;
  env.spec = {ox, oy, resolution, w, h};
  env.occ.assign(env.spec.size(), 0);
  for (int row = 0; row < h; ++row) {
    const int iy = h - 1 - row;  // PGM scans top to bottom
    for (int ix = 0; ix < w; ++ix) {
      const auto v = static_cast<unsigned char>(data[static_cast<std::size_t>(row) * w + ix]);
      if (v <= 127) env.occ[env.spec.index(ix, iy)] = 1;
    }
  }
  return env;
}

void validate(const Environment& env) {
  const auto& s = env.spec;
  for (int ix = 0; ix < s.width; ++ix)
    if (!env.occupied_cell(ix, 0) || !env.occupied_cell(ix, s.height - 1))
      throw EnvLoadError(EnvError::kUnbounded,
                         "environment: boundary row has free cells");
  for (int iy = 0; iy < s.height; ++iy)
    if (!env.occupied_cell(0, iy) || !env.occupied_cell(s.width - 1, iy))
      throw EnvLoadError(EnvError::kUnbounded,
                         "environment: boundary column has free cells");
  if (env.free_count() == 0)
    throw EnvLoadError(EnvError::kNoFreeSpace, "environment: no free cells");
}

// 4-connected flood fill over a boolean "eligible" mask.
void flood4(const GridSpec& s, const std::vector<std::uint8_t>& eligible,
            std::vector<std::uint8_t>& mark, int sx, int sy) {
  if (!s.contains(sx, sy)) return;
  std::deque<std::pair<int, int>> q;
  const std::size_t si = s.index(sx, sy);
  if (!eligible[si] || mark[si]) return;
  mark[si] = 1;
  q.emplace_back(sx, sy);
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    auto [cx, cy] = q.front();
    q.pop_front();
    for (int d = 0; d < 4; ++d) {
      const int nx = cx + dx[d], ny = cy + dy[d];
      if (!s.contains(nx, ny)) continue;
      const std::size_t ni = s.index(nx, ny);
      if (!eligible[ni] || mark[ni]) continue;
      mark[ni] = 1;
      q.emplace_back(nx, ny);
    }
  }
}

}  // namespace

std::size_t Environment::occupied_count() const {
  return static_cast<std::size_t>(
      std::count(occ.begin(), occ.end(), std::uint8_t{1}));
}

std::size_t Environment::free_count() const {
  return occ.size() - occupied_count();
}

Environment load_environment(const std::string& path, double resolution,
                             double origin_x, double origin_y) {
  if (!(resolution > 0.0))
    throw EnvLoadError(EnvError::kMalformed, "environment: resolution must be > 0");
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw EnvLoadError(EnvError::kMalformed,
                       "environment: cannot open '" + path + "'");
  char c0 = static_cast<char>(in.peek());
  Environment env = (c0 == 'P')
                        ? parse_pgm(in, resolution, origin_x, origin_y)
                        : parse_ascii(in, resolution, origin_x, origin_y);
  validate(env);
  return env;
}

bool disc_collides(const Environment& env, double x, double y, double r) {
  const auto& s = env.spec;
  const int x0 = s.cell_x(x - r), x1 = s.cell_x(x + r);
  const int y0 = s.cell_y(y - r), y1 = s.cell_y(y + r);
  const double r2 = r * r;
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      if (!env.occupied_cell(ix, iy)) continue;
      // Closest point of the cell box to the disc center.
      const double cx0 = s.origin_x + ix * s.resolution;
      const double cy0 = s.origin_y + iy * s.resolution;
      const double px = std::clamp(x, cx0, cx0 + s.resolution);
      const double py = std::clamp(y, cy0, cy0 + s.resolution);
      const double dx = x - px, dy = y - py;
      if (dx * dx + dy * dy <= r2) return true;
    }
  }
  return false;
}

void validate_start(const Environment& env, double x, double y, double radius) {
  if (disc_collides(env, x, y, radius))
    throw EnvLoadError(EnvError::kStartInObstacle,
                       "environment: start pose collides with an obstacle");
}

ClassGrid ground_truth_classes(const Environment& env, double map_resolution,
                               double start_x, double start_y,
                               double robot_radius) {
  ClassGrid gt;
  const auto& es = env.spec;
  gt.spec.origin_x = es.origin_x;
  gt.spec.origin_y = es.origin_y;
  gt.spec.resolution = map_resolution;
  gt.spec.width = static_cast<int>(
      std::ceil(es.width * es.resolution / map_resolution - 1e-9));
  gt.spec.height = static_cast<int>(
      std::ceil(es.height * es.resolution / map_resolution - 1e-9));
  const auto n = gt.spec.size();

  std::vector<std::uint8_t> free_mask(n, 0);   // env free at cell center
  std::vector<std::uint8_t> fits_mask(n, 0);   // robot disc fits at center
  for (int iy = 0; iy < gt.spec.height; ++iy) {
    for (int ix = 0; ix < gt.spec.width; ++ix) {
      const double cx = gt.spec.center_x(ix), cy = gt.spec.center_y(iy);
      const std::size_t i = gt.spec.index(ix, iy);
      if (!env.occupied_at(cx, cy)) {
        free_mask[i] = 1;
        if (!disc_collides(env, cx, cy, robot_radius)) fits_mask[i] = 1;
      }
    }
  }

  // Cells the robot can actually drive to.
  std::vector<std::uint8_t> reachable(n, 0);
  flood4(gt.spec, fits_mask, reachable, gt.spec.cell_x(start_x),
         gt.spec.cell_y(start_y));

  // Cells a sensor ray from reachable space can traverse: free-space flood
  // seeded with every reachable cell (rays pass gaps the disc cannot).
  std::vector<std::uint8_t> visible(n, 0);
  for (int iy = 0; iy < gt.spec.height; ++iy)
    for (int ix = 0; ix < gt.spec.width; ++ix)
      if (reachable[gt.spec.index(ix, iy)])
        flood4(gt.spec, free_mask, visible, ix, iy);

  gt.cls.assign(n, static_cast<std::uint8_t>(gridkern::CellClass::kUnknown));
  for (int iy = 0; iy < gt.spec.height; ++iy) {
    for (int ix = 0; ix < gt.spec.width; ++ix) {
      const std::size_t i = gt.spec.index(ix, iy);
      if (visible[i]) {
        gt.cls[i] = static_cast<std::uint8_t>(gridkern::CellClass::kFree);
        continue;
      }
      if (free_mask[i]) continue;  // enclosed hollow: unknown
      // Occupied cell is observable iff it borders visible free space.
      bool borders = false;
      for (int dy = -1; dy <= 1 && !borders; ++dy)
        for (int dx = -1; dx <= 1 && !borders; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = ix + dx, ny = iy + dy;
          if (gt.spec.contains(nx, ny) && visible[gt.spec.index(nx, ny)])
            borders = true;
        }
      if (borders)
        gt.cls[i] = static_cast<std::uint8_t>(gridkern::CellClass::kOccupied);
    }
  }
  return gt;
}

}  // namespace panslam::world
