#include "umap/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace umap {

namespace {

struct Bounds {
  Vec2 min;
  Vec2 max;
};

Bounds bounds_of(const Footprint& fp) {
  if (const auto* r = std::get_if<RectFootprint>(&fp)) return {r->min, r->max};
  const auto& s = std::get<SegmentFootprint>(fp);
  const double dx = s.to.x - s.from.x;
  const double dy = s.to.y - s.from.y;
  const double len = std::hypot(dx, dy);
  // Half-thickness offset along the normal.
  const double ox = std::abs(dy / len) * 0.5 * s.thickness;
  const double oy = std::abs(dx / len) * 0.5 * s.thickness;
  return {{std::min(s.from.x, s.to.x) - ox, std::min(s.from.y, s.to.y) - oy},
          {std::max(s.from.x, s.to.x) + ox, std::max(s.from.y, s.to.y) + oy}};
}

void validate_obstacle(const Obstacle& o, std::size_t index, const WorldConfig& config) {
  std::ostringstream where;
  where << "obstacle " << index << (o.name.empty() ? "" : " (" + o.name + ")");
  if (!(o.h_lo >= 0.0 && o.h_lo < o.h_hi)) {
    throw ConfigError(where.str() + ": height interval must satisfy 0 <= h_lo < h_hi");
  }
  if (const auto* r = std::get_if<RectFootprint>(&o.footprint)) {
    if (!(r->max.x > r->min.x && r->max.y > r->min.y)) {
      throw ConfigError(where.str() + ": rectangle must have positive extent");
    }
  } else {
    const auto& s = std::get<SegmentFootprint>(o.footprint);
    if (!(distance(s.from, s.to) > 0.0) || !(s.thickness > 0.0)) {
      throw ConfigError(where.str() + ": segment must have positive length and thickness");
    }
  }
  const Bounds b = bounds_of(o.footprint);
  constexpr double tol = 1e-9;
  if (b.min.x < -tol || b.min.y < -tol || b.max.x > config.extent_x + tol || b.max.y > config.extent_y + tol) {
    throw ConfigError(where.str() + ": footprint extends outside the world extent");
  }
}

void validate_config(const WorldConfig& c) {
  if (!(c.extent_x > 0.0 && c.extent_y > 0.0)) throw ConfigError("world extent must be positive");
  if (!(c.resolution > 0.0)) throw ConfigError("resolution must be positive");
  if (!(c.robot_height > 0.0)) throw ConfigError("robot height must be positive");
  if (!(c.scan_height >= 0.0 && c.scan_height <= c.robot_height)) {
    throw ConfigError("scan height must lie in [0, robot height]");
  }
  if (!(c.max_range > 0.0)) throw ConfigError("max_range must be positive");
  if (c.n_rays < 1) throw ConfigError("n_rays must be at least 1");
  if (!(c.fov > 0.0 && c.fov <= 2.0 * std::numbers::pi + 1e-12)) throw ConfigError("fov must lie in (0, 2*pi]");
  for (std::size_t i = 0; i < c.obstacles.size(); ++i) validate_obstacle(c.obstacles[i], i, c);
}

// First occupied cell along the ray in `grid`; returns its entry distance.
double first_hit(const GridWorld& world, const std::vector<std::uint8_t>& grid, Vec2 origin, double angle,
                 CellIndex* hit_cell) {
  const auto& g = world.geometry();
  const double max_range = world.config().max_range;
  double hit = max_range;
  traverse_ray(g, origin, angle, max_range, [&](CellIndex c, double t_enter, double) {
    if (grid[g.linear(c)] != 0) {
      hit = std::min(t_enter, max_range);
      if (hit_cell) *hit_cell = c;
      return false;
    }
    return true;
  });
  return hit;
}

void require_free(const GridWorld& world, const Pose2D& pose) {
  if (!world.is_free(pose)) {
    std::ostringstream msg;
    msg << "pose (" << pose.x << ", " << pose.y << ") is outside the world or inside an obstacle";
    throw ConfigError(msg.str());
  }
}

}  // namespace

bool footprint_contains(const Footprint& fp, Vec2 p) {
  if (const auto* r = std::get_if<RectFootprint>(&fp)) {
    return p.x >= r->min.x && p.x <= r->max.x && p.y >= r->min.y && p.y <= r->max.y;
  }
  const auto& s = std::get<SegmentFootprint>(fp);
  const double dx = s.to.x - s.from.x;
  const double dy = s.to.y - s.from.y;
  const double len = std::hypot(dx, dy);
  const double along = ((p.x - s.from.x) * dx + (p.y - s.from.y) * dy) / len;
  const double across = ((p.x - s.from.x) * dy - (p.y - s.from.y) * dx) / len;
  return along >= 0.0 && along <= len && std::abs(across) <= 0.5 * s.thickness;
}

GridWorld build_world(const WorldConfig& config) {
  validate_config(config);
  GridWorld w;
  w.config_ = config;
  w.geometry_ = geometry_for_extent(config.extent_x, config.extent_y, config.resolution);
  const auto& g = w.geometry_;
  w.true_grid_.assign(g.size(), 0);
  w.visible_grid_.assign(g.size(), 0);
  w.obstacle_id_.assign(g.size(), -1);

  for (std::size_t k = 0; k < config.obstacles.size(); ++k) {
    const Obstacle& o = config.obstacles[k];
    const bool in_true = o.h_lo <= config.robot_height;
    const bool in_visible = o.laser_visible && o.h_lo <= config.scan_height && config.scan_height <= o.h_hi;
    if (!in_true && !in_visible) continue;
    const Bounds b = bounds_of(o.footprint);
    const int x0 = std::max(0, static_cast<int>(std::floor((b.min.x - g.origin.x) / g.resolution)));
    const int y0 = std::max(0, static_cast<int>(std::floor((b.min.y - g.origin.y) / g.resolution)));
    const int x1 = std::min(g.width - 1, static_cast<int>(std::floor((b.max.x - g.origin.x) / g.resolution)));
    const int y1 = std::min(g.height - 1, static_cast<int>(std::floor((b.max.y - g.origin.y) / g.resolution)));
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        const CellIndex c{ix, iy};
        if (!footprint_contains(o.footprint, g.center(c))) continue;
        const std::size_t i = g.linear(c);
        if (in_true) {
          w.true_grid_[i] = 1;
          if (w.obstacle_id_[i] < 0) w.obstacle_id_[i] = static_cast<int>(k);
        }
        if (in_visible) w.visible_grid_[i] = 1;
      }
    }
  }
  return w;
}

bool GridWorld::is_free(const Pose2D& pose) const {
  const auto c = geometry_.cell_of({pose.x, pose.y});
  return c.has_value() && !truly_occupied(*c);
}

bool GridWorld::full_circle() const { return config_.fov >= 2.0 * std::numbers::pi - 1e-12; }

std::vector<double> scan_angles(const Pose2D& pose, int n_rays, double fov) {
  const auto n = static_cast<std::size_t>(std::max(0, n_rays));
  std::vector<double> angles(n);
  if (fov >= 2.0 * std::numbers::pi - 1e-12) {
    const double step = 2.0 * std::numbers::pi / n_rays;
    for (std::size_t i = 0; i < n; ++i) angles[i] = pose.theta + static_cast<double>(i) * step;
  } else if (n == 1) {
    angles[0] = pose.theta;
  } else {
    const double step = fov / (n_rays - 1);
    for (std::size_t i = 0; i < n; ++i) angles[i] = pose.theta - 0.5 * fov + static_cast<double>(i) * step;
  }
  return angles;
}

std::vector<double> GridWorld::ray_angles(const Pose2D& pose) const {
  return scan_angles(pose, config_.n_rays, config_.fov);
}

std::vector<double> true_distance_profile(const GridWorld& world, const Pose2D& pose) {
  require_free(world, pose);
  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(world.config().n_rays));
  for (double a : world.ray_angles(pose)) y.push_back(first_hit(world, world.true_grid(), {pose.x, pose.y}, a, nullptr));
  return y;
}

std::vector<double> simulate_scan(const GridWorld& world, const Pose2D& pose, double noise_sigma, Rng& rng) {
  require_free(world, pose);
  if (!(noise_sigma >= 0.0)) throw ConfigError("scan noise sigma must be non-negative");
  const double max_range = world.config().max_range;
  // Smallest reportable range.
  const double min_range = 1e-3 * world.config().resolution;
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(world.config().n_rays));
  for (double a : world.ray_angles(pose)) {
    double d = first_hit(world, world.visible_grid(), {pose.x, pose.y}, a, nullptr);
    if (d < max_range && noise_sigma > 0.0) d = std::clamp(d + sample_gaussian(rng, noise_sigma), min_range, max_range);
    x.push_back(d);
  }
  return x;
}

std::vector<std::uint8_t> hidden_rays(const GridWorld& world, const Pose2D& pose) {
  require_free(world, pose);
  std::vector<std::uint8_t> hidden;
  for (double a : world.ray_angles(pose)) {
    CellIndex c{-1, -1};
    const double d = first_hit(world, world.true_grid(), {pose.x, pose.y}, a, &c);
    hidden.push_back(d < world.config().max_range && !world.visibly_occupied(c) ? 1 : 0);
  }
  return hidden;
}

ScanPair capture_scan(const GridWorld& world, const Pose2D& pose, double noise_sigma, Rng& rng) {
  ScanPair s;
  s.pose = pose;
  s.y_true = true_distance_profile(world, pose);
  s.x_scan = simulate_scan(world, pose, noise_sigma, rng);
  s.hidden = hidden_rays(world, pose);
  return s;
}

}  // namespace umap
