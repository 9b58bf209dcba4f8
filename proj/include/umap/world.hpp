#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "umap/grid.hpp"
#include "umap/rng.hpp"

namespace umap {

/// Axis-aligned rectangle footprint, meters.
struct RectFootprint {
  Vec2 min;
  Vec2 max;
};

/// Straight wall of the given thickness centred on the segment from..to.
struct SegmentFootprint {
  Vec2 from;
  Vec2 to;
  double thickness = 0.1;
};

using Footprint = std::variant<RectFootprint, SegmentFootprint>;

struct Obstacle {
  Footprint footprint;
  double h_lo = 0.0;
  double h_hi = 2.0;
  /// False for glass and other surfaces the lidar does not return from.
  bool laser_visible = true;
  std::string name;
};

struct WorldConfig {
  double extent_x = 10.0;
  double extent_y = 8.0;
  double resolution = 0.05;
  double robot_height = 1.4;
  double scan_height = 0.25;
  double max_range = 15.0;
  int n_rays = 128;
  double fov = 2.0 * std::numbers::pi;
  std::vector<Obstacle> obstacles;
};

/// Distances measured along N rays from one pose.
struct ScanPair {
  Pose2D pose;
  /// Raw laser at scan height: only laser-visible obstacles crossing that height.
  std::vector<double> x_scan;
  /// Robot-to-obstacle distance: nearest obstacle at any height up to the robot height.
  std::vector<double> y_true;
  /// 1 where the first true obstacle along the ray is not seen by the laser.
  std::vector<std::uint8_t> hidden;
};

/// Immutable rasterized world. Occupancy is decided by cell-centre membership.
class GridWorld {
 public:
  const WorldConfig& config() const { return config_; }
  const GridGeometry& geometry() const { return geometry_; }

  /// Occupied by any obstacle reaching below the robot height.
  bool truly_occupied(CellIndex c) const { return true_grid_[geometry_.linear(c)] != 0; }
  /// Occupied by a laser-visible obstacle spanning the scan height.
  bool visibly_occupied(CellIndex c) const { return visible_grid_[geometry_.linear(c)] != 0; }
  /// Index into config().obstacles of the first obstacle covering the cell in
  /// the true grid, or -1.
  int obstacle_at(CellIndex c) const { return obstacle_id_[geometry_.linear(c)]; }

  const std::vector<std::uint8_t>& true_grid() const { return true_grid_; }
  const std::vector<std::uint8_t>& visible_grid() const { return visible_grid_; }

  /// True if the pose is inside the extent and its cell is free in the true grid.
  bool is_free(const Pose2D& pose) const;

  /// Absolute angle of every ray for a pose.
  std::vector<double> ray_angles(const Pose2D& pose) const;

  /// True if the fov covers the full circle (ray windows wrap around).
  bool full_circle() const;

 private:
  friend GridWorld build_world(const WorldConfig& config);

  WorldConfig config_;
  GridGeometry geometry_;
  std::vector<std::uint8_t> true_grid_;
  std::vector<std::uint8_t> visible_grid_;
  std::vector<int> obstacle_id_;
};

/// Absolute ray angles: N evenly spaced directions starting at the heading for a
/// full circle, otherwise spread from -fov/2 to +fov/2 inclusive.
std::vector<double> scan_angles(const Pose2D& pose, int n_rays, double fov);

/// Validates the configuration and rasterizes both occupancy grids.
/// Obstacles may overlap each other (a table top covers its legs); a footprint
/// reaching outside the extent is a ConfigError.
GridWorld build_world(const WorldConfig& config);

/// True if the cell centre lies inside the footprint.
bool footprint_contains(const Footprint& footprint, Vec2 p);

/// Robot-to-obstacle distance along every ray (minimum over all heights);
/// max_range where nothing is hit. Throws ConfigError if the pose is not free.
std::vector<double> true_distance_profile(const GridWorld& world, const Pose2D& pose);

/// Raw lidar ranges with zero-mean Gaussian read noise, clamped to (0, max_range].
/// Rays with no return report exactly max_range.
std::vector<double> simulate_scan(const GridWorld& world, const Pose2D& pose, double noise_sigma, Rng& rng);

/// Per-ray flag: the first obstacle in the true grid is not visible to the laser.
std::vector<std::uint8_t> hidden_rays(const GridWorld& world, const Pose2D& pose);

ScanPair capture_scan(const GridWorld& world, const Pose2D& pose, double noise_sigma, Rng& rng);

}  // namespace umap
