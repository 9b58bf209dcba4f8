#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "umap/common.hpp"

namespace umap {

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct CellIndex {
  int ix = 0;
  int iy = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

using CellList = std::vector<CellIndex>;

/// Regular 2D grid: cell (0,0) covers [origin, origin + resolution) on both axes.
struct GridGeometry {
  int width = 0;
  int height = 0;
  double resolution = 0.05;
  Vec2 origin;

  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }

  bool contains(CellIndex c) const { return c.ix >= 0 && c.iy >= 0 && c.ix < width && c.iy < height; }

  bool contains(Vec2 p) const { return cell_of(p).has_value(); }

  std::optional<CellIndex> cell_of(Vec2 p) const;

  Vec2 center(CellIndex c) const {
    return {origin.x + (c.ix + 0.5) * resolution, origin.y + (c.iy + 0.5) * resolution};
  }

  std::size_t linear(CellIndex c) const {
    return static_cast<std::size_t>(c.iy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.ix);
  }

  CellIndex unlinear(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width)), static_cast<int>(i / static_cast<std::size_t>(width))};
  }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Geometry covering [0, extent_x] x [0, extent_y] at the given resolution.
GridGeometry geometry_for_extent(double extent_x, double extent_y, double resolution);

/// Ray segments shorter than this inside a cell do not count as entering it.
inline constexpr double kTraversalEpsilon = 1e-9;

/// Called once per traversed cell with the parametric interval [t_enter, t_exit]
/// of the ray inside it. Return false to stop the traversal.
using CellVisitor = std::function<bool(CellIndex cell, double t_enter, double t_exit)>;

/// Incremental grid traversal (Amanatides & Woo) from `origin` along `angle`
/// up to `stop_distance`. Visits every cell whose interior the segment crosses,
/// in order, starting with the cell containing the origin. When the ray passes
/// exactly through a cell corner it steps diagonally. Stops silently when the
/// ray leaves the grid.
void traverse_ray(const GridGeometry& geometry, Vec2 origin, double angle, double stop_distance,
                  const CellVisitor& visit);

/// Ordered list of cells crossed by the ray; throws ConfigError if the pose lies
/// outside the grid or stop_distance is not positive.
CellList raycast_cells(const GridGeometry& geometry, const Pose2D& pose, double ray_angle, double stop_distance);

}  // namespace umap
