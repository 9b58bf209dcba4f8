#include "umap/grid.hpp"

#include <cmath>
#include <limits>

namespace umap {

std::optional<CellIndex> GridGeometry::cell_of(Vec2 p) const {
  const double fx = std::floor((p.x - origin.x) / resolution);
  const double fy = std::floor((p.y - origin.y) / resolution);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < width && fy < height)) return std::nullopt;
  return CellIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

GridGeometry geometry_for_extent(double extent_x, double extent_y, double resolution) {
  if (!(resolution > 0.0) || !(extent_x > 0.0) || !(extent_y > 0.0)) {
    throw ConfigError("grid extent and resolution must be positive");
  }
  GridGeometry g;
  g.resolution = resolution;
  g.width = static_cast<int>(std::ceil(extent_x / resolution - 1e-9));
  g.height = static_cast<int>(std::ceil(extent_y / resolution - 1e-9));
  g.origin = {0.0, 0.0};
  return g;
}

namespace {

// Parametric distance to the next boundary along one axis from cell `index`.
double next_boundary(double start, double dir, int index, int step, const GridGeometry& g, double origin) {
  if (step == 0) return std::numeric_limits<double>::infinity();
  const double boundary = origin + (index + (step > 0 ? 1 : 0)) * g.resolution;
  return (boundary - start) / dir;
}

}  // namespace

void traverse_ray(const GridGeometry& g, Vec2 origin, double angle, double stop_distance, const CellVisitor& visit) {
  auto start = g.cell_of(origin);
  if (!start) return;
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);

  CellIndex cell = *start;
  double t_enter = 0.0;
  double tx = next_boundary(origin.x, dx, cell.ix, step_x, g, g.origin.x);
  double ty = next_boundary(origin.y, dy, cell.iy, step_y, g, g.origin.y);

  while (true) {
    const double t_next = std::min(tx, ty);
    if (!visit(cell, t_enter, std::min(t_next, stop_distance))) return;
    if (t_next >= stop_distance - kTraversalEpsilon) return;

    if (std::abs(tx - ty) <= kTraversalEpsilon) {
      // Corner crossing: the side cells would only be touched by a sliver.
      cell.ix += step_x;
      cell.iy += step_y;
      t_enter = std::max(tx, ty);
      tx = next_boundary(origin.x, dx, cell.ix, step_x, g, g.origin.x);
      ty = next_boundary(origin.y, dy, cell.iy, step_y, g, g.origin.y);
    } else if (tx < ty) {
      cell.ix += step_x;
      t_enter = tx;
      tx = next_boundary(origin.x, dx, cell.ix, step_x, g, g.origin.x);
    } else {
      cell.iy += step_y;
      t_enter = ty;
      ty = next_boundary(origin.y, dy, cell.iy, step_y, g, g.origin.y);
    }
    if (!g.contains(cell)) return;
  }
}

CellList raycast_cells(const GridGeometry& geometry, const Pose2D& pose, double ray_angle, double stop_distance) {
  if (!(stop_distance > 0.0) || !std::isfinite(stop_distance)) {
    throw ConfigError("raycast stop distance must be positive and finite");
  }
  if (!geometry.contains(Vec2{pose.x, pose.y})) {
    throw ConfigError("raycast origin lies outside the map");
  }
  CellList cells;
  traverse_ray(geometry, {pose.x, pose.y}, ray_angle, stop_distance, [&](CellIndex c, double, double) {
    cells.push_back(c);
    return true;
  });
  return cells;
}

}  // namespace umap
