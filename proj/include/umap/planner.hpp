#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "umap/mapper.hpp"
#include "umap/scenario.hpp"
#include "umap/world.hpp"

namespace umap {

struct CostmapConfig {
  double lethal_threshold = 0.65;
  double robot_radius = 0.3;
  double inflation_radius = 0.5;
  double lambda = 5.0;
  /// Soft inflation cost weight * exp(-decay * (d - robot_radius)) out to
  /// inflation_radius from the nearest lethal source.
  double inflation_weight = 2.0;
  double inflation_decay = 10.0;
};

struct Costmap {
  GridGeometry geometry;
  std::vector<std::uint8_t> lethal;
  /// Nonnegative soft cost of every non-lethal cell.
  std::vector<double> cost;
  double robot_radius = 0.0;
  double inflation_radius = 0.0;

  bool is_lethal(CellIndex c) const { return lethal[geometry.linear(c)] != 0; }
  double soft(CellIndex c) const { return cost[geometry.linear(c)]; }
};

/// Cells at or above the threshold are lethal sources; every cell whose centre
/// is within robot_radius of a source centre is lethal too. Soft cost is
/// lambda * p plus the decaying inflation term.
Costmap make_costmap(const ProbabilityMap& map, const CostmapConfig& config);

/// Probability 1 on truly occupied cells, 0 elsewhere.
ProbabilityMap truth_probability_map(const GridWorld& world);

/// Per-cell maximum of two maps on the same geometry.
ProbabilityMap layer_max(const ProbabilityMap& a, const ProbabilityMap& b);

enum class PlanStatus { Found, NoPath };

struct PathResult {
  PlanStatus status = PlanStatus::NoPath;
  /// 8-connected cells from start to goal.
  std::vector<CellIndex> cells;
  /// Cell centres of `cells`.
  std::vector<Vec2> waypoints;
  double cost = 0.0;
};

/// Cost of moving between two 8-adjacent cells: step length times one plus the
/// mean soft cost of the endpoints.
double edge_cost(const Costmap& costmap, CellIndex a, CellIndex b);

/// A* with a Euclidean heuristic and (f, h, cell index) tie-breaking. Throws
/// ConfigError if start or goal is outside the map or lethal.
PathResult plan(const Costmap& costmap, CellIndex start, CellIndex goal);
PathResult plan(const Costmap& costmap, Vec2 start, Vec2 goal);

/// Plain Dijkstra over the same graph; reference for A*.
PathResult plan_dijkstra(const Costmap& costmap, CellIndex start, CellIndex goal);

struct CollisionReport {
  bool collided = false;
  /// First colliding path index and the nearest truly occupied cell there.
  std::size_t path_index = 0;
  CellIndex obstacle_cell;
  std::string obstacle_name;
  bool first_laser_visible = true;
  /// Over the whole path: touched any hidden / any visible obstacle.
  bool hit_hidden = false;
  bool hit_visible = false;
};

/// A path cell collides when a truly occupied cell centre lies strictly inside
/// robot_radius of its centre.
CollisionReport evaluate_collisions(const PathResult& path, const GridWorld& world, double robot_radius);

struct NavConfig {
  int n_goals = 15;
  int n_trajectories = 400;
  std::uint64_t seed = 0;
  CostmapConfig costmap;
  /// Goals keep this distance from obstacles and from each other.
  double goal_clearance = 0.5;
  double goal_separation = 1.0;
};

struct MapVariant {
  std::string name;
  ProbabilityMap map;
};

struct NavTrajectory {
  int from = 0;
  int to = 0;
  PlanStatus status = PlanStatus::NoPath;
  double cost = 0.0;
  CollisionReport collision;
};

struct NavVariantResult {
  std::string name;
  int trajectories = 0;
  int found = 0;
  int no_path = 0;
  int collisions = 0;
  /// Collisions per found path, percent.
  double collision_pct = 0.0;
  std::vector<NavTrajectory> details;
};

struct NavReport {
  std::vector<Vec2> goals;
  std::vector<std::pair<int, int>> pairs;
  std::vector<NavVariantResult> variants;
};

/// Goal points in free space, mutually reachable on the true-occupancy costmap.
std::vector<Vec2> sample_goals(const GridWorld& world, const NavConfig& config);

/// Plans the same seeded goal-pair sequence on every variant and counts
/// collisions against the true occupancy.
NavReport nav_experiment(const GridWorld& world, std::span<const MapVariant> variants, const NavConfig& config);

/// CSV columns: variant,trajectories,found,no_path,collisions,collision_pct.
std::string nav_report_csv(const NavReport& report);
/// Per-trajectory detail CSV.
std::string nav_details_csv(const NavReport& report);
std::string nav_report_table(const NavReport& report);

}  // namespace umap
