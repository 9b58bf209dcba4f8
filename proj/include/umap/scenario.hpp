#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "umap/world.hpp"

namespace umap {

inline constexpr int kScenarioSchema = 1;

/// A world plus the simulation settings that go with it.
struct Scenario {
  WorldConfig world;
  double scan_noise_sigma = 0.01;
  /// Regions known to be free, used to score mapping quality.
  std::vector<RectFootprint> marked_free;
};

nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Two rooms split by a partition made of glass panes, visible frame pieces,
/// and a door. Optionally a table (visible legs, overhanging top) in the left
/// room. 10 m x 8 m at 0.05 m cells, 128 rays.
Scenario glass_office_scenario(bool with_table = true);

/// Circular room centred in a square world, built from `sides` wall segments.
Scenario circular_room_scenario(int sides = 128, double radius = 3.0);

/// Poses drawn uniformly from free space, each at least `clearance` meters from
/// every truly occupied cell centre. Headings uniform in [-pi, pi).
std::vector<Pose2D> sample_free_poses(const GridWorld& world, std::size_t count, double clearance, Rng& rng);

/// Poses spaced `spacing` meters apart by arc length along the polyline;
/// heading follows the current segment. The last waypoint is always included.
std::vector<Pose2D> interpolate_waypoints(const std::vector<Vec2>& waypoints, double spacing);

/// Distance from p to the nearest truly occupied cell centre, capped at `cap`.
double clearance_at(const GridWorld& world, Vec2 p, double cap);

}  // namespace umap
