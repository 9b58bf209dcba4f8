#include "umap/scenario.hpp"

#include <cmath>
#include <fstream>

namespace umap {

using nlohmann::json;

namespace {

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string("scenario: '") + what + "' must be [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json footprint_json(const Footprint& fp) {
  if (const auto* r = std::get_if<RectFootprint>(&fp)) {
    return {{"type", "rect"}, {"min", vec_json(r->min)}, {"max", vec_json(r->max)}};
  }
  const auto& s = std::get<SegmentFootprint>(fp);
  return {{"type", "segment"}, {"from", vec_json(s.from)}, {"to", vec_json(s.to)}, {"thickness", s.thickness}};
}

Footprint footprint_from(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "rect") return RectFootprint{vec_from(j.at("min"), "min"), vec_from(j.at("max"), "max")};
  if (type == "segment") {
    return SegmentFootprint{vec_from(j.at("from"), "from"), vec_from(j.at("to"), "to"), j.at("thickness").get<double>()};
  }
  throw ConfigError("scenario: unknown shape type '" + type + "'");
}

Obstacle wall(Vec2 min, Vec2 max, bool visible, std::string name, double h_lo = 0.0, double h_hi = 2.5) {
  return Obstacle{RectFootprint{min, max}, h_lo, h_hi, visible, std::move(name)};
}

}  // namespace

json scenario_to_json(const Scenario& s) {
  const auto& w = s.world;
  json obstacles = json::array();
  for (const auto& o : w.obstacles) {
    json jo = {{"shape", footprint_json(o.footprint)},
               {"height_interval", json::array({o.h_lo, o.h_hi})},
               {"laser_visible", o.laser_visible}};
    if (!o.name.empty()) jo["name"] = o.name;
    obstacles.push_back(std::move(jo));
  }
  json free = json::array();
  for (const auto& r : s.marked_free) free.push_back({{"min", vec_json(r.min)}, {"max", vec_json(r.max)}});
  return {{"schema", kScenarioSchema},
          {"extent", json::array({w.extent_x, w.extent_y})},
          {"resolution", w.resolution},
          {"robot_height", w.robot_height},
          {"scan_height", w.scan_height},
          {"n_rays", w.n_rays},
          {"fov", w.fov},
          {"max_range", w.max_range},
          {"scan_noise_sigma", s.scan_noise_sigma},
          {"obstacles", std::move(obstacles)},
          {"marked_free", std::move(free)}};
}

Scenario scenario_from_json(const json& j) {
  try {
    const int schema = j.at("schema").get<int>();
    if (schema != kScenarioSchema) throw ConfigError("scenario: unsupported schema " + std::to_string(schema));
    Scenario s;
    auto& w = s.world;
    const Vec2 extent = vec_from(j.at("extent"), "extent");
    w.extent_x = extent.x;
    w.extent_y = extent.y;
    w.resolution = j.value("resolution", w.resolution);
    w.robot_height = j.value("robot_height", w.robot_height);
    w.scan_height = j.value("scan_height", w.scan_height);
    w.n_rays = j.value("n_rays", w.n_rays);
    w.fov = j.value("fov", w.fov);
    w.max_range = j.value("max_range", w.max_range);
    s.scan_noise_sigma = j.value("scan_noise_sigma", s.scan_noise_sigma);
    for (const auto& jo : j.value("obstacles", json::array())) {
      Obstacle o;
      o.footprint = footprint_from(jo.at("shape"));
      const auto& h = jo.at("height_interval");
      o.h_lo = h.at(0).get<double>();
      o.h_hi = h.at(1).get<double>();
      o.laser_visible = jo.value("laser_visible", true);
      o.name = jo.value("name", std::string{});
      w.obstacles.push_back(std::move(o));
    }
    for (const auto& jr : j.value("marked_free", json::array())) {
      s.marked_free.push_back({vec_from(jr.at("min"), "min"), vec_from(jr.at("max"), "max")});
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << scenario_to_json(scenario).dump(2) << '\n';
}

Scenario glass_office_scenario(bool with_table) {
  Scenario s;
  auto& w = s.world;
  w.extent_x = 10.0;
  w.extent_y = 8.0;
  w.resolution = 0.05;
  w.robot_height = 1.4;
  w.scan_height = 0.25;
  w.max_range = 15.0;
  w.n_rays = 128;

  auto& obs = w.obstacles;
  obs.push_back(wall({0.0, 0.0}, {10.0, 0.15}, true, "wall_south"));
  obs.push_back(wall({0.0, 7.85}, {10.0, 8.0}, true, "wall_north"));
  obs.push_back(wall({0.0, 0.0}, {0.15, 8.0}, true, "wall_west"));
  obs.push_back(wall({9.85, 0.0}, {10.0, 8.0}, true, "wall_east"));

  // Partition at x = 5 m: frame, glass, frame, door, frame, glass, frame.
  obs.push_back(wall({4.95, 0.15}, {5.05, 1.0}, true, "frame_a"));
  obs.push_back(wall({4.95, 1.0}, {5.05, 3.2}, false, "glass_south"));
  obs.push_back(wall({4.95, 3.2}, {5.05, 3.4}, true, "frame_b"));
  obs.push_back(wall({4.95, 4.6}, {5.05, 4.8}, true, "frame_c"));
  obs.push_back(wall({4.95, 4.8}, {5.05, 7.0}, false, "glass_north"));
  obs.push_back(wall({4.95, 7.0}, {5.05, 7.85}, true, "frame_d"));

  obs.push_back(wall({7.6, 5.6}, {9.0, 6.2}, true, "cabinet", 0.0, 1.0));

  if (with_table) {
    for (Vec2 leg : {Vec2{1.6, 5.2}, Vec2{2.5, 5.2}, Vec2{1.6, 6.0}, Vec2{2.5, 6.0}}) {
      obs.push_back(wall(leg, {leg.x + 0.1, leg.y + 0.1}, true, "table_leg", 0.0, 0.7));
    }
    obs.push_back(wall({1.1, 4.7}, {3.1, 6.6}, true, "table_top", 0.69, 0.72));
  }

  s.marked_free.push_back({{0.8, 0.8}, {4.2, 3.8}});
  s.marked_free.push_back({{5.8, 0.8}, {9.2, 4.8}});
  return s;
}

Scenario circular_room_scenario(int sides, double radius) {
  Scenario s;
  auto& w = s.world;
  const double half = radius + 1.0;
  w.extent_x = 2.0 * half;
  w.extent_y = 2.0 * half;
  w.max_range = 2.0 * half;
  w.n_rays = sides;
  for (int k = 0; k < sides; ++k) {
    const double a0 = 2.0 * std::numbers::pi * k / sides;
    const double a1 = 2.0 * std::numbers::pi * (k + 1) / sides;
    const Vec2 from{half + radius * std::cos(a0), half + radius * std::sin(a0)};
    const Vec2 to{half + radius * std::cos(a1), half + radius * std::sin(a1)};
    w.obstacles.push_back(Obstacle{SegmentFootprint{from, to, 0.2}, 0.0, 2.0, true, "ring"});
  }
  s.scan_noise_sigma = 0.0;
  return s;
}

double clearance_at(const GridWorld& world, Vec2 p, double cap) {
  const auto& g = world.geometry();
  const int reach = static_cast<int>(std::ceil(cap / g.resolution)) + 1;
  const auto c = g.cell_of(p);
  if (!c) return 0.0;
  double best = cap;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const CellIndex n{c->ix + dx, c->iy + dy};
      if (!g.contains(n) || !world.truly_occupied(n)) continue;
      best = std::min(best, distance(p, g.center(n)));
    }
  }
  return best;
}

std::vector<Pose2D> sample_free_poses(const GridWorld& world, std::size_t count, double clearance, Rng& rng) {
  const auto& cfg = world.config();
  std::vector<Pose2D> poses;
  poses.reserve(count);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * (count + 1);
  while (poses.size() < count) {
    if (++attempts > max_attempts) throw ConfigError("could not sample free poses with the requested clearance");
    const Pose2D p{sample_uniform(rng, 0.0, cfg.extent_x), sample_uniform(rng, 0.0, cfg.extent_y),
                   sample_uniform(rng, -std::numbers::pi, std::numbers::pi)};
    if (!world.is_free(p) || clearance_at(world, {p.x, p.y}, clearance) < clearance) continue;
    poses.push_back(p);
  }
  return poses;
}

std::vector<Pose2D> interpolate_waypoints(const std::vector<Vec2>& waypoints, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("waypoint spacing must be positive");
  std::vector<Pose2D> poses;
  if (waypoints.empty()) return poses;
  if (waypoints.size() == 1) return {Pose2D{waypoints[0].x, waypoints[0].y, 0.0}};

  double next = 0.0;  // arc length of the next pose
  double walked = 0.0;
  double heading = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec2 a = waypoints[i];
    const Vec2 b = waypoints[i + 1];
    const double len = distance(a, b);
    if (len == 0.0) continue;
    heading = std::atan2(b.y - a.y, b.x - a.x);
    while (next <= walked + len + 1e-12) {
      const double f = (next - walked) / len;
      poses.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), heading});
      next += spacing;
    }
    walked += len;
  }
  const Vec2 last = waypoints.back();
  if (poses.empty() || distance({poses.back().x, poses.back().y}, last) > 1e-9) {
    poses.push_back({last.x, last.y, heading});
  }
  return poses;
}

}  // namespace umap
