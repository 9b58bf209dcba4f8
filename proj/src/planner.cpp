#include "umap/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

namespace umap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest squared cell offset whose centre distance is within radius meters
// (strictly inside when `strict`). Radii that are whole cell multiples up to
// rounding are treated as exact.
long long max_offset_sq(double radius, double resolution, bool strict) {
  if (radius <= 0.0) return strict ? -1 : 0;
  const double q = radius / resolution;
  const double q2 = q * q;
  const long long k = std::llround(q2);
  if (std::abs(q2 - static_cast<double>(k)) < 1e-6) return strict ? k - 1 : k;
  return static_cast<long long>(std::floor(q2));
}

void require_same_geometry(const ProbabilityMap& a, const ProbabilityMap& b) {
  if (!(a.geometry == b.geometry)) throw ConfigError("maps have different geometry");
}

struct OpenEntry {
  double f;
  double h;
  std::size_t index;
  double g;
  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (h != o.h) return h > o.h;
    return index > o.index;
  }
};

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

PathResult search(const Costmap& cm, CellIndex start, CellIndex goal, bool use_heuristic) {
  const auto& g = cm.geometry;
  if (!g.contains(start) || !g.contains(goal)) throw ConfigError("plan: start or goal outside the map");
  if (cm.is_lethal(start)) throw ConfigError("plan: start cell is lethal");
  if (cm.is_lethal(goal)) throw ConfigError("plan: goal cell is lethal");

  const Vec2 goal_c = g.center(goal);
  auto heuristic = [&](CellIndex c) { return use_heuristic ? distance(g.center(c), goal_c) : 0.0; };

  std::vector<double> best(g.size(), kInf);
  std::vector<std::size_t> parent(g.size(), std::numeric_limits<std::size_t>::max());
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  const std::size_t s = g.linear(start);
  const std::size_t t = g.linear(goal);
  best[s] = 0.0;
  open.push({heuristic(start), heuristic(start), s, 0.0});

  PathResult result;
  while (!open.empty()) {
    const OpenEntry e = open.top();
    open.pop();
    if (e.g != best[e.index]) continue;
    if (e.index == t) {
      result.status = PlanStatus::Found;
      result.cost = e.g;
      for (std::size_t i = t;; i = parent[i]) {
        result.cells.push_back(g.unlinear(i));
        if (i == s) break;
      }
      std::reverse(result.cells.begin(), result.cells.end());
      for (const auto& c : result.cells) result.waypoints.push_back(g.center(c));
      return result;
    }
    const CellIndex c = g.unlinear(e.index);
    for (int k = 0; k < 8; ++k) {
      const CellIndex n{c.ix + kDx[k], c.iy + kDy[k]};
      if (!g.contains(n) || cm.is_lethal(n)) continue;
      const double ng = e.g + edge_cost(cm, c, n);
      const std::size_t ni = g.linear(n);
      if (ng < best[ni]) {
        best[ni] = ng;
        parent[ni] = e.index;
        const double h = heuristic(n);
        open.push({ng + h, h, ni, ng});
      }
    }
  }
  return result;
}

}  // namespace

Costmap make_costmap(const ProbabilityMap& map, const CostmapConfig& config) {
  if (!(config.lethal_threshold > 0.5 && config.lethal_threshold < 1.0)) {
    throw ConfigError("costmap: lethal threshold must lie in (0.5, 1)");
  }
  if (config.robot_radius < 0.0 || config.inflation_radius < 0.0 || config.lambda < 0.0) {
    throw ConfigError("costmap: radii and lambda must be nonnegative");
  }
  const auto& g = map.geometry;
  Costmap cm{g, std::vector<std::uint8_t>(g.size(), 0), std::vector<double>(g.size(), 0.0), config.robot_radius,
             config.inflation_radius};
  std::vector<double> inflation(g.size(), 0.0);
  const long long hard = max_offset_sq(config.robot_radius, g.resolution, false);
  const long long soft = max_offset_sq(std::max(config.inflation_radius, config.robot_radius), g.resolution, false);
  const int reach = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(0LL, soft)))));

  for (std::size_t i = 0; i < g.size(); ++i) {
    if (map.p[i] < config.lethal_threshold) continue;
    const CellIndex src = g.unlinear(i);
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        const CellIndex c{src.ix + dx, src.iy + dy};
        if (!g.contains(c)) continue;
        const long long d2 = static_cast<long long>(dx) * dx + static_cast<long long>(dy) * dy;
        const std::size_t ci = g.linear(c);
        if (d2 <= hard) {
          cm.lethal[ci] = 1;
        } else if (d2 <= soft) {
          const double d = g.resolution * std::sqrt(static_cast<double>(d2));
          const double v = config.inflation_weight * std::exp(-config.inflation_decay * (d - config.robot_radius));
          inflation[ci] = std::max(inflation[ci], v);
        }
      }
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) cm.cost[i] = config.lambda * map.p[i] + inflation[i];
  return cm;
}

ProbabilityMap truth_probability_map(const GridWorld& world) {
  ProbabilityMap m{world.geometry(), std::vector<double>(world.geometry().size(), 0.0)};
  for (std::size_t i = 0; i < m.p.size(); ++i) m.p[i] = world.true_grid()[i] ? 1.0 : 0.0;
  return m;
}

ProbabilityMap layer_max(const ProbabilityMap& a, const ProbabilityMap& b) {
  require_same_geometry(a, b);
  ProbabilityMap out = a;
  for (std::size_t i = 0; i < out.p.size(); ++i) out.p[i] = std::max(a.p[i], b.p[i]);
  return out;
}

double edge_cost(const Costmap& costmap, CellIndex a, CellIndex b) {
  const bool diagonal = a.ix != b.ix && a.iy != b.iy;
  const double step = costmap.geometry.resolution * (diagonal ? std::numbers::sqrt2 : 1.0);
  return step * (1.0 + 0.5 * (costmap.soft(a) + costmap.soft(b)));
}

PathResult plan(const Costmap& costmap, CellIndex start, CellIndex goal) { return search(costmap, start, goal, true); }

PathResult plan(const Costmap& costmap, Vec2 start, Vec2 goal) {
  const auto s = costmap.geometry.cell_of(start);
  const auto t = costmap.geometry.cell_of(goal);
  if (!s || !t) throw ConfigError("plan: start or goal outside the map");
  return plan(costmap, *s, *t);
}

PathResult plan_dijkstra(const Costmap& costmap, CellIndex start, CellIndex goal) {
  return search(costmap, start, goal, false);
}

CollisionReport evaluate_collisions(const PathResult& path, const GridWorld& world, double robot_radius) {
  CollisionReport report;
  const auto& g = world.geometry();
  const long long limit = max_offset_sq(robot_radius, g.resolution, true);
  if (limit < 0) return report;
  const int reach = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(limit))));
  for (std::size_t k = 0; k < path.cells.size(); ++k) {
    const CellIndex p = path.cells[k];
    long long nearest = std::numeric_limits<long long>::max();
    CellIndex nearest_cell;
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        const long long d2 = static_cast<long long>(dx) * dx + static_cast<long long>(dy) * dy;
        const CellIndex c{p.ix + dx, p.iy + dy};
        if (d2 > limit || !g.contains(c) || !world.truly_occupied(c)) continue;
        const int id = world.obstacle_at(c);
        const bool visible = id >= 0 && world.config().obstacles[static_cast<std::size_t>(id)].laser_visible;
        (visible ? report.hit_visible : report.hit_hidden) = true;
        if (!report.collided && d2 < nearest) {
          nearest = d2;
          nearest_cell = c;
        }
      }
    }
    if (!report.collided && nearest != std::numeric_limits<long long>::max()) {
      report.collided = true;
      report.path_index = k;
      report.obstacle_cell = nearest_cell;
      const int id = world.obstacle_at(nearest_cell);
      if (id >= 0) {
        const auto& ob = world.config().obstacles[static_cast<std::size_t>(id)];
        report.obstacle_name = ob.name;
        report.first_laser_visible = ob.laser_visible;
      }
    }
  }
  return report;
}

std::vector<Vec2> sample_goals(const GridWorld& world, const NavConfig& config) {
  if (config.n_goals < 2) throw ConfigError("nav: need at least two goals");
  const auto& g = world.geometry();
  const Costmap truth = make_costmap(truth_probability_map(world), config.costmap);
  Rng rng = make_rng(config.seed, "goals");

  std::vector<std::uint8_t> reachable;
  std::vector<Vec2> goals;
  const double ex = world.config().extent_x;
  const double ey = world.config().extent_y;
  for (int attempt = 0; attempt < 200000 && static_cast<int>(goals.size()) < config.n_goals; ++attempt) {
    const auto cell = g.cell_of({sample_uniform(rng, 0.0, ex), sample_uniform(rng, 0.0, ey)});
    if (!cell || truth.is_lethal(*cell)) continue;
    const Vec2 p = g.center(*cell);
    if (clearance_at(world, p, config.goal_clearance + 1.0) < config.goal_clearance) continue;
    if (!reachable.empty() && !reachable[g.linear(*cell)]) continue;
    bool spaced = true;
    for (const auto& q : goals) spaced = spaced && distance(p, q) >= config.goal_separation;
    if (!spaced) continue;
    goals.push_back(p);
    if (reachable.empty()) {
      // Flood fill the free component of the first goal.
      reachable.assign(g.size(), 0);
      std::deque<CellIndex> queue{*cell};
      reachable[g.linear(*cell)] = 1;
      while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        for (int k = 0; k < 8; ++k) {
          const CellIndex n{c.ix + kDx[k], c.iy + kDy[k]};
          if (!g.contains(n) || truth.is_lethal(n) || reachable[g.linear(n)]) continue;
          reachable[g.linear(n)] = 1;
          queue.push_back(n);
        }
      }
    }
  }
  if (static_cast<int>(goals.size()) < config.n_goals) throw ConfigError("nav: could not place enough goal points");
  return goals;
}

NavReport nav_experiment(const GridWorld& world, std::span<const MapVariant> variants, const NavConfig& config) {
  if (config.n_trajectories < 0) throw ConfigError("nav: negative trajectory count");
  NavReport report;
  report.goals = sample_goals(world, config);
  const int n = static_cast<int>(report.goals.size());
  Rng rng = make_rng(config.seed, "goal-pairs");
  std::uniform_int_distribution<int> first(0, n - 1), second(0, n - 2);
  for (int i = 0; i < config.n_trajectories; ++i) {
    const int a = first(rng);
    int b = second(rng);
    if (b >= a) ++b;
    report.pairs.emplace_back(a, b);
  }

  const auto& g = world.geometry();
  for (const auto& variant : variants) {
    if (!(variant.map.geometry == g)) throw ConfigError("nav: variant '" + variant.name + "' has the wrong geometry");
    const Costmap cm = make_costmap(variant.map, config.costmap);
    NavVariantResult vr;
    vr.name = variant.name;
    std::map<std::pair<int, int>, NavTrajectory> cache;
    for (const auto& [a, b] : report.pairs) {
      auto it = cache.find({a, b});
      if (it == cache.end()) {
        NavTrajectory t{a, b, PlanStatus::NoPath, 0.0, {}};
        const CellIndex s = *g.cell_of(report.goals[static_cast<std::size_t>(a)]);
        const CellIndex e = *g.cell_of(report.goals[static_cast<std::size_t>(b)]);
        if (!cm.is_lethal(s) && !cm.is_lethal(e)) {
          const PathResult path = plan(cm, s, e);
          t.status = path.status;
          t.cost = path.cost;
          if (path.status == PlanStatus::Found) {
            t.collision = evaluate_collisions(path, world, config.costmap.robot_radius);
          }
        }
        it = cache.emplace(std::make_pair(a, b), t).first;
      }
      const NavTrajectory& t = it->second;
      ++vr.trajectories;
      if (t.status == PlanStatus::Found) {
        ++vr.found;
        if (t.collision.collided) ++vr.collisions;
      } else {
        ++vr.no_path;
      }
      vr.details.push_back(t);
    }
    vr.collision_pct = vr.found > 0 ? 100.0 * vr.collisions / vr.found : 0.0;
    report.variants.push_back(std::move(vr));
  }
  return report;
}

std::string nav_report_csv(const NavReport& report) {
  std::ostringstream out;
  out << "variant,trajectories,found,no_path,collisions,collision_pct\n";
  char pct[32];
  for (const auto& v : report.variants) {
    std::snprintf(pct, sizeof pct, "%.2f", v.collision_pct);
    out << v.name << ',' << v.trajectories << ',' << v.found << ',' << v.no_path << ',' << v.collisions << ','
        << pct << '\n';
  }
  return out.str();
}

std::string nav_details_csv(const NavReport& report) {
  std::ostringstream out;
  out << "variant,trajectory,from,to,status,cost,collided,obstacle,laser_visible,hit_hidden,hit_visible\n";
  char cost[32];
  for (const auto& v : report.variants) {
    for (std::size_t i = 0; i < v.details.size(); ++i) {
      const auto& t = v.details[i];
      std::snprintf(cost, sizeof cost, "%.17g", t.cost);
      const auto& c = t.collision;
      out << v.name << ',' << i << ',' << t.from << ',' << t.to << ','
          << (t.status == PlanStatus::Found ? "found" : "no_path") << ',' << cost << ',' << c.collided << ','
          << c.obstacle_name << ',' << (c.collided ? (c.first_laser_visible ? "1" : "0") : "") << ','
          << c.hit_hidden << ',' << c.hit_visible << '\n';
    }
  }
  return out.str();
}

std::string nav_report_table(const NavReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %12s %8s %8s %11s %10s\n", "variant", "trajectories", "found", "no_path",
                "collisions", "percent");
  out << line;
  for (const auto& v : report.variants) {
    std::snprintf(line, sizeof line, "%-12s %12d %8d %8d %11d %9.2f%%\n", v.name.c_str(), v.trajectories, v.found,
                  v.no_path, v.collisions, v.collision_pct);
    out << line;
  }
  return out.str();
}

}  // namespace umap
