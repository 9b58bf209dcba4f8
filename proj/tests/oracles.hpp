#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "umap/grid.hpp"
#include "umap/planner.hpp"

namespace oracle {

// Every cell whose interior the segment [0, stop] along `angle` crosses for
// longer than the traversal epsilon, ordered by entry parameter.
inline umap::CellList supercover(const umap::GridGeometry& g, umap::Vec2 o, double angle, double stop) {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  auto slab = [](double p, double d, double lo, double hi, double& t0, double& t1) {
    if (d == 0.0) {
      if (p < lo || p >= hi) return false;
      t0 = -std::numeric_limits<double>::infinity();
      t1 = std::numeric_limits<double>::infinity();
      return true;
    }
    const double a = (lo - p) / d;
    const double b = (hi - p) / d;
    t0 = std::min(a, b);
    t1 = std::max(a, b);
    return true;
  };
  std::vector<std::pair<double, umap::CellIndex>> hits;
  for (int iy = 0; iy < g.height; ++iy) {
    for (int ix = 0; ix < g.width; ++ix) {
      const double x0 = g.origin.x + ix * g.resolution;
      const double y0 = g.origin.y + iy * g.resolution;
      double ax = 0, bx = 0, ay = 0, by = 0;
      if (!slab(o.x, dx, x0, x0 + g.resolution, ax, bx)) continue;
      if (!slab(o.y, dy, y0, y0 + g.resolution, ay, by)) continue;
      const double lo = std::max({0.0, ax, ay});
      const double hi = std::min({stop, bx, by});
      if (hi - lo > umap::kTraversalEpsilon) hits.push_back({lo, {ix, iy}});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  umap::CellList out;
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

// Composite Simpson rule with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Maximizer of a unimodal function on [a, b].
inline double golden_max(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Textbook Dijkstra over the 8-connected costmap graph using an ordered set.
inline double dijkstra_cost(const umap::Costmap& cm, umap::CellIndex s, umap::CellIndex t) {
  const auto& g = cm.geometry;
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  std::set<std::pair<double, std::size_t>> open;
  dist[g.linear(s)] = 0.0;
  open.insert({0.0, g.linear(s)});
  while (!open.empty()) {
    const auto [d, i] = *open.begin();
    open.erase(open.begin());
    if (i == g.linear(t)) return d;
    const umap::CellIndex c = g.unlinear(i);
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        if (ox == 0 && oy == 0) continue;
        const umap::CellIndex n{c.ix + ox, c.iy + oy};
        if (!g.contains(n) || cm.is_lethal(n)) continue;
        const double nd = d + umap::edge_cost(cm, c, n);
        const std::size_t ni = g.linear(n);
        if (nd < dist[ni]) {
          open.erase({dist[ni], ni});
          dist[ni] = nd;
          open.insert({nd, ni});
        }
      }
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace oracle
