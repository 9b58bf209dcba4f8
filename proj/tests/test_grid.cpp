#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "umap/grid.hpp"
#include "umap/rng.hpp"

using namespace umap;

namespace {

GridGeometry unit_grid(int w, int h) {
  GridGeometry g;
  g.width = w;
  g.height = h;
  g.resolution = 1.0;
  return g;
}

}  // namespace

TEST(Geometry, CellOfAndCenter) {
  const auto g = geometry_for_extent(10.0, 8.0, 0.05);
  EXPECT_EQ(g.width, 200);
  EXPECT_EQ(g.height, 160);
  EXPECT_EQ(*g.cell_of({0.0, 0.0}), (CellIndex{0, 0}));
  EXPECT_EQ(*g.cell_of({9.999, 7.999}), (CellIndex{199, 159}));
  EXPECT_FALSE(g.cell_of({10.0, 1.0}).has_value());
  EXPECT_FALSE(g.cell_of({-0.01, 1.0}).has_value());
  EXPECT_NEAR(g.center({3, 4}).x, 0.175, 1e-12);
  EXPECT_EQ(g.unlinear(g.linear({17, 42})), (CellIndex{17, 42}));
}

TEST(Raycast, AxisAlignedThreeCellsFromCenter) {
  const auto g = unit_grid(10, 10);
  const CellList cells = raycast_cells(g, {2.5, 4.5, 0.0}, 0.0, 3.0);
  EXPECT_EQ(cells, (CellList{{2, 4}, {3, 4}, {4, 4}, {5, 4}}));
  const CellList up = raycast_cells(g, {2.5, 4.5, 0.0}, std::numbers::pi / 2, 3.0);
  EXPECT_EQ(up, (CellList{{2, 4}, {2, 5}, {2, 6}, {2, 7}}));
  const CellList left = raycast_cells(g, {2.5, 4.5, 0.0}, std::numbers::pi, 2.0);
  EXPECT_EQ(left, (CellList{{2, 4}, {1, 4}, {0, 4}}));
}

TEST(Raycast, DiagonalThroughCornersMatchesSupercover) {
  const auto g = unit_grid(8, 8);
  const double a = std::numbers::pi / 4;
  const CellList cells = raycast_cells(g, {0.5, 0.5, 0.0}, a, 6.0);
  EXPECT_EQ(cells, oracle::supercover(g, {0.5, 0.5}, a, 6.0));
  EXPECT_EQ(cells, (CellList{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}}));
}

TEST(Raycast, ShortStopGivesSingleCell) {
  const auto g = geometry_for_extent(4.0, 4.0, 0.05);
  EXPECT_EQ(raycast_cells(g, {1.01, 1.01, 0.0}, 0.3, 0.02).size(), 1u);
}

TEST(Raycast, TruncatesAtMapEdge) {
  const auto g = unit_grid(5, 5);
  const CellList cells = raycast_cells(g, {2.5, 2.5, 0.0}, 0.0, 100.0);
  EXPECT_EQ(cells, (CellList{{2, 2}, {3, 2}, {4, 2}}));
}

TEST(Raycast, RejectsBadInput) {
  const auto g = unit_grid(5, 5);
  EXPECT_THROW(raycast_cells(g, {-1.0, 2.0, 0.0}, 0.0, 1.0), ConfigError);
  EXPECT_THROW(raycast_cells(g, {1.0, 2.0, 0.0}, 0.0, 0.0), ConfigError);
  EXPECT_THROW(raycast_cells(g, {1.0, 2.0, 0.0}, 0.0, -1.0), ConfigError);
}

TEST(Raycast, ListIsContiguousAndStartsAtPose) {
  const auto g = geometry_for_extent(3.2, 3.2, 0.05);
  Rng rng = make_rng(11, "contiguous");
  for (int k = 0; k < 200; ++k) {
    const Pose2D p{sample_uniform(rng, 0.0, 3.2), sample_uniform(rng, 0.0, 3.2), 0.0};
    const CellList c = raycast_cells(g, p, sample_uniform(rng, -4.0, 4.0), sample_uniform(rng, 0.01, 5.0));
    ASSERT_FALSE(c.empty());
    EXPECT_EQ(c.front(), *g.cell_of({p.x, p.y}));
    for (std::size_t i = 1; i < c.size(); ++i) {
      EXPECT_LE(std::abs(c[i].ix - c[i - 1].ix), 1);
      EXPECT_LE(std::abs(c[i].iy - c[i - 1].iy), 1);
      EXPECT_NE(c[i], c[i - 1]);
    }
  }
}

TEST(Raycast, RandomRaysMatchSupercoverOracle) {
  const auto g = unit_grid(24, 24);
  Rng rng = make_rng(5, "supercover");
  for (int k = 0; k < 300; ++k) {
    const Vec2 o{sample_uniform(rng, 0.0, 24.0), sample_uniform(rng, 0.0, 24.0)};
    const double a = sample_uniform(rng, -std::numbers::pi, std::numbers::pi);
    const double stop = sample_uniform(rng, 0.1, 40.0);
    ASSERT_EQ(raycast_cells(g, {o.x, o.y, 0.0}, a, stop), oracle::supercover(g, o, a, stop)) << "ray " << k;
  }
}

TEST(Raycast, VisitorReportsIncreasingIntervals) {
  const auto g = unit_grid(10, 10);
  double last = 0.0;
  traverse_ray(g, {0.3, 0.7}, 0.4, 8.0, [&](CellIndex, double t0, double t1) {
    EXPECT_NEAR(t0, last, 1e-12);
    EXPECT_GT(t1, t0);
    last = t1;
    return true;
  });
  EXPECT_NEAR(last, 8.0, 1e-12);
}
