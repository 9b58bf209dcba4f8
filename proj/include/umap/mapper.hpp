#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "umap/estimators.hpp"
#include "umap/grid.hpp"
#include "umap/sensor_models.hpp"

namespace umap {

struct MapperConfig {
  double alpha = 0.01;
  double max_range = 15.0;
  /// Occupancy is clamped to [o_floor, 1 - o_floor] before the logit.
  double o_floor = 1e-3;
  /// Occupancy written along rays that returned nothing.
  double o_free = 0.3;
  /// Read-out clamp on accumulated log-odds.
  double l_max = 13.8;
  /// Angular layout of the scans being integrated.
  double fov = 2.0 * std::numbers::pi;
};

/// Resolution of alpha: contributions are weighted by round(alpha / kAlphaQuantum).
inline constexpr double kAlphaQuantum = 1e-6;

/// Occupancy log-odds per cell. Evidence is accumulated in fixed point so that
/// the sum is exactly independent of integration order and exactly linear in
/// alpha; the clamp to +-l_max is applied only when reading.
class LogOddsMap {
 public:
  LogOddsMap() = default;
  explicit LogOddsMap(const GridGeometry& geometry, double l_max = 13.8);

  const GridGeometry& geometry() const { return geometry_; }
  double l_max() const { return l_max_; }

  /// Adds alpha * m to the cell.
  void add(CellIndex cell, double alpha, double m);

  /// Clamped log-odds.
  double log_odds(CellIndex cell) const;
  /// Log-odds before the read-out clamp.
  double unclamped_log_odds(CellIndex cell) const;
  bool observed(CellIndex cell) const { return acc_[geometry_.linear(cell)] != 0; }

  /// Exact per-cell equality of the accumulators.
  friend bool operator==(const LogOddsMap& a, const LogOddsMap& b) {
    return a.geometry_ == b.geometry_ && a.acc_ == b.acc_;
  }

 private:
  GridGeometry geometry_;
  double l_max_ = 13.8;
  std::vector<__int128> acc_;
};

/// Integer weight of one alpha; throws ConfigError unless alpha is in (0, 1].
std::int64_t alpha_ticks(double alpha);

/// Per-cell occupancy for a cell at distance d along a ray with estimate
/// (y_hat, u_hat): H((d - y_hat) / u_hat) clamped to [o_floor, 1 - o_floor].
double cell_occupancy(const SplineModel& spline, double d, double y_hat, double u_hat, double o_floor);

double logit(double o);
/// Logistic 1 / (1 + exp(-m)).
double to_probability(double log_odds);

/// Integrates one scan into the map. Each ray is traversed to y_hat + 4 u_hat;
/// rays at max_range write only o_free. Throws DataError on length mismatch or
/// non-finite input, ConfigError if the pose is outside the map.
void integrate_scan(LogOddsMap& map, const Pose2D& pose, std::span<const double> y_hat,
                    std::span<const double> u_hat, const SplineModel& spline, const MapperConfig& config);

/// Occupancy probability per cell, row-major from cell (0,0).
struct ProbabilityMap {
  GridGeometry geometry;
  std::vector<double> p;

  double at(CellIndex c) const { return p[geometry.linear(c)]; }
};

ProbabilityMap to_probability_map(const LogOddsMap& map);

/// Estimates every scan, integrates them in order, converts to probability.
LogOddsMap accumulate_scans(std::span<const ScanPair> scans, const Estimator& estimator, const SplineModel& spline,
                            const GridGeometry& geometry, const MapperConfig& config);
ProbabilityMap build_uncertainty_map(std::span<const ScanPair> scans, const Estimator& estimator,
                                     const SplineModel& spline, const GridGeometry& geometry,
                                     const MapperConfig& config);

/// Mean probability over the cells whose centres lie in `cells`.
double mean_probability(const ProbabilityMap& map, std::span<const CellIndex> cells);

}  // namespace umap
