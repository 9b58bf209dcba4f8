#include "umap/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace umap {

namespace {

// Evidence is stored in units of 2^-40 per alpha tick.
constexpr double kEvidenceScale = 1099511627776.0;  // 2^40

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DataError(std::string("integrate_scan: non-finite ") + what);
  }
}

}  // namespace

LogOddsMap::LogOddsMap(const GridGeometry& geometry, double l_max)
    : geometry_(geometry), l_max_(l_max), acc_(geometry.size(), 0) {
  if (geometry.width <= 0 || geometry.height <= 0 || !(geometry.resolution > 0.0)) {
    throw ConfigError("log-odds map: empty geometry");
  }
  if (!(l_max > 0.0)) throw ConfigError("log-odds map: l_max must be positive");
}

std::int64_t alpha_ticks(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  const auto ticks = std::llround(alpha / kAlphaQuantum);
  if (ticks < 1) throw ConfigError("alpha is below the 1e-6 resolution");
  return ticks;
}

void LogOddsMap::add(CellIndex cell, double alpha, double m) {
  if (!std::isfinite(m)) throw NumericError("log-odds map: non-finite evidence");
  const auto q = static_cast<__int128>(std::llround(m * kEvidenceScale));
  acc_[geometry_.linear(cell)] += q * alpha_ticks(alpha);
}

double LogOddsMap::unclamped_log_odds(CellIndex cell) const {
  return static_cast<double>(acc_[geometry_.linear(cell)]) / kEvidenceScale / 1e6;
}

double LogOddsMap::log_odds(CellIndex cell) const {
  return std::clamp(unclamped_log_odds(cell), -l_max_, l_max_);
}

double cell_occupancy(const SplineModel& spline, double d, double y_hat, double u_hat, double o_floor) {
  const double o = occupancy_h(spline, (d - y_hat) / u_hat);
  return std::clamp(o, o_floor, 1.0 - o_floor);
}

double logit(double o) { return std::log(o / (1.0 - o)); }

double to_probability(double log_odds) { return 1.0 / (1.0 + std::exp(-log_odds)); }

void integrate_scan(LogOddsMap& map, const Pose2D& pose, std::span<const double> y_hat,
                    std::span<const double> u_hat, const SplineModel& spline, const MapperConfig& config) {
  if (y_hat.size() != u_hat.size()) throw DataError("integrate_scan: y_hat and u_hat differ in length");
  if (y_hat.empty()) throw DataError("integrate_scan: empty scan");
  require_finite(y_hat, "y_hat");
  require_finite(u_hat, "u_hat");
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.theta)) {
    throw DataError("integrate_scan: non-finite pose");
  }
  const auto& g = map.geometry();
  if (!g.contains(Vec2{pose.x, pose.y})) throw ConfigError("integrate_scan: pose outside the map");
  alpha_ticks(config.alpha);

  const Vec2 origin{pose.x, pose.y};
  const auto angles = scan_angles(pose, static_cast<int>(y_hat.size()), config.fov);
  const double m_free = logit(config.o_free);
  for (std::size_t r = 0; r < y_hat.size(); ++r) {
    const double y = y_hat[r];
    const double u = std::max(u_hat[r], kMinUncertainty);
    if (y >= config.max_range) {
      traverse_ray(g, origin, angles[r], config.max_range, [&](CellIndex c, double, double) {
        map.add(c, config.alpha, m_free);
        return true;
      });
      continue;
    }
    traverse_ray(g, origin, angles[r], y + 4.0 * u, [&](CellIndex c, double, double) {
      const double o = cell_occupancy(spline, distance(origin, g.center(c)), y, u, config.o_floor);
      map.add(c, config.alpha, logit(o));
      return true;
    });
  }
}

ProbabilityMap to_probability_map(const LogOddsMap& map) {
  ProbabilityMap out{map.geometry(), std::vector<double>(map.geometry().size())};
  for (std::size_t i = 0; i < out.p.size(); ++i) {
    const CellIndex c = out.geometry.unlinear(i);
    out.p[i] = map.observed(c) ? to_probability(map.log_odds(c)) : 0.5;
  }
  return out;
}

LogOddsMap accumulate_scans(std::span<const ScanPair> scans, const Estimator& estimator, const SplineModel& spline,
                            const GridGeometry& geometry, const MapperConfig& config) {
  LogOddsMap map(geometry, config.l_max);
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const EstimatorOutput e = estimator(scans[i], i);
    integrate_scan(map, scans[i].pose, e.y_hat, e.u_hat.values, spline, config);
  }
  return map;
}

ProbabilityMap build_uncertainty_map(std::span<const ScanPair> scans, const Estimator& estimator,
                                     const SplineModel& spline, const GridGeometry& geometry,
                                     const MapperConfig& config) {
  return to_probability_map(accumulate_scans(scans, estimator, spline, geometry, config));
}

double mean_probability(const ProbabilityMap& map, std::span<const CellIndex> cells) {
  if (cells.empty()) throw DataError("mean_probability: no cells");
  double sum = 0.0;
  for (const auto& c : cells) sum += map.at(c);
  return sum / static_cast<double>(cells.size());
}

}  // namespace umap
