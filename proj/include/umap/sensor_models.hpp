#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "umap/common.hpp"

namespace umap {

/// Per-ray uncertainty: Gaussian sigma or Laplace scale, in meters.
struct UncertaintyVector {
  std::vector<double> values;
  ModelKind kind = ModelKind::Laplace;
};

// Log-likelihood of estimates y_hat around the true distances y_true, one
// independent term per ray. The plain forms return the sum; the average forms
// divide by the ray count. Throws DataError on length mismatch and on any
// non-positive or non-finite uncertainty.

double gaussian_loglik(std::span<const double> y_hat, std::span<const double> y_true, std::span<const double> u_hat);
double laplace_loglik(std::span<const double> y_hat, std::span<const double> y_true, std::span<const double> u_hat);
double average_gaussian_loglik(std::span<const double> y_hat, std::span<const double> y_true,
                               std::span<const double> u_hat);
double average_laplace_loglik(std::span<const double> y_hat, std::span<const double> y_true,
                              std::span<const double> u_hat);

double loglik(ModelKind kind, std::span<const double> y_hat, std::span<const double> y_true,
              std::span<const double> u_hat);
double average_loglik(ModelKind kind, std::span<const double> y_hat, std::span<const double> y_true,
                      std::span<const double> u_hat);

/// Single-ray terms, exposed for training code.
double gaussian_loglik_term(double residual, double sigma);
double laplace_loglik_term(double residual, double scale);

/// Half-width of the spline support: Q(t) = 0 for |t| > kSplineHalfSupport.
inline constexpr double kSplineHalfSupport = 4.0;

struct SplineFitInfo {
  int fit_samples = 0;
  /// L1 distance to the Laplace(0,1) density over [-4, 4].
  double l1_error = 0.0;
  /// Coefficients that were clamped to zero during the fit.
  int clamped = 0;
};

/// Symmetric quadratic B-spline density on [-4, 4] approximating Laplace(0, 1),
/// with its exact piecewise-cubic CDF. Uniform knots, n_segments intervals, and
/// n_segments - 2 basis functions that all vanish at the support ends, so the
/// density is C1 everywhere including at +-4.
class SplineModel {
 public:
  using FitInfo = SplineFitInfo;

  /// Builds the piecewise polynomials from basis coefficients. Throws
  /// ConfigError unless there are n_segments - 2 finite, nonnegative
  /// coefficients with a positive sum.
  static SplineModel from_coefficients(int n_segments, std::vector<double> coefficients, FitInfo info = {});

  double pdf(double t) const;
  double cdf(double t) const;

  int segments() const { return n_segments_; }
  double knot_spacing() const { return 2.0 * kSplineHalfSupport / n_segments_; }
  std::vector<double> knots() const;
  const std::vector<double>& coefficients() const { return coefficients_; }
  const FitInfo& fit_info() const { return info_; }

 private:
  int n_segments_ = 0;
  std::vector<double> coefficients_;
  // Density on segment k as a0 + a1*u + a2*u^2 with u in [0, 1].
  std::vector<std::array<double, 3>> pdf_pieces_;
  // CDF at the left end of every segment.
  std::vector<double> cdf_base_;
  FitInfo info_;
};

/// Least-squares fit of the symmetric spline to the Laplace(0,1) density at
/// `fit_samples` uniform points over [-4, 4], constrained to unit integral.
/// Negative coefficients are clamped and the result rescaled to unit mass.
/// Requires an even n_segments >= 8 and fit_samples >= 10 * n_segments.
SplineModel derive_spline(int n_segments = 16, int fit_samples = 4001);

inline double spline_pdf(const SplineModel& model, double t) { return model.pdf(t); }
inline double spline_cdf(const SplineModel& model, double t) { return model.cdf(t); }

/// Per-ray occupancy of a cell at normalized signed distance t = (d - y_hat) / u_hat
/// from the estimated surface, with a fully occupied band of thickness 4 u_hat:
/// H(t) = Qcdf(t) - Qcdf(t - 4) / 2.
double occupancy_h(const SplineModel& model, double t);

/// Laplace(0,1) density; the target the spline approximates.
double laplace_pdf(double t);

inline constexpr int kSplineSchema = 1;

nlohmann::json spline_to_json(const SplineModel& model);
SplineModel spline_from_json(const nlohmann::json& j);
void save_spline(const SplineModel& model, const std::filesystem::path& path);
SplineModel load_spline(const std::filesystem::path& path);

}  // namespace umap
