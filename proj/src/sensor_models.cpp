#include "umap/sensor_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

namespace umap {

using nlohmann::json;

namespace {

void check_inputs(std::span<const double> y_hat, std::span<const double> y_true, std::span<const double> u_hat) {
  if (y_hat.size() != y_true.size() || y_hat.size() != u_hat.size()) {
    throw DataError("log-likelihood: y_hat, y_true and u_hat must have equal lengths");
  }
  for (std::size_t i = 0; i < u_hat.size(); ++i) {
    if (!(u_hat[i] > 0.0) || !std::isfinite(u_hat[i])) {
      throw DataError("log-likelihood: uncertainty at ray " + std::to_string(i) + " must be positive and finite");
    }
    if (!std::isfinite(y_hat[i]) || !std::isfinite(y_true[i])) {
      throw DataError("log-likelihood: non-finite distance at ray " + std::to_string(i));
    }
  }
}

template <typename Term>
double sum_terms(std::span<const double> y_hat, std::span<const double> y_true, std::span<const double> u_hat,
                 Term term) {
  check_inputs(y_hat, y_true, u_hat);
  double total = 0.0;
  for (std::size_t i = 0; i < y_hat.size(); ++i) total += term(y_hat[i] - y_true[i], u_hat[i]);
  return total;
}

double average_of(double total, std::size_t n) {
  if (n == 0) throw DataError("log-likelihood: cannot average over zero rays");
  return total / static_cast<double>(n);
}

// Uniform quadratic B-spline with support [0, 3].
double bspline2(double s) {
  if (s <= 0.0 || s >= 3.0) return 0.0;
  if (s < 1.0) return 0.5 * s * s;
  if (s < 2.0) return 0.5 * (-2.0 * s * s + 6.0 * s - 3.0);
  const double r = 3.0 - s;
  return 0.5 * r * r;
}

}  // namespace

double gaussian_loglik_term(double residual, double sigma) {
  return -0.5 * (std::log(2.0 * std::numbers::pi * sigma * sigma) + residual * residual / (sigma * sigma));
}

double laplace_loglik_term(double residual, double scale) {
  return -(std::log(2.0 * scale) + std::abs(residual) / scale);
}

double gaussian_loglik(std::span<const double> y_hat, std::span<const double> y_true, std::span<const double> u_hat) {
  return sum_terms(y_hat, y_true, u_hat, gaussian_loglik_term);
}

double laplace_loglik(std::span<const double> y_hat, std::span<const double> y_true, std::span<const double> u_hat) {
  return sum_terms(y_hat, y_true, u_hat, laplace_loglik_term);
}

double average_gaussian_loglik(std::span<const double> y_hat, std::span<const double> y_true,
                               std::span<const double> u_hat) {
  return average_of(gaussian_loglik(y_hat, y_true, u_hat), y_hat.size());
}

double average_laplace_loglik(std::span<const double> y_hat, std::span<const double> y_true,
                              std::span<const double> u_hat) {
  return average_of(laplace_loglik(y_hat, y_true, u_hat), y_hat.size());
}

double loglik(ModelKind kind, std::span<const double> y_hat, std::span<const double> y_true,
              std::span<const double> u_hat) {
  return kind == ModelKind::Gaussian ? gaussian_loglik(y_hat, y_true, u_hat) : laplace_loglik(y_hat, y_true, u_hat);
}

double average_loglik(ModelKind kind, std::span<const double> y_hat, std::span<const double> y_true,
                      std::span<const double> u_hat) {
  return average_of(loglik(kind, y_hat, y_true, u_hat), y_hat.size());
}

double laplace_pdf(double t) { return 0.5 * std::exp(-std::abs(t)); }

// ---------------------------------------------------------------------------
// SplineModel

SplineModel SplineModel::from_coefficients(int n_segments, std::vector<double> coefficients, FitInfo info) {
  if (n_segments < 3) throw ConfigError("spline: need at least 3 segments");
  if (coefficients.size() != static_cast<std::size_t>(n_segments - 2)) {
    throw ConfigError("spline: expected " + std::to_string(n_segments - 2) + " coefficients, got " +
                      std::to_string(coefficients.size()));
  }
  double sum = 0.0;
  for (double c : coefficients) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("spline: coefficients must be finite and nonnegative");
    sum += c;
  }
  if (!(sum > 0.0)) throw ConfigError("spline: coefficients must not all be zero");

  SplineModel m;
  m.n_segments_ = n_segments;
  m.coefficients_ = std::move(coefficients);
  m.info_ = info;
  const auto& c = m.coefficients_;
  const int basis = n_segments - 2;
  const double h = m.knot_spacing();

  m.pdf_pieces_.assign(static_cast<std::size_t>(n_segments), {0.0, 0.0, 0.0});
  m.cdf_base_.assign(static_cast<std::size_t>(n_segments), 0.0);
  double mass = 0.0;
  for (int k = 0; k < n_segments; ++k) {
    auto& a = m.pdf_pieces_[static_cast<std::size_t>(k)];
    // Basis j covers segments j, j+1, j+2 with pieces u^2/2, (-2u^2+2u+1)/2, (1-u)^2/2.
    if (k < basis) {
      a[2] += 0.5 * c[static_cast<std::size_t>(k)];
    }
    if (k - 1 >= 0 && k - 1 < basis) {
      const double w = c[static_cast<std::size_t>(k - 1)];
      a[0] += 0.5 * w;
      a[1] += w;
      a[2] -= w;
    }
    if (k - 2 >= 0 && k - 2 < basis) {
      const double w = c[static_cast<std::size_t>(k - 2)];
      a[0] += 0.5 * w;
      a[1] -= w;
      a[2] += 0.5 * w;
    }
    m.cdf_base_[static_cast<std::size_t>(k)] = mass;
    mass += h * (a[0] + a[1] / 2.0 + a[2] / 3.0);
  }
  return m;
}

double SplineModel::pdf(double t) const {
  if (!(t > -kSplineHalfSupport && t < kSplineHalfSupport)) return 0.0;
  const double h = knot_spacing();
  const double s = (t + kSplineHalfSupport) / h;
  const int k = std::min(static_cast<int>(s), n_segments_ - 1);
  const double u = s - k;
  const auto& a = pdf_pieces_[static_cast<std::size_t>(k)];
  return std::max(0.0, a[0] + u * (a[1] + u * a[2]));
}

double SplineModel::cdf(double t) const {
  if (std::isnan(t)) return t;
  if (t <= -kSplineHalfSupport) return 0.0;
  if (t >= kSplineHalfSupport) return 1.0;
  const double h = knot_spacing();
  const double s = (t + kSplineHalfSupport) / h;
  const int k = std::min(static_cast<int>(s), n_segments_ - 1);
  const double u = s - k;
  const auto& a = pdf_pieces_[static_cast<std::size_t>(k)];
  const double v = cdf_base_[static_cast<std::size_t>(k)] + h * u * (a[0] + u * (a[1] / 2.0 + u * a[2] / 3.0));
  return std::clamp(v, 0.0, 1.0);
}

std::vector<double> SplineModel::knots() const {
  std::vector<double> k(static_cast<std::size_t>(n_segments_) + 1);
  for (int i = 0; i <= n_segments_; ++i) k[static_cast<std::size_t>(i)] = -kSplineHalfSupport + i * knot_spacing();
  return k;
}

SplineModel derive_spline(int n_segments, int fit_samples) {
  if (n_segments < 8 || n_segments % 2 != 0) throw ConfigError("derive_spline: n_segments must be even and >= 8");
  if (fit_samples < 10 * n_segments) throw ConfigError("derive_spline: fit_samples must be >= 10 * n_segments");

  const int basis = n_segments - 2;
  const int half = basis / 2;
  const double h = 2.0 * kSplineHalfSupport / n_segments;

  // Mirrored parameterization: coefficient j equals coefficient basis-1-j.
  Eigen::MatrixXd A(fit_samples, half);
  Eigen::VectorXd b(fit_samples);
  for (int i = 0; i < fit_samples; ++i) {
    const double t = -kSplineHalfSupport + 2.0 * kSplineHalfSupport * i / (fit_samples - 1);
    for (int k = 0; k < half; ++k) {
      const double left = -kSplineHalfSupport + k * h;
      const double right = -kSplineHalfSupport + (basis - 1 - k) * h;
      A(i, k) = bspline2((t - left) / h) + bspline2((t - right) / h);
    }
    b(i) = laplace_pdf(t);
  }

  // Minimize |A p - b|^2 subject to g.p = 1 (unit integral) by projecting the
  // unconstrained solution onto the constraint in the metric of A^T A.
  const Eigen::MatrixXd gram = A.transpose() * A;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw NumericError("derive_spline: normal equations are singular");
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(half, 2.0 * h);
  const Eigen::VectorXd p0 = ldlt.solve(A.transpose() * b);
  const Eigen::VectorXd gi = ldlt.solve(g);
  const Eigen::VectorXd p = p0 - gi * ((g.dot(p0) - 1.0) / g.dot(gi));

  std::vector<double> coeffs(static_cast<std::size_t>(basis));
  SplineModel::FitInfo info;
  info.fit_samples = fit_samples;
  for (int k = 0; k < half; ++k) {
    double v = p(k);
    if (v < 0.0) {
      v = 0.0;
      info.clamped += 2;
    }
    coeffs[static_cast<std::size_t>(k)] = v;
    coeffs[static_cast<std::size_t>(basis - 1 - k)] = v;
  }
  double sum = 0.0;
  for (double c : coeffs) sum += c;
  if (!(sum > 0.0)) throw NumericError("derive_spline: fit collapsed to zero");
  const double scale = 1.0 / (h * sum);
  for (double& c : coeffs) c *= scale;

  SplineModel model = SplineModel::from_coefficients(n_segments, coeffs, info);

  // Midpoint rule for the L1 distance to the target density.
  constexpr int kL1Steps = 80000;
  const double dt = 2.0 * kSplineHalfSupport / kL1Steps;
  double l1 = 0.0;
  for (int i = 0; i < kL1Steps; ++i) {
    const double t = -kSplineHalfSupport + (i + 0.5) * dt;
    l1 += std::abs(model.pdf(t) - laplace_pdf(t)) * dt;
  }
  info.l1_error = l1;
  return SplineModel::from_coefficients(n_segments, std::move(coeffs), info);
}

double occupancy_h(const SplineModel& model, double t) {
  return model.cdf(t) - 0.5 * model.cdf(t - kSplineHalfSupport);
}

json spline_to_json(const SplineModel& model) {
  const auto& info = model.fit_info();
  return {{"schema", kSplineSchema},
          {"family", "quadratic_bspline"},
          {"target", "laplace(0,1)"},
          {"support", json::array({-kSplineHalfSupport, kSplineHalfSupport})},
          {"n_segments", model.segments()},
          {"knots", model.knots()},
          {"coefficients", model.coefficients()},
          {"fit", {{"samples", info.fit_samples}, {"l1_error", info.l1_error}, {"clamped", info.clamped}}}};
}

SplineModel spline_from_json(const json& j) {
  try {
    if (j.at("schema").get<int>() != kSplineSchema) throw ConfigError("spline: unsupported schema");
    SplineModel::FitInfo info;
    if (j.contains("fit")) {
      info.fit_samples = j["fit"].value("samples", 0);
      info.l1_error = j["fit"].value("l1_error", 0.0);
      info.clamped = j["fit"].value("clamped", 0);
    }
    return SplineModel::from_coefficients(j.at("n_segments").get<int>(),
                                          j.at("coefficients").get<std::vector<double>>(), info);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("spline: ") + e.what());
  }
}

void save_spline(const SplineModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << spline_to_json(model).dump(2) << '\n';
}

SplineModel load_spline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spline file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("spline " + path.string() + ": " + e.what());
  }
  return spline_from_json(j);
}

}  // namespace umap
