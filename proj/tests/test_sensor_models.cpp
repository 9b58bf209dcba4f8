#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "umap/sensor_models.hpp"

using namespace umap;

TEST(Likelihood, SpotValues) {
  EXPECT_NEAR(gaussian_loglik_term(0.0, 1.0), -0.918939, 1e-6);
  EXPECT_NEAR(gaussian_loglik_term(1.0, 1.0), -1.418939, 1e-6);
  EXPECT_NEAR(laplace_loglik_term(0.0, 1.0), -0.693147, 1e-6);
  EXPECT_NEAR(laplace_loglik_term(2.0, 0.5), -4.0, 1e-12);
  EXPECT_NEAR(laplace_loglik_term(-2.0, 2.0), -2.386294, 1e-6);
}

TEST(Likelihood, SumIsAdditiveAverageDivides) {
  const std::vector<double> yh{1.0, 2.0, 3.5};
  const std::vector<double> yt{1.1, 1.7, 3.5};
  const std::vector<double> u{0.1, 0.2, 0.3};
  double g = 0, l = 0;
  for (int i = 0; i < 3; ++i) {
    g += gaussian_loglik_term(yh[i] - yt[i], u[i]);
    l += laplace_loglik_term(yh[i] - yt[i], u[i]);
  }
  EXPECT_NEAR(gaussian_loglik(yh, yt, u), g, 1e-12);
  EXPECT_NEAR(laplace_loglik(yh, yt, u), l, 1e-12);
  EXPECT_NEAR(average_laplace_loglik(yh, yt, u), l / 3, 1e-12);
  EXPECT_NEAR(average_loglik(ModelKind::Gaussian, yh, yt, u), g / 3, 1e-12);
  const std::vector<double> a{1.0}, b{2.0}, c{0.4};
  EXPECT_NEAR(laplace_loglik(yh, yt, u) + laplace_loglik(a, b, c),
              laplace_loglik(std::vector<double>{1.0, 2.0, 3.5, 1.0}, std::vector<double>{1.1, 1.7, 3.5, 2.0},
                             std::vector<double>{0.1, 0.2, 0.3, 0.4}),
              1e-12);
}

TEST(Likelihood, MaximizerMatchesResidual) {
  for (double r : {0.05, 0.3, 1.7}) {
    const double b = oracle::golden_max([&](double s) { return laplace_loglik_term(r, s); }, 1e-3, 5.0);
    const double s = oracle::golden_max([&](double s) { return gaussian_loglik_term(r, s); }, 1e-3, 5.0);
    EXPECT_NEAR(b, r, 1e-6);
    EXPECT_NEAR(s, r, 1e-6);
  }
}

TEST(Likelihood, RejectsBadInput) {
  const std::vector<double> a{1.0, 2.0}, b{1.0}, zero{0.0, 1.0}, nan{std::nan(""), 1.0};
  EXPECT_THROW(gaussian_loglik(a, b, a), DataError);
  EXPECT_THROW(laplace_loglik(a, a, zero), DataError);
  EXPECT_THROW(laplace_loglik(a, a, nan), DataError);
  const std::vector<double> empty;
  EXPECT_THROW(average_laplace_loglik(empty, empty, empty), DataError);
}

class SplineTest : public ::testing::Test {
 protected:
  static const SplineModel& spline() {
    static const SplineModel s = derive_spline();
    return s;
  }
};

TEST_F(SplineTest, UnitMassAndSupport) {
  const auto& s = spline();
  EXPECT_NEAR(oracle::simpson([&](double t) { return s.pdf(t); }, -4.0, 4.0, 1600), 1.0, 1e-9);
  EXPECT_EQ(s.pdf(-4.0), 0.0);
  EXPECT_EQ(s.pdf(4.5), 0.0);
  EXPECT_EQ(s.cdf(-4.1), 0.0);
  EXPECT_EQ(s.cdf(4.1), 1.0);
  for (double t = -4.0; t <= 4.0; t += 0.01) EXPECT_GE(s.pdf(t), 0.0);
}

TEST_F(SplineTest, SymmetricAndCentred) {
  const auto& s = spline();
  for (double t = 0.0; t <= 4.0; t += 0.037) {
    EXPECT_NEAR(s.pdf(t), s.pdf(-t), 1e-12);
    EXPECT_NEAR(s.cdf(t) + s.cdf(-t), 1.0, 1e-12);
  }
  EXPECT_NEAR(s.cdf(0.0), 0.5, 1e-12);
}

TEST_F(SplineTest, CloseToLaplace) {
  const auto& s = spline();
  const double l1 = oracle::simpson([&](double t) { return std::abs(s.pdf(t) - laplace_pdf(t)); }, -4.0, 4.0, 16000);
  EXPECT_LT(l1, 0.08);
  EXPECT_NEAR(l1, s.fit_info().l1_error, 1e-3);
}

TEST_F(SplineTest, CdfMatchesQuadrature) {
  const auto& s = spline();
  for (int i = 0; i < 100; ++i) {
    const double t = -4.0 + 8.0 * (i + 0.5) / 100.0;
    const double q = oracle::simpson([&](double x) { return s.pdf(x); }, -4.0, t, 4000);
    EXPECT_NEAR(s.cdf(t), q, 1e-8) << t;
  }
}

TEST_F(SplineTest, OccupancyShape) {
  const auto& s = spline();
  EXPECT_EQ(occupancy_h(s, -4.0), 0.0);
  EXPECT_NEAR(occupancy_h(s, 0.0), 0.5, 1e-12);
  EXPECT_NEAR(occupancy_h(s, 9.0), 0.5, 1e-12);
  double best = 0.0;
  for (double t = -5.0; t <= 9.0; t += 0.001) {
    const double h = occupancy_h(s, t);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0);
    best = std::max(best, h);
  }
  EXPECT_GT(best, 0.9);
  EXPECT_NEAR(occupancy_h(s, 2.0), s.cdf(2.0) - 0.5 * s.cdf(-2.0), 1e-15);
}

TEST_F(SplineTest, JsonRoundTrip) {
  const auto& s = spline();
  const SplineModel back = spline_from_json(spline_to_json(s));
  EXPECT_EQ(back.coefficients(), s.coefficients());
  for (double t = -4.2; t < 4.2; t += 0.13) EXPECT_EQ(back.cdf(t), s.cdf(t));
}

TEST(Spline, RejectsBadCoefficients) {
  EXPECT_THROW(SplineModel::from_coefficients(16, std::vector<double>(13, 1.0)), ConfigError);
  EXPECT_THROW(SplineModel::from_coefficients(16, std::vector<double>(14, 0.0)), ConfigError);
  std::vector<double> c(14, 1.0);
  c[3] = -1.0;
  EXPECT_THROW(SplineModel::from_coefficients(16, c), ConfigError);
  EXPECT_THROW(derive_spline(7), ConfigError);
}
