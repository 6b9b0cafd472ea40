#include "smilekernel/geometry.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace smilekernel {
namespace {

const QnvModel symmetric{1.0, 0.0, -1.0, 0.0};
const QnvModel shifted{2.0, -6.0, 4.0, 0.0};

// x(S) = int_{mid}^{S} dS' / sigma(S'), with |sigma| between the roots.
double lamperti_quadrature(const QnvModel& m, double s) {
  const auto r = roots(m);
  const double mid = 0.5 * (r.lower + r.upper);
  auto f = [&](double t) { return 1.0 / std::abs(m.polynomial(t)); };
  boost::math::quadrature::tanh_sinh<double> ts;
  return s >= mid ? ts.integrate(f, mid, s) : -ts.integrate(f, s, mid);
}

// ln g in closed form: with u = kappa x,
// -r / (|a| D^2 kappa) [2 S_l (u + sinh u) + D (u + e^u - 1)] - ln cosh(u / 2).
double gauge_log_closed(const QnvModel& m, double x) {
  const auto r = roots(m);
  const double d = r.upper - r.lower;
  const double kappa = std::abs(m.a) * d;
  const double u = kappa * x;
  return -m.r / (std::abs(m.a) * d * d * kappa) *
             (2.0 * r.lower * (u + std::sinh(u)) + d * (u + std::expm1(u))) -
         std::log(std::cosh(0.5 * u));
}

TEST(Lamperti, ForwardExamples) {
  EXPECT_EQ(lamperti_forward(symmetric, 0.0), 0.0);
  EXPECT_NEAR(lamperti_forward(symmetric, 0.5), 0.5 * std::log(3.0), 1e-15);
  EXPECT_NEAR(lamperti_forward(symmetric, 0.5), 0.549306, 1e-6);
  EXPECT_NEAR(lamperti_forward(shifted, 1.5), lamperti_quadrature(shifted, 1.5), 1e-14);
  for (double s : {1.01, 1.2, 1.7, 1.999}) {
    const double ref = lamperti_quadrature(shifted, s);
    EXPECT_NEAR(lamperti_forward(shifted, s), ref, 1e-8 * std::abs(ref)) << s;
  }
}

TEST(Lamperti, ForwardRejectsOutside) {
  EXPECT_THROW(lamperti_forward(symmetric, 1.0), std::domain_error);
  EXPECT_THROW(lamperti_forward(symmetric, -1.5), std::domain_error);
  EXPECT_THROW(lamperti_forward({1.0, 0.0, 1.0, 0.0}, 0.0), std::domain_error);
}

TEST(Lamperti, InverseExamples) {
  EXPECT_EQ(lamperti_inverse(symmetric, 0.0), 0.0);
  EXPECT_NEAR(lamperti_inverse(symmetric, 40.0), 1.0, 1e-15);
  EXPECT_NEAR(lamperti_inverse(symmetric, -40.0), -1.0, 1e-15);
  EXPECT_NEAR(lamperti_inverse(symmetric, 0.549306), 0.5, 1e-6);
  EXPECT_NEAR(lamperti_inverse(symmetric, 0.7), std::tanh(0.7), 1e-15);
  const CoordinateMap map(symmetric);
  EXPECT_NEAR(map.dist_upper(20.0), 2.0 / (1.0 + std::exp(40.0)), 1e-30);
}

TEST(Lamperti, RoundTripRandom) {
  std::mt19937_64 rng(5);
  for (const auto& m : {symmetric, shifted, QnvModel{-0.7, 0.5, 1.1, 0.02}}) {
    const CoordinateMap map(m);
    std::uniform_real_distribution<double> u(map.lower(), map.upper());
    double prev_x = -1e300;
    std::vector<double> s(1000);
    for (auto& v : s) v = u(rng);
    std::sort(s.begin(), s.end());
    for (double v : s) {
      if (v <= map.lower() || v >= map.upper()) continue;
      const double x = map.forward(v);
      EXPECT_LT(std::abs(map.inverse(x) - v), 1e-10 * std::max(1.0, std::abs(v)));
      EXPECT_GE(x, prev_x);  // strictly increasing up to ties in the sample
      prev_x = x;
    }
  }
}

TEST(Drift, Examples) {
  EXPECT_EQ(drift_nu(symmetric, 0.0), 0.0);
  // sigma = 1 - S^2 > 0 on (-1, 1), sigma' = -2S, S(x) = tanh x.
  EXPECT_NEAR(drift_nu(symmetric, 1.0), std::tanh(1.0), 1e-15);
  EXPECT_EQ(drift_nu({1.0, 0.0, -1.0, 0.05}, 0.0), 0.0);
}

TEST(Drift, OverflowGuarded) {
  const CoordinateMap map({1.0, 0.0, -1.0, 0.05});
  EXPECT_THROW((void)map.nu(800.0), std::overflow_error);
  EXPECT_NO_THROW((void)CoordinateMap(symmetric).nu(800.0));
}

TEST(Drift, DerivativeMatchesFiniteDifferences) {
  for (const auto& m : {symmetric, shifted, QnvModel{1.0, 0.0, -1.0, 0.03},
                        QnvModel{2.0, -6.0, 4.0, 0.03}, QnvModel{-0.7, 0.5, 1.1, 0.02}}) {
    const CoordinateMap map(m);
    const double h = 1e-5;
    for (double x = -4.0; x <= 4.0; x += 0.25) {
      const double fd = (map.nu(x + h) - map.nu(x - h)) / (2.0 * h);
      EXPECT_NEAR(fd, map.nu_prime(x), 1e-6 * std::max(1.0, std::abs(fd))) << x;
    }
  }
}

TEST(Gauge, Examples) {
  EXPECT_EQ(gauge_log(shifted, 0.0), 0.0);
  EXPECT_NEAR(gauge_log(symmetric, 1.0), -std::log(std::cosh(1.0)), 1e-13);
  for (double x : {0.3, 1.7, 5.0}) EXPECT_NEAR(gauge_log(symmetric, x), gauge_log(symmetric, -x), 1e-13);
}

TEST(Gauge, ClosedFormAndDerivative) {
  for (const auto& m : {QnvModel{1.0, 0.0, -1.0, 0.03}, QnvModel{2.0, -6.0, 4.0, 0.05},
                        QnvModel{-0.7, 0.5, 1.1, 0.02}}) {
    const CoordinateMap map(m);
    for (double x : {-3.0, -1.0, 0.4, 2.5}) {
      const double lg = map.gauge_log(x);
      const double ref = gauge_log_closed(m, x);
      EXPECT_NEAR(lg, ref, 1e-11 * std::max(1.0, std::abs(ref))) << x;
      const double h = 1e-4;
      const double fd = (map.gauge_log(x + h) - map.gauge_log(x - h)) / (2.0 * h);
      EXPECT_NEAR(fd, -map.nu(x), 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Gauge, GridAccumulationMatchesPointwise) {
  const QnvModel m{2.0, -6.0, 4.0, 0.03};
  const auto grid = UniformGrid::symmetric(5.0, 401);
  const auto lg = CoordinateMap(m).gauge_log(grid);
  for (std::size_t i = 0; i < grid.size(); i += 50) {
    const double ref = gauge_log_closed(m, grid[i]);
    EXPECT_NEAR(lg[i], ref, 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Potential, SymmetricModelIsFlat) {
  // nu = tanh x, nu' = sech^2 x, so W = (tanh^2 + sech^2) / 2 = 1/2.
  const auto p = potential(symmetric, UniformGrid::symmetric(10.0, 4001));
  for (double w : p.values) EXPECT_NEAR(w, 0.5, 1e-14);
  EXPECT_NEAR(p.values.front(), 0.5, 1e-14);
}

TEST(Potential, ZeroRateIsDiscriminantOverEight) {
  for (const auto& m : {shifted, QnvModel{-0.7, 0.5, 1.1, 0.0}}) {
    const auto p = potential(m, default_grid(CoordinateMap(m)));
    const double delta = classify(m).discriminant;
    for (double w : p.values) EXPECT_NEAR(w, delta / 8.0, 1e-12 * delta);
  }
}

TEST(Potential, AnalyticVersusCentralDifferenceAtOrigin) {
  const CoordinateMap map(shifted);
  const double h = 1e-4;
  const double fd = (map.nu(h) - map.nu(-h)) / (2.0 * h);
  const double w_fd = 0.5 * (map.nu(0.0) * map.nu(0.0) + fd);
  EXPECT_NEAR(map.potential(0.0), w_fd, 1e-7);
}

TEST(Potential, EvenForSymmetricZeroRate) {
  const QnvModel m{0.8, 0.0, -0.45, 0.0};
  const auto p = potential(m, UniformGrid::symmetric(12.0, 2001));
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    EXPECT_NEAR(p.values[i], p.values[p.values.size() - 1 - i], 1e-12);
  }
}

TEST(Potential, CoarseGridRejected) {
  const QnvModel m{1.0, 0.0, -1.0, 0.0};
  EXPECT_THROW(potential(m, UniformGrid::symmetric(10.0, 201)), resolution_error);
  EXPECT_NO_THROW(potential(m, UniformGrid::symmetric(10.0, 4001)));
}

TEST(Potential, CsvColumns) {
  const auto p = potential(symmetric, UniformGrid::symmetric(1.0, 401));
  std::ostringstream os;
  p.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,nu,lng,W");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 401);
}

TEST(Fit, SyntheticPoschlTellerRecovered) {
  const auto grid = UniformGrid::symmetric(14.0, 4001);
  const auto fit = fit_poschl_teller(poschl_teller_profile(2.5, 0.7, 0.0, grid));
  EXPECT_NEAR(fit.lambda, 2.5, 1e-9);
  EXPECT_NEAR(fit.alpha, 0.7, 1e-9);
  EXPECT_NEAR(fit.v0, 0.0, 1e-9);
  EXPECT_TRUE(fit.exact);
  EXPECT_GE(fit.residual, 0.0);
}

TEST(Fit, SyntheticWithOffset) {
  const auto grid = UniformGrid::symmetric(20.0, 4001);
  for (double lam : {0.5, 1.0, 1.8, 3.2}) {
    const auto fit = fit_poschl_teller(poschl_teller_profile(lam, 1.3, 0.25, grid));
    EXPECT_NEAR(fit.lambda, lam, 1e-9);
    EXPECT_NEAR(fit.alpha, 1.3, 1e-9);
    EXPECT_NEAR(fit.v0, 0.25, 1e-9);
  }
}

TEST(Fit, SymmetricModelIsFreeParticle) {
  const auto profile = potential(symmetric, default_grid(CoordinateMap(symmetric)));
  const auto fit = fit_poschl_teller(profile);
  EXPECT_EQ(fit.lambda, 0.0);
  EXPECT_NEAR(fit.v0, 0.5, 1e-14);
  EXPECT_DOUBLE_EQ(fit.alpha, 0.5);
  EXPECT_LT(fit.residual, 1e-10);
  EXPECT_TRUE(fit.exact);
}

TEST(Fit, PositiveRateNotExact) {
  const QnvModel m{1.0, 0.0, -1.0, 0.05};
  const auto profile = potential(m, default_grid(CoordinateMap(m)));
  const auto fit = fit_poschl_teller(profile);
  EXPECT_GE(fit.residual, 0.0);
  EXPECT_FALSE(fit.exact);
  EXPECT_GT(fit.residual, 1e-8 * profile.max_abs());
}

TEST(Fit, NonFiniteInputFails) {
  auto p = poschl_teller_profile(1.0, 1.0, 0.0, UniformGrid::symmetric(5.0, 101));
  p.values[3] = NAN;
  const auto fit = fit_poschl_teller(p);
  EXPECT_TRUE(std::isinf(fit.residual));
  EXPECT_TRUE(std::isnan(fit.lambda));
  EXPECT_FALSE(fit.exact);
}

}  // namespace
}  // namespace smilekernel
