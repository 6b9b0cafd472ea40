#include "smilekernel/pricing.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

using namespace smilekernel;

namespace {

// r = 0: W = Delta / 8 is flat and g = sech(kappa x / 2), so
// C(x) = e^{-W T} g(x) int N(x' - x; T) payoff(S(x')) / g(x') dx'.
double heat_oracle(const QnvModel& m, const OptionContract& c, double spot) {
  const CoordinateMap map(m);
  const double t = c.maturity;
  const double x0 = map.forward(spot);
  const double k = map.kappa();
  const double w = (m.b * m.b - 4.0 * m.a * m.c) / 8.0;
  const double sd = std::sqrt(t);
  auto f = [&](double z) {
    const double x = x0 + sd * z;
    return std::exp(-0.5 * z * z) * c.payoff(map.inverse(x)) * std::cosh(0.5 * k * x);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  // Split at the strike so the kink sits on an endpoint.
  double z_k = 0.0;
  if (c.kind != PayoffKind::CustomTable) z_k = (map.forward(c.strike) - x0) / sd;
  const double lim = 40.0;
  const double integral = ts.integrate(f, -lim, z_k) + ts.integrate(f, z_k, lim);
  return std::exp(-w * t) / std::cosh(0.5 * k * x0) * integral / std::sqrt(2.0 * M_PI);
}

double bachelier_call(double s, double k, double vol, double t) {
  const boost::math::normal nd;
  const double v = vol * std::sqrt(t);
  const double d = (s - k) / v;
  return (s - k) * boost::math::cdf(nd, d) + v * boost::math::pdf(nd, d);
}

const QnvModel kUnit{1.0, 0.0, -1.0, 0.0};
const QnvModel kShifted{2.0, -6.0, 4.0, 0.0};

}  // namespace

TEST(Payoff, Shapes) {
  EXPECT_DOUBLE_EQ(OptionContract::call(1.0, 1.0).payoff(1.5), 0.5);
  EXPECT_DOUBLE_EQ(OptionContract::call(1.0, 1.0).payoff(0.5), 0.0);
  EXPECT_DOUBLE_EQ(OptionContract::put(1.0, 1.0).payoff(0.25), 0.75);
  EXPECT_DOUBLE_EQ(OptionContract::digital(1.0, 1.0).payoff(1.0), 0.5);
  EXPECT_DOUBLE_EQ(OptionContract::digital(1.0, 1.0).payoff(1.0 + 1e-15), 1.0);
  const auto tab = OptionContract::custom({{0.0, 0.0}, {1.0, 2.0}, {2.0, 2.0}}, 1.0);
  EXPECT_DOUBLE_EQ(tab.payoff(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(tab.payoff(0.25), 0.5);
  EXPECT_DOUBLE_EQ(tab.payoff(5.0), 2.0);
  EXPECT_THROW(OptionContract::custom({{1.0, 0.0}, {0.5, 1.0}}, 1.0), std::invalid_argument);
  EXPECT_THROW(OptionContract::custom({{0.0, INFINITY}}, 1.0), std::invalid_argument);
  EXPECT_THROW(OptionContract::call(0.0, -1.0).validate(), std::invalid_argument);
}

TEST(Payoff, TransformUndoesGauge) {
  const CoordinateMap map(kUnit);
  const auto grid = default_grid(map, 10.0, 401);
  const auto c = OptionContract::call(0.1, 1.0);
  const auto psi = transform_payoff(c, kUnit, grid);
  const auto lng = map.gauge_log(grid);
  for (std::size_t i = 0; i < grid.size(); i += 20) {
    EXPECT_NEAR(psi[i] * std::exp(lng[i]), c.payoff(map.inverse(grid[i])), 1e-12);
  }
}

TEST(Spots, DefaultSpacing) {
  const auto s = default_spots(kShifted);
  ASSERT_EQ(s.size(), 21u);
  EXPECT_NEAR(s.front(), 1.0 + 1.0 / 22.0, 1e-15);
  EXPECT_NEAR(s[10], 1.5, 1e-15);
  EXPECT_NEAR(mid_strike(kShifted), 1.5, 1e-15);
}

TEST(Spectral, ClosedFormMatchesHeatOracle) {
  for (const auto& m : {kUnit, kShifted}) {
    const auto spots = default_spots(m);
    const double k = mid_strike(m);
    for (double t : {0.5, 2.0}) {
      for (const auto& c : {OptionContract::call(k, t), OptionContract::put(k, t), OptionContract::digital(k, t)}) {
        const auto res = price_spectral(m, c, spots);
        EXPECT_EQ(res.path, "closed-form");
        for (std::size_t i = 0; i < spots.size(); i += 4) {
          EXPECT_NEAR(res.prices[i], heat_oracle(m, c, spots[i]), 2e-5)
              << "a=" << m.a << " T=" << t << " " << to_string(c.kind) << " S=" << spots[i];
        }
      }
    }
  }
}

TEST(Spectral, KnownCallValue) {
  // r = 0 call at the origin of the unit model.
  const auto res = price_spectral(kUnit, OptionContract::call(0.0, 1.0), {0.2});
  EXPECT_NEAR(res.prices[0], heat_oracle(kUnit, OptionContract::call(0.0, 1.0), 0.2), 1e-5);
  EXPECT_NEAR(res.prices[0], 0.44622, 5e-5);
}

TEST(Spectral, PartsAddUp) {
  for (double r : {0.0, 0.03}) {
    const QnvModel m{1.0, 0.0, -1.0, r};
    const auto res = price_spectral(m, OptionContract::call(0.0, 1.0), default_spots(m));
    for (std::size_t i = 0; i < res.spots.size(); ++i) {
      EXPECT_NEAR(res.bound_part[i] + res.continuum_part[i] + res.boundary_part[i], res.prices[i], 1e-13);
    }
  }
}

TEST(Spectral, UnitBondAndZeroClaim) {
  for (double r : {0.0, 0.03}) {
    const QnvModel m{1.0, 0.0, -1.0, r};
    const auto spots = default_spots(m);
    const auto bond = price_spectral(m, OptionContract::unit_bond(1.5), spots);
    const auto zero = price_spectral(m, OptionContract::custom({{0.0, 0.0}}, 1.5), spots);
    for (std::size_t i = 0; i < spots.size(); ++i) {
      EXPECT_NEAR(bond.prices[i], std::exp(-r * 1.5), 1e-6) << "r=" << r << " S=" << spots[i];
      EXPECT_EQ(zero.prices[i], 0.0);
    }
  }
}

TEST(Spectral, PutCallParity) {
  // S is a martingale when r = 0 and the absorbed value is the root itself.
  const auto spots = default_spots(kShifted);
  const double k = 1.4;
  const auto c = price_spectral(kShifted, OptionContract::call(k, 1.0), spots);
  const auto p = price_spectral(kShifted, OptionContract::put(k, 1.0), spots);
  for (std::size_t i = 0; i < spots.size(); ++i) EXPECT_NEAR(c.prices[i] - p.prices[i], spots[i] - k, 1e-6);
}

TEST(Spectral, AbsorptionBreaksForwardWhenRatesPositive) {
  // With r > 0 the absorbed root earns nothing, so C - P < S - K e^{-rT}.
  const QnvModel m{2.0, -6.0, 4.0, 0.03};
  const auto spots = default_spots(m);
  const double k = 1.4;
  const auto c = price_spectral(m, OptionContract::call(k, 1.0), spots);
  const auto p = price_spectral(m, OptionContract::put(k, 1.0), spots);
  const auto fc = price_crank_nicolson(m, OptionContract::call(k, 1.0), spots);
  const auto fp = price_crank_nicolson(m, OptionContract::put(k, 1.0), spots);
  // The forward minus bond S - K, priced directly by the PDE.
  const auto fwd = price_crank_nicolson(m, OptionContract::custom({{1.0, 1.0 - k}, {2.0, 2.0 - k}}, 1.0), spots);
  for (std::size_t i = 0; i < spots.size(); ++i) {
    EXPECT_LT(c.prices[i] - p.prices[i], spots[i] - k * std::exp(-m.r));
    EXPECT_NEAR(c.prices[i] - p.prices[i], fwd.prices[i], 1e-4);
  }
}

TEST(Spectral, ContinuousInMaturity) {
  for (double r : {0.0, 0.03}) {
    const QnvModel m{2.0, -6.0, 4.0, r};
    const auto spots = default_spots(m);
    for (double t : {0.5, 2.0}) {
      for (const auto& [c0, c1] : {std::pair{OptionContract::call(1.5, t), OptionContract::call(1.5, t + 1e-4)},
                                   std::pair{OptionContract::digital(1.5, t), OptionContract::digital(1.5, t + 1e-4)}}) {
        const auto p0 = price_spectral(m, c0, spots);
        const auto p1 = price_spectral(m, c1, spots);
        for (std::size_t i = 0; i < spots.size(); ++i) EXPECT_LT(std::abs(p1.prices[i] - p0.prices[i]), 1e-2);
      }
    }
  }
}

TEST(Spectral, VanishingCallSupport) {
  const auto spots = default_spots(kUnit);
  double prev = INFINITY;
  for (double eps : {0.2, 0.05, 0.01}) {
    const auto res = price_spectral(kUnit, OptionContract::call(1.0 - eps, 1.0), spots);
    const double top = *std::max_element(res.prices.begin(), res.prices.end());
    // The payoff never exceeds eps and r = 0.
    EXPECT_LE(top, eps);
    EXPECT_LT(top, prev);
    prev = top;
  }
  const auto outside = price_spectral(kUnit, OptionContract::call(1.5, 1.0), {0.0});
  EXPECT_FALSE(outside.warnings.empty());
}

TEST(Spectral, NumericalPathMatchesCrankNicolson) {
  const QnvModel m{1.0, 0.0, -1.0, 0.03};
  const auto spots = default_spots(m);
  for (const auto& c : {OptionContract::call(0.0, 1.0), OptionContract::digital(0.0, 1.0)}) {
    const auto s = price_spectral(m, c, spots);
    const auto f = price_crank_nicolson(m, c, spots);
    EXPECT_EQ(s.path, "numerical-grid");
    for (std::size_t i = 0; i < spots.size(); ++i) EXPECT_NEAR(s.prices[i], f.prices[i], 5e-4);
  }
}

TEST(Spectral, ForcedNumericalAgreesWithClosedForm) {
  SpectralConfig cfg;
  cfg.force_numerical = true;
  const auto spots = default_spots(kUnit);
  const auto c = OptionContract::call(0.0, 1.0);
  const auto num = price_spectral(kUnit, c, spots, cfg);
  const auto cf = price_spectral(kUnit, c, spots);
  EXPECT_EQ(num.path, "numerical-grid");
  for (std::size_t i = 0; i < spots.size(); ++i) EXPECT_NEAR(num.prices[i], cf.prices[i], 1e-4);
}

TEST(Spectral, MonotoneInStrikeAndSpot) {
  const auto spots = default_spots(kUnit);
  std::vector<double> prev;
  for (double k : {-0.5, -0.2, 0.0, 0.3, 0.6}) {
    const auto res = price_spectral(kUnit, OptionContract::call(k, 1.0), spots);
    for (std::size_t i = 1; i < spots.size(); ++i) EXPECT_GT(res.prices[i], res.prices[i - 1]);
    if (!prev.empty()) {
      for (std::size_t i = 0; i < spots.size(); ++i) EXPECT_LE(res.prices[i], prev[i] + 1e-6);
    }
    prev = res.prices;
  }
}

TEST(Spectral, ShortMaturityApproachesPayoff) {
  const auto c0 = OptionContract::call(0.0, 0.0);
  const std::vector<double> spots{-0.6, 0.6};
  const auto at0 = price_spectral(kUnit, c0, spots);
  EXPECT_EQ(at0.path, "terminal");
  EXPECT_DOUBLE_EQ(at0.prices[1], 0.6);
  const auto small = price_spectral(kUnit, OptionContract::call(0.0, 0.01), spots);
  EXPECT_NEAR(small.prices[0], 0.0, 1e-6);
  EXPECT_NEAR(small.prices[1], 0.6, 1e-6);
}

TEST(Spectral, RejectsBadInput) {
  EXPECT_THROW(price_spectral(kUnit, OptionContract::call(0.0, 1.0), {1.0}), std::domain_error);
  EXPECT_THROW(price_spectral(kUnit, OptionContract::call(0.0, 1.0), {-1.5}), std::domain_error);
  EXPECT_THROW(price_spectral(QnvModel{1.0, 0.0, 1.0, 0.0}, OptionContract::call(0.0, 1.0), {0.0}),
               std::domain_error);
}

TEST(CrankNicolson, BachelierMatchesFormula) {
  const QnvModel m{0.0, 0.0, 0.2, 0.0};
  const auto res = price_crank_nicolson(m, OptionContract::call(1.0, 1.0), {0.9, 1.0, 1.1});
  EXPECT_EQ(res.path, "far-field");
  EXPECT_NEAR(res.prices[1], 0.0797885, 1e-6);
  EXPECT_NEAR(res.prices[0], bachelier_call(0.9, 1.0, 0.2, 1.0), 1e-6);
  EXPECT_NEAR(res.prices[2], bachelier_call(1.1, 1.0, 0.2, 1.0), 1e-6);
}

TEST(CrankNicolson, BondDiscounts) {
  const QnvModel m{1.0, 0.0, -1.0, 0.05};
  const auto res = price_crank_nicolson(m, OptionContract::unit_bond(2.0), default_spots(m));
  for (double p : res.prices) EXPECT_NEAR(p, std::exp(-0.1), 1e-8);
}

TEST(CrankNicolson, MatchesHeatOracle) {
  const auto spots = default_spots(kShifted);
  const auto c = OptionContract::put(1.5, 1.0);
  const auto res = price_crank_nicolson(kShifted, c, spots);
  for (std::size_t i = 0; i < spots.size(); i += 5) EXPECT_NEAR(res.prices[i], heat_oracle(kShifted, c, spots[i]), 2e-5);
}

TEST(CrankNicolson, StepHalvingCheckThrows) {
  CrankNicolsonConfig cfg;
  cfg.time_steps = 3;
  cfg.rannacher_steps = 0;
  cfg.tolerance = 1e-9;
  EXPECT_THROW(price_crank_nicolson(kUnit, OptionContract::digital(0.0, 1.0), {0.0, 0.1}, cfg), std::runtime_error);
}

TEST(MonteCarlo, DegenerateClaimsHaveNoNoise) {
  MonteCarloConfig cfg;
  cfg.paths = 2000;
  const auto bond = price_monte_carlo(kUnit, OptionContract::unit_bond(1.0), {0.3}, cfg);
  EXPECT_DOUBLE_EQ(bond.prices[0], 1.0);
  EXPECT_DOUBLE_EQ(bond.std_error[0], 0.0);
  const auto zero = price_monte_carlo(kUnit, OptionContract::custom({{0.0, 0.0}}, 1.0), {0.3}, cfg);
  EXPECT_DOUBLE_EQ(zero.prices[0], 0.0);
  EXPECT_DOUBLE_EQ(zero.std_error[0], 0.0);
}

TEST(MonteCarlo, WithinStandardErrors) {
  MonteCarloConfig cfg;
  cfg.paths = 20000;
  const std::vector<OptionContract> cs{OptionContract::call(0.0, 0.5), OptionContract::digital(0.0, 0.5)};
  const auto res = price_monte_carlo(kUnit, cs, {-0.3, 0.4}, cfg);
  for (std::size_t j = 0; j < cs.size(); ++j) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double ref = heat_oracle(kUnit, cs[j], res[j].spots[i]);
      EXPECT_LT(std::abs(res[j].prices[i] - ref), 4.0 * res[j].std_error[i]);
    }
  }
}

TEST(MonteCarlo, AgreesWithSpectralReference) {
  MonteCarloConfig cfg;
  cfg.paths = 100000;
  const auto c = OptionContract::call(0.0, 1.0);
  const auto mc = price_monte_carlo(kUnit, c, {0.2}, cfg);
  const auto sp = price_spectral(kUnit, c, {0.2});
  EXPECT_LT(std::abs(mc.prices[0] - sp.prices[0]), 3.0 * mc.std_error[0]);
}

TEST(MonteCarlo, Reproducible) {
  MonteCarloConfig cfg;
  cfg.paths = 5000;
  const auto c = OptionContract::call(0.0, 0.5);
  const auto a = price_monte_carlo(kUnit, c, {0.1}, cfg);
  const auto b = price_monte_carlo(kUnit, c, {0.1}, cfg);
  EXPECT_EQ(a.prices[0], b.prices[0]);
  cfg.seed += 1;
  const auto d = price_monte_carlo(kUnit, c, {0.1}, cfg);
  EXPECT_NE(a.prices[0], d.prices[0]);
}

TEST(PriceResult, CsvColumns) {
  const auto res = price_spectral(kUnit, OptionContract::call(0.0, 1.0), {0.0, 0.2});
  std::ostringstream os;
  res.write_csv(os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "spot,price,method,bound,continuum,boundary,std_error,error_estimate");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}
