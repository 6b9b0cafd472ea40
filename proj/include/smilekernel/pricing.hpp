#pragma once

// European claims under dS = r S dt + sigma(S) dW.
//
// Spectral path: with v(S, tau) = e^{r tau} C and v = g psi in the Lamperti
// coordinate, psi solves d psi / d tau = -H psi and
//   C(S, 0) = e^{-rT} g(x) (e^{-HT} psi_0)(x),   psi_0 = payoff(S(x)) / g(x).
// The roots are absorbing: v equals the payoff at the root there. When the
// potential is an exact Poschl-Teller well the closed-form spectrum is used on
// the whole line; otherwise the grid spectrum on a domain truncated where g
// leaves [e^-18, e^600], with the wall values lifted out by the stationary
// solution H psi_s = 0, psi_s = payoff(root) / g at the walls.
//
// Oracles: Crank-Nicolson in (S, tau) and an Euler scheme in x.

#include "smilekernel/geometry.hpp"
#include "smilekernel/io/csv.hpp"
#include "smilekernel/kernel.hpp"
#include "smilekernel/model.hpp"
#include "smilekernel/quadrature.hpp"
#include "smilekernel/spectral.hpp"
#include "smilekernel/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smilekernel {

enum class PayoffKind { Call, Put, DigitalCall, CustomTable };

inline std::string_view to_string(PayoffKind k) noexcept {
  switch (k) {
    case PayoffKind::Call: return "call";
    case PayoffKind::Put: return "put";
    case PayoffKind::DigitalCall: return "digital";
    case PayoffKind::CustomTable: return "table";
  }
  return "?";
}

struct OptionContract {
  PayoffKind kind = PayoffKind::Call;
  double strike = 0.0;
  double maturity = 1.0;
  /// (S, payoff) nodes, ascending in S; linear in between, flat outside.
  std::vector<std::pair<double, double>> table;

  static OptionContract call(double k, double t) { return {PayoffKind::Call, k, t, {}}; }
  static OptionContract put(double k, double t) { return {PayoffKind::Put, k, t, {}}; }
  static OptionContract digital(double k, double t) { return {PayoffKind::DigitalCall, k, t, {}}; }
  /// Pays 1 in every state.
  static OptionContract unit_bond(double t) { return {PayoffKind::CustomTable, 0.0, t, {{0.0, 1.0}}}; }
  static OptionContract custom(std::vector<std::pair<double, double>> nodes, double t) {
    OptionContract c{PayoffKind::CustomTable, 0.0, t, std::move(nodes)};
    c.validate();
    return c;
  }

  void validate() const {
    if (!(maturity >= 0.0) || !std::isfinite(maturity)) throw std::invalid_argument("OptionContract: maturity must be >= 0");
    if (!std::isfinite(strike)) throw std::invalid_argument("OptionContract: non-finite strike");
    if (kind == PayoffKind::CustomTable) {
      if (table.empty()) throw std::invalid_argument("OptionContract: empty payoff table");
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (!std::isfinite(table[i].first) || !std::isfinite(table[i].second)) {
          throw std::invalid_argument("OptionContract: non-finite payoff table entry");
        }
        if (i > 0 && !(table[i].first > table[i - 1].first)) {
          throw std::invalid_argument("OptionContract: payoff table must be strictly ascending in S");
        }
      }
    }
  }

  [[nodiscard]] double payoff(double s) const {
    switch (kind) {
      case PayoffKind::Call: return std::max(s - strike, 0.0);
      case PayoffKind::Put: return std::max(strike - s, 0.0);
      case PayoffKind::DigitalCall: return s > strike ? 1.0 : (s == strike ? 0.5 : 0.0);
      case PayoffKind::CustomTable: {
        if (s <= table.front().first) return table.front().second;
        if (s >= table.back().first) return table.back().second;
        const auto it = std::upper_bound(table.begin(), table.end(), s,
                                         [](double v, const auto& p) { return v < p.first; });
        const auto& [s1, p1] = *it;
        const auto& [s0, p0] = *(it - 1);
        return p0 + (p1 - p0) * (s - s0) / (s1 - s0);
      }
    }
    return 0.0;
  }
};

enum class PricingMethod { Spectral, CrankNicolson, MonteCarlo };

inline std::string_view to_string(PricingMethod m) noexcept {
  switch (m) {
    case PricingMethod::Spectral: return "spectral";
    case PricingMethod::CrankNicolson: return "crank_nicolson";
    case PricingMethod::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

struct PriceResult {
  PricingMethod method = PricingMethod::Spectral;
  std::vector<double> spots;
  std::vector<double> prices;
  // Spectral: price = bound_part + continuum_part + boundary_part.
  std::vector<double> bound_part;
  std::vector<double> continuum_part;
  std::vector<double> boundary_part;
  // Monte Carlo standard errors; Crank-Nicolson step-halving change.
  std::vector<double> std_error;
  std::vector<double> error_estimate;
  /// "closed-form", "numerical-grid", "terminal", ...
  std::string path;
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;

  void write_csv(std::ostream& os) const {
    io::CsvWriter csv(os);
    csv.header({"spot", "price", "method", "bound", "continuum", "boundary", "std_error", "error_estimate"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto at = [&](const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : nan; };
    for (std::size_t i = 0; i < spots.size(); ++i) {
      csv.cell(spots[i])
          .cell(prices[i])
          .cell(to_string(method))
          .cell(at(bound_part, i))
          .cell(at(continuum_part, i))
          .cell(at(boundary_part, i))
          .cell(at(std_error, i))
          .cell(at(error_estimate, i))
          .end_row();
    }
  }
};

/// 21 equally spaced spots strictly inside (S_l, S_u).
inline std::vector<double> default_spots(const QnvModel& m, int count = 21) {
  const RootPair r = roots(m);
  std::vector<double> s(static_cast<std::size_t>(count));
  const double d = r.upper - r.lower;
  for (int j = 1; j <= count; ++j) s[static_cast<std::size_t>(j - 1)] = r.lower + j * d / (count + 1);
  return s;
}

/// Midpoint of the root interval.
inline double mid_strike(const QnvModel& m) {
  const RootPair r = roots(m);
  return 0.5 * (r.lower + r.upper);
}

/// psi_0(x) = payoff(S(x)) / g(x) on the grid.
inline std::vector<double> transform_payoff(const OptionContract& contract, const QnvModel& m,
                                            const UniformGrid& grid) {
  contract.validate();
  const CoordinateMap map(m);
  for (double root : {map.lower(), map.upper()}) {
    if (!std::isfinite(contract.payoff(root))) {
      std::ostringstream os;
      os << "transform_payoff: payoff unbounded at the root S = " << root;
      throw std::domain_error(os.str());
    }
  }
  const auto lng = map.gauge_log(grid);
  std::vector<double> psi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    psi[i] = contract.payoff(map.inverse(grid[i])) * std::exp(-lng[i]);
    if (!std::isfinite(psi[i])) {
      std::ostringstream os;
      os << "transform_payoff: transformed payoff overflows at x = " << grid[i] << " (ln g = " << lng[i] << ")";
      throw std::domain_error(os.str());
    }
  }
  return psi;
}

struct SpectralConfig {
  double grid_halfwidth_mult = 20.0;  // in units of alpha_guess = 1 / (|a| (S_u - S_l))
  std::size_t grid_nodes = 4001;
  KQuadratureSpec k_quadrature{};
  /// Drop continuum nodes with e^{-(E_k - V0) T} below e^{-k_damping}.
  double k_damping = 46.0;
  /// Truncation bounds on ln g for the numerical path.
  double lng_floor = -18.0;
  double lng_ceiling = 600.0;
  /// Keep grid states with E <= E_min + energy_window / T.
  double energy_window = 46.0;
  bool force_numerical = false;
};

namespace detail {

inline void check_spots(const CoordinateMap& map, const std::vector<double>& spots) {
  for (double s : spots) {
    if (!(s > map.lower() && s < map.upper())) {
      std::ostringstream os;
      os << "spot " << s << " outside (" << map.lower() << ", " << map.upper() << ")";
      throw std::domain_error(os.str());
    }
  }
}

inline PriceResult terminal_prices(PricingMethod method, const OptionContract& c, const std::vector<double>& spots) {
  PriceResult r;
  r.method = method;
  r.path = "terminal";
  r.spots = spots;
  for (double s : spots) r.prices.push_back(c.payoff(s));
  r.bound_part.assign(spots.size(), 0.0);
  r.continuum_part = r.prices;
  r.boundary_part.assign(spots.size(), 0.0);
  return r;
}

}  // namespace detail

namespace detail {

struct SpectralParts {
  std::vector<double> bound, continuum, boundary;
  std::vector<std::string> warnings;
};

// Kernel application on `grid`, read off at the spots. psi_s is the wall lift
// (empty on the whole line).
inline SpectralParts spectral_parts(const CoordinateMap& map, const OptionContract& contract, double disc,
                                    std::shared_ptr<const SpectralDecomposition> spectrum, const UniformGrid& grid,
                                    const std::vector<double>& lng, const std::vector<double>& psi_s,
                                    const std::vector<double>& spots) {
  const std::size_t n = grid.size();
  std::vector<double> psi0(n);
  for (std::size_t i = 0; i < n; ++i) {
    psi0[i] = contract.payoff(map.inverse(grid[i])) * std::exp(-lng[i]);
    if (!psi_s.empty()) psi0[i] -= psi_s[i];
  }
  KernelOptions kopt;
  auto [smin, smax] = std::minmax_element(spots.begin(), spots.end());
  kopt.tail_region = std::pair{map.forward(*smin), map.forward(*smax)};
  const PricingKernel kernel(std::move(spectrum), contract.maturity, grid, kopt);
  const KernelApplication out = kernel.apply_detailed(psi0);
  std::vector<double> cb(n), cc(n), cs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double gd = disc * std::exp(lng[i]);
    cb[i] = gd * out.bound[i];
    cc[i] = gd * out.continuum[i];
    if (!psi_s.empty()) cs[i] = gd * psi_s[i];
  }
  SpectralParts p;
  p.warnings = out.warnings;
  for (double s : spots) {
    const double x = map.forward(s);
    p.bound.push_back(interpolate_cubic(grid, cb, x));
    p.continuum.push_back(interpolate_cubic(grid, cc, x));
    p.boundary.push_back(interpolate_cubic(grid, cs, x));
  }
  return p;
}

// Grid spectrum and wall lift on `grid`, absorbed values at the walls.
inline SpectralParts numerical_parts(const CoordinateMap& map, const OptionContract& contract, double disc,
                                     const UniformGrid& grid, const SpectralConfig& cfg,
                                     const std::vector<double>& spots) {
  const std::size_t n = grid.size();
  const double t = contract.maturity;
  const auto lng = map.gauge_log(grid);
  const double psi_lo = contract.payoff(map.lower()) * std::exp(-lng.front());
  const double psi_hi = contract.payoff(map.upper()) * std::exp(-lng.back());
  // H psi_s = 0 inside, psi_s = wall values.
  const double h = grid.step();
  const std::size_t ni = n - 2;
  std::vector<double> sub(ni, -0.5 / (h * h)), sup(ni, -0.5 / (h * h)), diag(ni), rhs(ni, 0.0);
  for (std::size_t i = 0; i < ni; ++i) diag[i] = 1.0 / (h * h) + map.potential(grid[i + 1]);
  rhs.front() += psi_lo * 0.5 / (h * h);
  rhs.back() += psi_hi * 0.5 / (h * h);
  const auto inner = thomas_solve(sub, diag, sup, rhs);
  std::vector<double> psi_s(n);
  psi_s.front() = psi_lo;
  psi_s.back() = psi_hi;
  std::copy(inner.begin(), inner.end(), psi_s.begin() + 1);

  const PotentialProfile profile =
      synthetic_profile([map](double x) { return map.potential(x); }, grid, map.alpha_guess());
  NumericalSpectrumOptions opt;
  opt.extrapolate = false;
  // Two passes: the window is measured from the lowest level.
  opt.energy_cap = *std::min_element(profile.values.begin(), profile.values.end()) + cfg.energy_window / t;
  auto dec = numerical_spectrum(profile, n, {grid.lo(), grid.hi()}, opt);
  if (dec.states.empty()) throw std::runtime_error("price_spectral: no grid states below the energy cap");
  opt.energy_cap = dec.states.front().energy + cfg.energy_window / t;
  opt.check_resolution = false;
  dec = numerical_spectrum(profile, n, {grid.lo(), grid.hi()}, opt);
  return spectral_parts(map, contract, disc, std::make_shared<const SpectralDecomposition>(std::move(dec)), grid,
                        lng, psi_s, spots);
}

}  // namespace detail

/// Spectral price C(S, 0) at the given spots.
/// Largest x-interval around 0, on the nodes of `work`, on which ln g stays
/// inside [lng_floor, lng_ceiling].
inline std::pair<double, double> truncated_domain(const UniformGrid& work, const PotentialProfile& profile,
                                                  const SpectralConfig& cfg = {}) {
  const auto& lng = profile.gauge_log;
  auto inside = [&](std::size_t i) { return lng[i] >= cfg.lng_floor && lng[i] <= cfg.lng_ceiling; };
  const std::size_t i0 = work.nearest(0.0);
  std::size_t hi = i0, lo = i0;
  while (hi + 1 < work.size() && inside(hi + 1)) ++hi;
  while (lo > 0 && inside(lo - 1)) --lo;
  if (hi - lo < 10) throw std::domain_error("truncated_domain: no nodes inside the ln g bounds");
  return {work[lo], work[hi]};
}

inline PriceResult price_spectral(const QnvModel& m, const OptionContract& contract,
                                  const std::vector<double>& spots, const SpectralConfig& cfg = {}) {
  contract.validate();
  const CoordinateMap map(m);
  detail::check_spots(map, spots);
  for (double root : {map.lower(), map.upper()}) {
    if (!std::isfinite(contract.payoff(root))) throw std::domain_error("price_spectral: payoff unbounded at a root");
  }
  if (contract.maturity == 0.0) return detail::terminal_prices(PricingMethod::Spectral, contract, spots);
  const double t = contract.maturity;
  const double disc = std::exp(-m.r * t);

  const UniformGrid work = default_grid(map, cfg.grid_halfwidth_mult, cfg.grid_nodes);
  PotentialProfile profile = potential(m, work);
  const PoschlTellerFit fit = fit_poschl_teller(profile);

  PriceResult res;
  res.method = PricingMethod::Spectral;
  res.spots = spots;
  res.fit_residual = fit.residual;
  detail::SpectralParts parts;

  if (fit.exact && !cfg.force_numerical) {
    res.path = "closed-form";
    KQuadratureSpec kq = cfg.k_quadrature;
    // e^{-k^2 T / (2 alpha^2)} < e^{-k_damping} beyond this k.
    kq.kmax_mult = std::min(kq.kmax_mult, fit.alpha * std::sqrt(2.0 * cfg.k_damping / t));
    auto spectrum = std::make_shared<const SpectralDecomposition>(
        closed_form_spectrum({fit.lambda, fit.alpha, fit.v0}, kq));
    parts = detail::spectral_parts(map, contract, disc, std::move(spectrum), work, profile.gauge_log, {}, spots);
  } else {
    res.path = "numerical-grid";
    const auto [xlo, xhi] = truncated_domain(work, profile, cfg);
    for (double s : spots) {
      const double x = map.forward(s);
      if (x <= xlo || x >= xhi) throw std::domain_error("price_spectral: spot outside the truncated domain");
    }
    // The stencil error is O(h^2): extrapolate from n and 2n - 1 nodes.
    const auto coarse = detail::numerical_parts(map, contract, disc, UniformGrid(xlo, xhi, cfg.grid_nodes), cfg, spots);
    parts = detail::numerical_parts(map, contract, disc, UniformGrid(xlo, xhi, 2 * cfg.grid_nodes - 1), cfg, spots);
    auto extrapolate = [](std::vector<double>& f, const std::vector<double>& c) {
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = (4.0 * f[i] - c[i]) / 3.0;
    };
    for (std::size_t i = 0; i < spots.size(); ++i) {
      res.error_estimate.push_back(std::abs(parts.bound[i] + parts.continuum[i] + parts.boundary[i] -
                                            coarse.bound[i] - coarse.continuum[i] - coarse.boundary[i]) / 3.0);
    }
    extrapolate(parts.bound, coarse.bound);
    extrapolate(parts.continuum, coarse.continuum);
    extrapolate(parts.boundary, coarse.boundary);
  }

  res.warnings = parts.warnings;
  if (contract.kind != PayoffKind::CustomTable && !(contract.strike > map.lower() && contract.strike < map.upper())) {
    std::ostringstream os;
    os << "strike " << contract.strike << " outside (" << map.lower() << ", " << map.upper() << ")";
    res.warnings.push_back(os.str());
  }
  res.bound_part = parts.bound;
  res.continuum_part = parts.continuum;
  res.boundary_part = parts.boundary;
  for (std::size_t i = 0; i < spots.size(); ++i) res.prices.push_back(parts.bound[i] + parts.continuum[i] + parts.boundary[i]);
  return res;
}

struct CrankNicolsonConfig {
  /// Uniform S-grid intervals; a multiple of 22 puts the default spots and
  /// the mid-strike on nodes.
  std::size_t intervals = 22 * 200;
  std::size_t time_steps = 1000;
  /// Fully implicit half-steps at the start (Rannacher smoothing).
  int rannacher_steps = 4;
  /// Step-halving self-check: throw if the change exceeds 10x this.
  double tolerance = 1e-5;
  bool richardson_check = true;
  /// Far-field half-width in units of sigma(spot) sqrt(T) for non-hyperbolic models.
  double far_field_mult = 10.0;
};

namespace detail {

// One Crank-Nicolson solve on a fixed grid; returns values at grid nodes.
inline std::vector<double> cn_solve(const QnvModel& m, const OptionContract& c, const UniformGrid& grid,
                                    std::size_t steps, int rannacher) {
  const std::size_t n = grid.size();
  const double h = grid.step();
  const double t = c.maturity;
  const double dt_full = t / static_cast<double>(steps);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = c.payoff(grid[i]);
  const double pay_lo = c.payoff(grid.lo());
  const double pay_hi = c.payoff(grid.hi());

  // L v = A v_SS + B v_S - r v with exponentially fitted diffusion.
  std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double s = grid[i];
    const double sig = m.polynomial(s);
    const double a = 0.5 * sig * sig;
    const double b = m.r * s;
    double a_fit = a;
    const double pe = b * h / (2.0 * std::max(a, 1e-300));
    if (std::abs(pe) > 1e-8) a_fit = a * pe / std::tanh(pe);
    if (a == 0.0) a_fit = 0.5 * std::abs(b) * h;
    lo[i] = a_fit / (h * h) - b / (2.0 * h);
    up[i] = a_fit / (h * h) + b / (2.0 * h);
    di[i] = -2.0 * a_fit / (h * h) - m.r;
  }

  auto step = [&](double dt, double theta, double tau_new) {
    std::vector<double> rhs(n), sl(n), sd(n), su(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double lv = lo[i] * v[i - 1] + di[i] * v[i] + up[i] * v[i + 1];
      rhs[i] = v[i] + (1.0 - theta) * dt * lv;
      sl[i] = -theta * dt * lo[i];
      sd[i] = 1.0 - theta * dt * di[i];
      su[i] = -theta * dt * up[i];
    }
    // Dirichlet: discounted payoff at the boundary nodes.
    const double df = std::exp(-m.r * tau_new);
    sd[0] = 1.0;
    su[0] = 0.0;
    rhs[0] = df * pay_lo;
    sl[n - 1] = 0.0;
    sd[n - 1] = 1.0;
    rhs[n - 1] = df * pay_hi;
    v = thomas_solve(sl, sd, su, std::move(rhs));
  };

  double tau = 0.0;
  std::size_t k = 0;
  if (rannacher > 0 && steps > static_cast<std::size_t>(rannacher) / 2) {
    const double dt = 0.5 * dt_full;
    for (int j = 0; j < rannacher; ++j) {
      tau += dt;
      step(dt, 1.0, tau);
    }
    k = static_cast<std::size_t>(rannacher / 2);
  }
  for (; k < steps; ++k) {
    tau = t * static_cast<double>(k + 1) / static_cast<double>(steps);
    step(dt_full, 0.5, tau);
  }
  return v;
}

}  // namespace detail

/// Crank-Nicolson price of the contract at the spots.
inline PriceResult price_crank_nicolson(const QnvModel& m, const OptionContract& contract,
                                        const std::vector<double>& spots, const CrankNicolsonConfig& cfg = {}) {
  contract.validate();
  m.validate();
  if (spots.empty()) throw std::invalid_argument("price_crank_nicolson: no spots");
  PriceResult res;
  res.method = PricingMethod::CrankNicolson;
  if (contract.maturity == 0.0) return detail::terminal_prices(PricingMethod::CrankNicolson, contract, spots);

  const GeometryClass geo = classify(m);
  double s_lo, s_hi;
  if (geo.regime == Regime::Hyperbolic) {
    s_lo = geo.roots[0];
    s_hi = geo.roots[1];
    res.path = "absorbing-roots";
  } else {
    const auto [mn, mx] = std::minmax_element(spots.begin(), spots.end());
    double vol = 0.0;
    for (double s : spots) vol = std::max(vol, std::abs(m.polynomial(s)));
    const double reach = cfg.far_field_mult * vol * std::sqrt(contract.maturity);
    if (!(reach > 0.0)) throw std::domain_error("price_crank_nicolson: zero volatility at the spots");
    s_lo = *mn - reach;
    s_hi = *mx + reach;
    res.path = "far-field";
  }
  for (double s : spots) {
    if (!(s >= s_lo && s <= s_hi)) throw std::domain_error("price_crank_nicolson: spot outside the grid domain");
  }
  const UniformGrid grid(s_lo, s_hi, cfg.intervals + 1);
  const auto coarse = detail::cn_solve(m, contract, grid, cfg.time_steps, cfg.rannacher_steps);
  std::vector<double> fine;
  if (cfg.richardson_check) fine = detail::cn_solve(m, contract, grid, 2 * cfg.time_steps, cfg.rannacher_steps);
  const auto& best = cfg.richardson_check ? fine : coarse;

  auto at = [&](const std::vector<double>& v, double s) {
    const std::size_t j = grid.nearest(s);
    if (std::abs(grid[j] - s) <= 1e-12 * std::max(1.0, std::abs(s))) return v[j];
    return interpolate_cubic(grid, v, s);
  };
  res.spots = spots;
  for (double s : spots) {
    const double p = at(best, s);
    res.prices.push_back(p);
    if (cfg.richardson_check) {
      const double change = std::abs(p - at(coarse, s));
      res.error_estimate.push_back(change);
      if (change > 10.0 * cfg.tolerance * std::max(1.0, std::abs(p))) {
        std::ostringstream os;
        os << "price_crank_nicolson: halving the time step changes the price at S = " << s << " by " << change
           << " (tolerance " << cfg.tolerance << ")";
        throw std::runtime_error(os.str());
      }
    }
  }
  return res;
}

struct MonteCarloConfig {
  std::size_t paths = 100000;
  /// Euler steps; 0 picks ceil(T / dt_target).
  std::size_t steps = 0;
  double dt_target = 0.002;
  std::uint64_t seed = 20240601;
  std::size_t chunk = 4096;
  /// Absorb once |S - root| < absorb_rel * (S_u - S_l).
  double absorb_rel = 1e-12;
};

/// Monte Carlo prices of several contracts sharing one maturity, simulated in
/// the Lamperti coordinate (unit diffusion, drift nu). Paths that reach the
/// absorbing band pay payoff(root).
inline std::vector<PriceResult> price_monte_carlo(const QnvModel& m, const std::vector<OptionContract>& contracts,
                                                  const std::vector<double>& spots, const MonteCarloConfig& cfg = {}) {
  if (contracts.empty()) return {};
  const double t = contracts.front().maturity;
  for (const auto& c : contracts) {
    c.validate();
    if (c.maturity != t) throw std::invalid_argument("price_monte_carlo: contracts must share a maturity");
  }
  if (cfg.paths == 0 || cfg.chunk == 0) throw std::invalid_argument("price_monte_carlo: need paths and chunk > 0");
  const CoordinateMap map(m);
  detail::check_spots(map, spots);
  const std::size_t nc = contracts.size();
  std::vector<PriceResult> out(nc);
  for (auto& r : out) {
    r.method = PricingMethod::MonteCarlo;
    r.spots = spots;
    r.path = "euler-lamperti";
  }
  const std::size_t steps =
      cfg.steps > 0 ? cfg.steps : static_cast<std::size_t>(std::max(1.0, std::ceil(t / cfg.dt_target)));
  const double dt = t / static_cast<double>(steps);
  const double sq = std::sqrt(dt);
  const double disc = std::exp(-m.r * t);
  const double x_abs = std::log(1.0 / cfg.absorb_rel) / map.kappa();
  std::vector<double> pay_lo(nc), pay_hi(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    pay_lo[c] = contracts[c].payoff(map.lower());
    pay_hi[c] = contracts[c].payoff(map.upper());
  }

  for (std::size_t si = 0; si < spots.size(); ++si) {
    const double x0 = map.forward(spots[si]);
    // Welford accumulators per contract.
    std::vector<double> mean(nc, 0.0), m2(nc, 0.0);
    std::size_t count = 0;
    std::vector<double> pay(nc);
    for (std::size_t start = 0, chunk_id = 0; start < cfg.paths; start += cfg.chunk, ++chunk_id) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(chunk_id)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal(0.0, 1.0);
      const std::size_t end = std::min(cfg.paths, start + cfg.chunk);
      for (std::size_t p = start; p < end; ++p) {
        double x = x0;
        int absorbed = 0;
        for (std::size_t k = 0; k < steps; ++k) {
          x += map.nu(x) * dt + sq * normal(rng);
          if (x >= x_abs) {
            absorbed = 1;
            break;
          }
          if (x <= -x_abs) {
            absorbed = -1;
            break;
          }
        }
        const double s_t = absorbed == 0 ? map.inverse(x) : 0.0;
        ++count;
        for (std::size_t c = 0; c < nc; ++c) {
          pay[c] = disc * (absorbed > 0 ? pay_hi[c] : absorbed < 0 ? pay_lo[c] : contracts[c].payoff(s_t));
          const double d = pay[c] - mean[c];
          mean[c] += d / static_cast<double>(count);
          m2[c] += d * (pay[c] - mean[c]);
        }
      }
    }
    for (std::size_t c = 0; c < nc; ++c) {
      out[c].prices.push_back(mean[c]);
      const double var = count > 1 ? m2[c] / static_cast<double>(count - 1) : 0.0;
      out[c].std_error.push_back(std::sqrt(var / static_cast<double>(count)));
    }
  }
  return out;
}

inline PriceResult price_monte_carlo(const QnvModel& m, const OptionContract& contract,
                                     const std::vector<double>& spots, const MonteCarloConfig& cfg = {}) {
  return price_monte_carlo(m, std::vector<OptionContract>{contract}, spots, cfg).front();
}

}  // namespace smilekernel
