#pragma once

// Lamperti coordinate x = int dS / sigma(S) for the hyperbolic regime, the drift
// nu(x) of the unit-diffusion process, the gauge function g with ln g = -int nu,
// and the effective potential W = (nu^2 + nu') / 2 of H = -d^2/dx^2 / 2 + W.
//
// Orientation: sigma is taken as |a| (S_u - S)(S - S_l), positive between the
// roots. The sign of a only flips the Brownian increment, so prices depend on
// |a| alone.

#include "smilekernel/io/csv.hpp"
#include "smilekernel/model.hpp"
#include "smilekernel/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace smilekernel {

/// Raised when a grid is too coarse for a requested accuracy check.
class resolution_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CoordinateMap {
 public:
  explicit CoordinateMap(const QnvModel& m) : model_(m) {
    const RootPair r = roots(m);
    lower_ = r.lower;
    upper_ = r.upper;
    width_ = upper_ - lower_;
    abs_a_ = std::abs(m.a);
    kappa_ = abs_a_ * width_;
  }

  [[nodiscard]] const QnvModel& model() const noexcept { return model_; }
  [[nodiscard]] double lower() const noexcept { return lower_; }
  [[nodiscard]] double upper() const noexcept { return upper_; }
  [[nodiscard]] double width() const noexcept { return width_; }
  /// |a| (S_u - S_l), the rate of the logistic map S(x).
  [[nodiscard]] double kappa() const noexcept { return kappa_; }
  /// Natural length scale 1/kappa of the x-coordinate.
  [[nodiscard]] double alpha_guess() const noexcept { return 1.0 / kappa_; }

  /// Volatility in the positive orientation, as a function of S.
  [[nodiscard]] double sigma_of_s(double s) const noexcept {
    return abs_a_ * (upper_ - s) * (s - lower_);
  }

  [[nodiscard]] double forward(double s) const {
    if (!(s > lower_ && s < upper_)) {
      std::ostringstream os;
      os.precision(17);
      os << "lamperti_forward: S = " << s << " outside (" << lower_ << ", " << upper_ << ")";
      throw std::domain_error(os.str());
    }
    return std::log((s - lower_) / (upper_ - s)) / kappa_;
  }

  [[nodiscard]] double inverse(double x) const noexcept { return lower_ + dist_lower(x); }

  /// S(x) - S_l, accurate as S approaches the lower root.
  [[nodiscard]] double dist_lower(double x) const noexcept {
    return width_ / (1.0 + std::exp(-kappa_ * x));
  }
  /// S_u - S(x), accurate as S approaches the upper root.
  [[nodiscard]] double dist_upper(double x) const noexcept {
    return width_ / (1.0 + std::exp(kappa_ * x));
  }

  /// sigma(S(x)) = |a| D^2 / (4 cosh^2(kappa x / 2)).
  [[nodiscard]] double sigma(double x) const noexcept {
    const double ch = std::cosh(0.5 * kappa_ * x);
    return abs_a_ * width_ * width_ / (4.0 * ch * ch);
  }

  /// dsigma/dS at S(x).
  [[nodiscard]] double sigma_prime(double x) const noexcept {
    return -abs_a_ * width_ * std::tanh(0.5 * kappa_ * x);
  }

  /// nu(x) = r S / sigma - sigma' / 2.
  [[nodiscard]] double nu(double x) const {
    const double vol = -0.5 * sigma_prime(x);
    if (model_.r == 0.0) return vol;
    const double ch = std::cosh(0.5 * kappa_ * x);
    const double v = model_.r * inverse(x) * 4.0 * ch * ch / (abs_a_ * width_ * width_) + vol;
    if (!std::isfinite(v)) overflow("drift_nu", x);
    return v;
  }

  /// dnu/dx = r + 2 r S sinh(kappa x) / D + |a| sigma.
  [[nodiscard]] double nu_prime(double x) const {
    const double base = abs_a_ * sigma(x);
    if (model_.r == 0.0) return base;
    const double v =
        model_.r + 2.0 * model_.r * inverse(x) * std::sinh(kappa_ * x) / width_ + base;
    if (!std::isfinite(v)) overflow("drift_nu_prime", x);
    return v;
  }

  /// Effective potential (nu^2 + nu') / 2.
  [[nodiscard]] double potential(double x) const {
    const double n = nu(x);
    return 0.5 * (n * n + nu_prime(x));
  }

  /// ln g(x) = -int_0^x nu by adaptive quadrature, g(0) = 1.
  [[nodiscard]] double gauge_log(double x) const {
    if (x == 0.0) return 0.0;
    const IntegrationResult res =
        integrate_adaptive([this](double y) { return nu(y); }, 0.0, x, 1e-13, 1e-13);
    if (!res.converged) {
      std::ostringstream os;
      os << "gauge_log: quadrature did not converge at x = " << x << " (error estimate "
         << res.error << ")";
      throw std::runtime_error(os.str());
    }
    return -res.value;
  }

  /// ln g on every node of a grid by accumulating segment integrals from x = 0.
  [[nodiscard]] std::vector<double> gauge_log(const UniformGrid& grid) const {
    const std::size_t n = grid.size();
    std::vector<double> out(n, 0.0);
    auto segment = [this](double a, double b) {
      const IntegrationResult res =
          integrate_adaptive([this](double y) { return nu(y); }, a, b, 1e-15, 1e-14);
      if (!res.converged) throw std::runtime_error("gauge_log: segment quadrature did not converge");
      return res.value;
    };
    // Anchor on the node nearest 0, then march outwards.
    const std::size_t i0 = grid.nearest(0.0);
    out[i0] = -segment(0.0, grid[i0]);
    for (std::size_t i = i0 + 1; i < n; ++i) out[i] = out[i - 1] - segment(grid[i - 1], grid[i]);
    for (std::size_t i = i0; i-- > 0;) out[i] = out[i + 1] - segment(grid[i + 1], grid[i]);
    return out;
  }

 private:
  [[noreturn]] static void overflow(const char* who, double x) {
    std::ostringstream os;
    os << who << ": overflow at x = " << x << " (sigma vanishes at the roots)";
    throw std::overflow_error(os.str());
  }

  QnvModel model_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  double width_ = 0.0;
  double abs_a_ = 0.0;
  double kappa_ = 0.0;
};

inline double lamperti_forward(const QnvModel& m, double s) { return CoordinateMap(m).forward(s); }
inline double lamperti_inverse(const QnvModel& m, double x) { return CoordinateMap(m).inverse(x); }
inline double drift_nu(const QnvModel& m, double x) { return CoordinateMap(m).nu(x); }
inline double gauge_log(const QnvModel& m, double x) { return CoordinateMap(m).gauge_log(x); }

/// Fitted V0 - lambda (lambda + 1) / (2 alpha^2) sech^2(x / alpha).
struct PoschlTellerFit {
  double lambda = 0.0;
  double alpha = 1.0;
  double v0 = 0.0;
  /// max |fit - W| over the grid; infinite when the fit failed.
  double residual = std::numeric_limits<double>::infinity();
  /// residual < 1e-8 max|W| and the well strength is real.
  bool exact = false;

  [[nodiscard]] double depth() const noexcept { return lambda * (lambda + 1.0) / (2.0 * alpha * alpha); }
  [[nodiscard]] double operator()(double x) const noexcept {
    const double s = 1.0 / std::cosh(x / alpha);
    return v0 - depth() * s * s;
  }
};

struct PotentialProfile {
  UniformGrid grid;
  std::vector<double> values;     // W
  std::vector<double> drift;      // nu (empty for synthetic profiles)
  std::vector<double> gauge_log;  // ln g (empty for synthetic profiles)
  /// Scale used to seed and, for a flat potential, to report the fit.
  double alpha_guess = 1.0;
  std::optional<PoschlTellerFit> pt_fit;
  /// Evaluates W off-grid; numerical spectra resample through this.
  std::function<double(double)> evaluate;
  /// Largest relative deviation between analytic nu' and central differences.
  double derivative_check = 0.0;

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  void write_csv(std::ostream& os) const {
    io::CsvWriter csv(os);
    csv.header({"x", "nu", "lng", "W"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      csv.cell(grid[i])
          .cell(drift.empty() ? nan : drift[i])
          .cell(gauge_log.empty() ? nan : gauge_log[i])
          .cell(values[i])
          .end_row();
    }
  }
};

/// Default working grid: |x| <= 20 alpha_guess with 4001 nodes.
inline UniformGrid default_grid(const CoordinateMap& map, double half_width_mult = 20.0,
                                std::size_t nodes = 4001) {
  return UniformGrid::symmetric(half_width_mult * map.alpha_guess(), nodes);
}

/// Profile of a given potential function, with no model behind it.
inline PotentialProfile synthetic_profile(std::function<double(double)> w, const UniformGrid& grid,
                                          double alpha_guess = 1.0) {
  PotentialProfile p;
  p.grid = grid;
  p.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) p.values[i] = w(grid[i]);
  p.alpha_guess = alpha_guess;
  p.evaluate = std::move(w);
  return p;
}

inline PotentialProfile poschl_teller_profile(double lambda, double alpha, double v0,
                                              const UniformGrid& grid) {
  PoschlTellerFit pt{lambda, alpha, v0, 0.0, true};
  return synthetic_profile(pt, grid, alpha);
}

/// Relative tolerance of the nu' finite-difference check in potential().
inline constexpr double derivative_check_tol = 1e-3;

/// W, nu and ln g of the model on the grid. Throws resolution_error when
/// central differences of nu on the grid disagree with the analytic nu'.
inline PotentialProfile potential(const QnvModel& m, const UniformGrid& grid) {
  const CoordinateMap map(m);
  PotentialProfile p;
  p.grid = grid;
  p.alpha_guess = map.alpha_guess();
  const std::size_t n = grid.size();
  p.values.resize(n);
  p.drift.resize(n);
  std::vector<double> dnu(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid[i];
    p.drift[i] = map.nu(x);
    dnu[i] = map.nu_prime(x);
    p.values[i] = 0.5 * (p.drift[i] * p.drift[i] + dnu[i]);
  }
  p.gauge_log = map.gauge_log(grid);
  double worst = 0.0;
  double worst_x = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double fd = (p.drift[i + 1] - p.drift[i - 1]) / (2.0 * grid.step());
    const double dev = std::abs(fd - dnu[i]) / std::max(1.0, std::abs(dnu[i]));
    if (dev > worst) {
      worst = dev;
      worst_x = grid[i];
    }
  }
  p.derivative_check = worst;
  if (worst > derivative_check_tol) {
    std::ostringstream os;
    os << "potential: grid too coarse, nu' finite-difference check deviates by " << worst
       << " at x = " << worst_x << " (step " << grid.step() << ")";
    throw resolution_error(os.str());
  }
  p.evaluate = [map](double x) { return map.potential(x); };
  return p;
}

namespace detail {

// Linear least squares of W on [1, -sech^2(x/alpha)]: returns (V0, A, sse).
inline std::array<double, 3> pt_linear_fit(const UniformGrid& grid, const std::vector<double>& w,
                                           double alpha) {
  double s00 = 0.0, s01 = 0.0, s11 = 0.0, t0 = 0.0, t1 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = 1.0 / std::cosh(grid[i] / alpha);
    const double f = -s * s;
    s00 += 1.0;
    s01 += f;
    s11 += f * f;
    t0 += w[i];
    t1 += f * w[i];
  }
  const double det = s00 * s11 - s01 * s01;
  if (!(std::abs(det) > 1e-300)) return {t0 / s00, 0.0, std::numeric_limits<double>::infinity()};
  const double v0 = (s11 * t0 - s01 * t1) / det;
  const double amp = (s00 * t1 - s01 * t0) / det;
  double sse = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = 1.0 / std::cosh(grid[i] / alpha);
    const double e = v0 - amp * s * s - w[i];
    sse += e * e;
  }
  return {v0, amp, sse};
}

}  // namespace detail

/// Least-squares fit of V0 - A sech^2(x/alpha), A = lambda (lambda+1) / (2 alpha^2).
///
/// Variable projection: a logarithmic scan over alpha with (V0, A) solved
/// linearly, refined by Levenberg-Marquardt on all three parameters.
inline PoschlTellerFit fit_poschl_teller(const PotentialProfile& profile) {
  const UniformGrid& grid = profile.grid;
  const std::vector<double>& w = profile.values;
  const std::size_t n = grid.size();
  PoschlTellerFit fit;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const PoschlTellerFit failed{nan, nan, nan};
  for (double v : w)
    if (!std::isfinite(v)) return failed;
  const double wmax = profile.max_abs();

  auto finish = [&](double v0, double amp, double alpha) {
    fit.v0 = v0;
    fit.alpha = alpha;
    const double disc = 0.25 + 2.0 * alpha * alpha * amp;
    fit.lambda = disc >= 0.0 ? -0.5 + std::sqrt(disc) : std::numeric_limits<double>::quiet_NaN();
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = 1.0 / std::cosh(grid[i] / alpha);
      res = std::max(res, std::abs(v0 - amp * s * s - w[i]));
    }
    fit.residual = res;
    fit.exact = res < 1e-8 * wmax && std::isfinite(fit.lambda);
    return fit;
  };

  // Flat potential: the well has zero strength and alpha is irrelevant.
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(n);
  {
    double spread = 0.0;
    for (double v : w) spread = std::max(spread, std::abs(v - mean));
    if (spread <= 1e-12 * std::max(1.0, wmax)) return finish(mean, 0.0, profile.alpha_guess);
  }

  const double span = std::max(std::abs(grid.lo()), std::abs(grid.hi()));
  const double alpha_lo = 2.0 * grid.step();
  const double alpha_hi = span;
  constexpr int scan = 240;
  double best_alpha = profile.alpha_guess;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= scan; ++k) {
    const double alpha = alpha_lo * std::pow(alpha_hi / alpha_lo, static_cast<double>(k) / scan);
    const auto r = detail::pt_linear_fit(grid, w, alpha);
    if (r[2] < best_sse) {
      best_sse = r[2];
      best_alpha = alpha;
    }
  }
  auto lin = detail::pt_linear_fit(grid, w, best_alpha);
  double p[3] = {lin[0], lin[1], std::log(best_alpha)};  // V0, A, ln alpha

  auto sse_of = [&](const double* q) {
    const double alpha = std::exp(q[2]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sh = 1.0 / std::cosh(grid[i] / alpha);
      const double e = q[0] - q[1] * sh * sh - w[i];
      s += e * e;
    }
    return s;
  };

  double sse = sse_of(p);
  double mu = 1e-3;
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    // Normal equations J^T J dp = -J^T e.
    double jtj[3][3] = {};
    double jte[3] = {};
    const double alpha = std::exp(p[2]);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = grid[i] / alpha;
      const double sh = 1.0 / std::cosh(u);
      const double s2 = sh * sh;
      const double e = p[0] - p[1] * s2 - w[i];
      // d(sech^2 u)/d ln alpha = 2 u tanh(u) sech^2(u)
      const double j[3] = {1.0, -s2, -p[1] * 2.0 * u * std::tanh(u) * s2};
      for (int r = 0; r < 3; ++r) {
        jte[r] += j[r] * e;
        for (int c = 0; c < 3; ++c) jtj[r][c] += j[r] * j[c];
      }
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 30 && !stepped; ++attempt) {
      double m[3][4];
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r][c] = jtj[r][c] + (r == c ? mu * jtj[r][r] + 1e-300 : 0.0);
        m[r][3] = -jte[r];
      }
      // Gaussian elimination with partial pivoting.
      bool singular = false;
      for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
          if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (std::abs(m[piv][c]) < 1e-300) {
          singular = true;
          break;
        }
        for (int k = 0; k < 4; ++k) std::swap(m[c][k], m[piv][k]);
        for (int r = c + 1; r < 3; ++r) {
          const double f = m[r][c] / m[c][c];
          for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
        }
      }
      if (singular) {
        mu *= 10.0;
        continue;
      }
      double dp[3];
      for (int r = 2; r >= 0; --r) {
        double s = m[r][3];
        for (int k = r + 1; k < 3; ++k) s -= m[r][k] * dp[k];
        dp[r] = s / m[r][r];
      }
      const double trial[3] = {p[0] + dp[0], p[1] + dp[1], std::clamp(p[2] + dp[2], -50.0, 50.0)};
      const double trial_sse = sse_of(trial);
      if (std::isfinite(trial_sse) && trial_sse <= sse) {
        const double rel = (sse - trial_sse) / std::max(sse, 1e-300);
        const double step = std::abs(dp[0]) + std::abs(dp[1]) + std::abs(dp[2]);
        std::copy(trial, trial + 3, p);
        sse = trial_sse;
        mu = std::max(mu * 0.3, 1e-12);
        stepped = true;
        if (rel < 1e-15 || step < 1e-14 * (1.0 + std::abs(p[0]) + std::abs(p[1]))) converged = true;
      } else {
        mu *= 10.0;
      }
    }
    if (!stepped || sse == 0.0) converged = true;
    if (converged) break;
  }
  if (!converged || !std::isfinite(sse)) return failed;
  if (std::abs(p[1]) <= 1e-12 * std::max(1.0, wmax)) return finish(mean, 0.0, profile.alpha_guess);
  return finish(p[0], p[1], std::exp(p[2]));
}

}  // namespace smilekernel
