#pragma once

// Spectral decompositions of H = -d^2/dx^2 / 2 + W.
//
// Closed form, for W = V0 - lambda (lambda+1) / (2 alpha^2) sech^2(x/alpha):
// with y = x/alpha the bound states are Ferrers functions
// P_lambda^{-(lambda-n)}(tanh y) at E_n = V0 - (lambda-n)^2 / (2 alpha^2), and
// the scattering states are built from
//   u_k(y) = e^{iky} 2F1(lambda+1, -lambda; 1-ik; 1/(1+e^{2y})),   y >= 0,
// which tends to e^{iky} as y -> +inf. Even and odd real combinations of
// Re u and Im u are continued to y < 0 by parity and scaled to asymptotic
// amplitude 1/sqrt(pi), so that int_0^inf dk sum_parity phi phi' = delta.
//
// Numerical: three-point finite differences with Dirichlet walls, solved by
// a symmetric tridiagonal eigensolver.

#include "smilekernel/geometry.hpp"
#include "smilekernel/io/csv.hpp"
#include "smilekernel/quadrature.hpp"
#include "smilekernel/specfun.hpp"
#include "smilekernel/tridiagonal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smilekernel {

enum class SpectrumSource { ClosedForm, NumericalGrid };
enum class StateKind { Bound, Continuum };

inline std::string_view to_string(SpectrumSource s) noexcept {
  return s == SpectrumSource::ClosedForm ? "ClosedForm" : "NumericalGrid";
}

/// Gauss-Legendre rule on k in (0, kmax_mult] (k dimensionless, physical
/// wavenumber k / alpha).
struct KQuadratureSpec {
  double kmax_mult = 40.0;
  std::size_t nodes = 400;
};

struct PoschlTellerParams {
  double lambda = 0.0;
  double alpha = 1.0;
  double v0 = 0.0;

  [[nodiscard]] double depth() const noexcept { return lambda * (lambda + 1.0) / (2.0 * alpha * alpha); }
  [[nodiscard]] double operator()(double x) const noexcept {
    const double s = 1.0 / std::cosh(x / alpha);
    return v0 - depth() * s * s;
  }
};

struct SpectralState {
  StateKind kind = StateKind::Bound;
  int n = -1;         // quantum number of a bound state
  double k = 0.0;     // dimensionless wavenumber of a continuum state
  int parity = 0;     // +1 even, -1 odd, 0 when not tracked
  double energy = 0.0;
  double weight = 1.0;  // k-quadrature weight for closed-form continuum states
  double norm = 1.0;    // factor applied to the raw eigenfunction
  // Closed-form scattering state: phi = norm (A Re u + B Im u).
  double coef_re = 0.0;
  double coef_im = 0.0;
};

namespace detail {

inline bool near_integer(double v, double tol = 1e-9) { return std::abs(v - std::nearbyint(v)) <= tol; }

inline int closed_form_bound_count(double lambda) {
  if (!(lambda > 0.0)) return 0;
  if (near_integer(lambda)) return static_cast<int>(std::nearbyint(lambda));  // drop threshold state
  return static_cast<int>(std::floor(lambda)) + 1;
}

// Raw bound state P_lambda^{-(lambda-n)}(tanh y), any real y.
inline double bound_raw(double lambda, int n, double y) {
  const double p = specfun::legendre_p_tanh(lambda, -(lambda - n), std::abs(y));
  return (y < 0.0 && n % 2 == 1) ? -p : p;
}

struct ScatteringValue {
  std::complex<double> u;
  std::complex<double> du;  // d/dy
};

// u_k(y) for y >= 0 and optionally its derivative.
inline ScatteringValue scattering_base(double lambda, double k, double y, bool derivative) {
  using C = std::complex<double>;
  const double z = 1.0 / (1.0 + std::exp(2.0 * y));
  const C a(lambda + 1.0, 0.0), b(-lambda, 0.0), c(1.0, -k);
  const C phase = std::polar(1.0, k * y);
  const C f = specfun::hyp2f1_series<C>(a, b, c, C(z, 0.0));
  ScatteringValue v{phase * f, C(0.0, 0.0)};
  if (derivative) {
    const C fp = a * b / c * specfun::hyp2f1_series<C>(a + 1.0, b + 1.0, c + 1.0, C(z, 0.0));
    // dz/dy = -2 z (1 - z) = -sech^2(y) / 2
    v.du = C(0.0, k) * v.u + phase * fp * (-2.0 * z * (1.0 - z));
  }
  return v;
}

// Parity-adapted real scattering state at y, before the 1/sqrt(alpha) scale.
inline double scattering_eval(double lambda, const SpectralState& s, double y) {
  const auto v = scattering_base(lambda, s.k, std::abs(y), false);
  const double phi = s.coef_re * v.u.real() + s.coef_im * v.u.imag();
  return (y < 0.0 && s.parity < 0) ? -phi : phi;
}

}  // namespace detail

class SpectralDecomposition {
 public:
  SpectrumSource source = SpectrumSource::ClosedForm;
  std::vector<SpectralState> states;  // bound states (ascending) first, then continuum
  std::optional<PoschlTellerParams> params;  // closed form
  std::optional<UniformGrid> grid;           // numerical: full grid including the walls
  std::shared_ptr<const Eigen::MatrixXd> vectors;  // numerical: phi_m at grid nodes, column m
  /// Asymptotic potential level separating bound from continuum states.
  double threshold = 0.0;

  [[nodiscard]] std::size_t bound_count() const noexcept {
    std::size_t c = 0;
    for (const auto& s : states) c += s.kind == StateKind::Bound;
    return c;
  }

  [[nodiscard]] std::vector<double> bound_energies() const {
    std::vector<double> e;
    for (const auto& s : states)
      if (s.kind == StateKind::Bound) e.push_back(s.energy);
    return e;
  }

  /// phi_m(x), normalized in x units.
  [[nodiscard]] double value(std::size_t m, double x) const {
    const SpectralState& s = states.at(m);
    if (source == SpectrumSource::NumericalGrid) {
      if (x < grid->lo() || x > grid->hi()) return 0.0;
      return interpolate_cubic(*grid, vectors->col(static_cast<Eigen::Index>(m)).data(), x);
    }
    const double y = x / params->alpha;
    if (s.kind == StateKind::Bound) return s.norm * detail::bound_raw(params->lambda, s.n, y);
    return s.norm * detail::scattering_eval(params->lambda, s, y);
  }

  /// Matrix of phi_m(x_i): rows are grid nodes, columns are states.
  [[nodiscard]] Eigen::MatrixXd sample(const UniformGrid& g) const {
    const auto n = static_cast<Eigen::Index>(g.size());
    const auto m = static_cast<Eigen::Index>(states.size());
    Eigen::MatrixXd out(n, m);
    if (source == SpectrumSource::NumericalGrid) {
      if (g.size() == grid->size() && g.lo() == grid->lo() && g.hi() == grid->hi()) return *vectors;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double* column = vectors->col(j).data();
        for (Eigen::Index i = 0; i < n; ++i) {
          const double x = g[static_cast<std::size_t>(i)];
          out(i, j) = (x < grid->lo() || x > grid->hi()) ? 0.0 : interpolate_cubic(*grid, column, x);
        }
      }
      return out;
    }
    // Closed form: evaluate on |x| once and mirror when the grid is symmetric.
    const bool mirrored = g.lo() == -g.hi() && g.size() % 2 == 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      if (mirrored && i < n / 2) continue;
      for (Eigen::Index j = 0; j < m; ++j) out(i, j) = value(static_cast<std::size_t>(j), g[iu]);
    }
    if (mirrored) {
      for (Eigen::Index i = 0; i < n / 2; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
          const auto& s = states[static_cast<std::size_t>(j)];
          const bool odd = s.kind == StateKind::Bound ? (s.n % 2 == 1) : (s.parity < 0);
          out(i, j) = odd ? -out(n - 1 - i, j) : out(n - 1 - i, j);
        }
      }
    }
    return out;
  }

  /// One row per state: kind, n, k, parity, E, weight, norm.
  void write_csv(std::ostream& os) const {
    io::CsvWriter csv(os);
    csv.header({"kind", "n", "k", "parity", "E", "weight", "norm"});
    for (const auto& s : states) {
      csv.cell(s.kind == StateKind::Bound ? "bound" : "continuum")
          .cell(s.n)
          .cell(s.k)
          .cell(s.parity)
          .cell(s.energy)
          .cell(s.weight)
          .cell(s.norm)
          .end_row();
    }
  }
};

/// Scales sampled values in place to unit L^2 norm (trapezoidal rule).
inline void normalize(std::vector<double>& phi, const UniformGrid& grid) {
  if (phi.size() != grid.size()) throw std::invalid_argument("normalize: size mismatch");
  std::vector<double> sq(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) sq[i] = phi[i] * phi[i];
  const double norm2 = trapezoid(grid, sq);
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw std::domain_error("normalize: zero or non-finite norm");
  const double s = 1.0 / std::sqrt(norm2);
  for (double& v : phi) v *= s;
}

/// Returns the samples of `phi` on the grid scaled to unit L^2 norm.
template <class F>
std::vector<double> normalize(F&& phi, const UniformGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = phi(grid[i]);
  normalize(v, grid);
  return v;
}

/// Closed-form Poschl-Teller spectrum. Bound states are normalized by adaptive
/// quadrature on the whole line; continuum states carry the analytic
/// 1/sqrt(pi) asymptotic amplitude (checked by the completeness tests).
inline SpectralDecomposition closed_form_spectrum(const PoschlTellerParams& pt,
                                                  const KQuadratureSpec& kq = {}) {
  if (!(pt.alpha > 0.0) || !std::isfinite(pt.alpha)) throw std::domain_error("closed_form_spectrum: alpha must be > 0");
  if (!std::isfinite(pt.lambda) || !(pt.lambda > -1.0)) {
    throw std::domain_error("closed_form_spectrum: lambda must exceed -1");
  }
  if (kq.nodes == 0 || !(kq.kmax_mult > 0.0)) throw std::invalid_argument("closed_form_spectrum: empty k quadrature");
  SpectralDecomposition d;
  d.source = SpectrumSource::ClosedForm;
  d.params = pt;
  d.threshold = pt.v0;
  const double alpha = pt.alpha;
  const double lam = pt.lambda;

  const int nb = detail::closed_form_bound_count(lam);
  for (int n = 0; n < nb; ++n) {
    SpectralState s;
    s.kind = StateKind::Bound;
    s.n = n;
    s.parity = n % 2 == 0 ? 1 : -1;
    const double kap = lam - n;
    s.energy = pt.v0 - kap * kap / (2.0 * alpha * alpha);
    // int phi^2 dx = 2 alpha int_0^inf P^2(tanh y) dy; the tail decays like e^{-2 kap y}.
    const double ymax = std::min(40.0 / kap + 10.0, 1e4);
    auto f = [&](double y) {
      const double p = detail::bound_raw(lam, n, y);
      return p * p;
    };
    double total = 0.0;
    const double piece = 5.0;
    for (double y0 = 0.0; y0 < ymax; y0 += piece) {
      const auto r = integrate_adaptive(f, y0, std::min(ymax, y0 + piece), 1e-300, 1e-14);
      if (!r.converged) throw specfun::convergence_error("closed_form_spectrum: bound-state norm did not converge");
      total += r.value;
    }
    total *= 2.0 * alpha;
    if (!(total > 0.0)) throw std::domain_error("closed_form_spectrum: zero-norm bound state");
    s.norm = 1.0 / std::sqrt(total);
    d.states.push_back(s);
  }

  const QuadratureRule rule = gauss_legendre(kq.nodes, 0.0, kq.kmax_mult);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double k = rule.nodes[j];
    const auto v0 = detail::scattering_base(lam, k, 0.0, true);
    for (int parity : {1, -1}) {
      SpectralState s;
      s.kind = StateKind::Continuum;
      s.k = k;
      s.parity = parity;
      s.energy = pt.v0 + k * k / (2.0 * alpha * alpha);
      s.weight = rule.weights[j];
      // Even: phi'(0) = 0. Odd: phi(0) = 0.
      const std::complex<double> anchor = parity > 0 ? v0.du : v0.u;
      double a = anchor.imag();
      double b = -anchor.real();
      const double len = std::hypot(a, b);
      if (!(len > 0.0)) throw std::domain_error("closed_form_spectrum: degenerate scattering state");
      a /= len;
      b /= len;
      s.coef_re = a;
      s.coef_im = b;
      s.norm = inv_sqrt_pi / std::sqrt(alpha);
      d.states.push_back(s);
    }
  }
  return d;
}

struct NumericalSpectrumOptions {
  /// Keep eigenpairs with E <= energy_cap only.
  std::optional<double> energy_cap;
  /// Keep at most this many of the lowest eigenpairs.
  std::optional<int> max_states;
  bool want_vectors = true;
  /// Compare the lowest eigenvalues at n and 2n - 1 nodes.
  bool check_resolution = true;
  double resolution_tol = 1e-3;
  /// Richardson-extrapolate bound energies from the n and 2n - 1 grids.
  bool extrapolate = true;
  int resolution_levels = 5;
};

namespace detail {

inline std::vector<double> sample_potential(const PotentialProfile& profile, const UniformGrid& g) {
  const UniformGrid& pg = profile.grid;
  if (g.size() == pg.size() && g.lo() == pg.lo() && g.hi() == pg.hi()) return profile.values;
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (profile.evaluate) {
      w[i] = profile.evaluate(g[i]);
    } else {
      if (g[i] < pg.lo() || g[i] > pg.hi()) throw std::domain_error("numerical_spectrum: domain exceeds profile grid");
      w[i] = interpolate_cubic(pg, profile.values, g[i]);
    }
  }
  return w;
}

// Interior (Dirichlet) Hamiltonian on g.
inline TridiagonalEigen grid_hamiltonian_eigen(const UniformGrid& g, const std::vector<double>& w,
                                               EigenSelection sel, bool vectors) {
  const std::size_t n = g.size() - 2;
  const double h = g.step();
  std::vector<double> diag(n), off(n - 1, -0.5 / (h * h));
  for (std::size_t i = 0; i < n; ++i) diag[i] = 1.0 / (h * h) + w[i + 1];
  return tridiagonal_eigen(std::move(diag), std::move(off), sel, vectors);
}

}  // namespace detail

/// Lowest `levels` Dirichlet eigenvalues of H with the profile's potential.
inline std::vector<double> grid_eigenvalues(const PotentialProfile& profile, const UniformGrid& g, int levels) {
  const auto w = detail::sample_potential(profile, g);
  const int count = std::min<int>(levels, static_cast<int>(g.size()) - 2);
  return detail::grid_hamiltonian_eigen(g, w, EigenSelection::index(0, count - 1), false).values;
}

/// Finite-difference spectrum on [domain.first, domain.second] with n_grid
/// nodes. States below min(W) at the wall-adjacent nodes are bound.
inline SpectralDecomposition numerical_spectrum(const PotentialProfile& profile, std::size_t n_grid,
                                                std::pair<double, double> domain,
                                                const NumericalSpectrumOptions& opt = {}) {
  if (n_grid < 5) throw std::invalid_argument("numerical_spectrum: need at least 5 nodes");
  const UniformGrid g(domain.first, domain.second, n_grid);
  const auto w = detail::sample_potential(profile, g);
  const int interior = static_cast<int>(n_grid) - 2;

  EigenSelection sel = EigenSelection::all();
  if (opt.max_states) sel = EigenSelection::index(0, std::min(*opt.max_states, interior) - 1);
  TridiagonalEigen eig;
  if (opt.energy_cap) {
    const double floor = *std::min_element(w.begin(), w.end()) - 1.0;
    eig = detail::grid_hamiltonian_eigen(g, w, EigenSelection::below(floor, *opt.energy_cap), opt.want_vectors);
    if (opt.max_states && static_cast<int>(eig.values.size()) > *opt.max_states) {
      eig.values.resize(static_cast<std::size_t>(*opt.max_states));
      if (opt.want_vectors) eig.vectors = Eigen::MatrixXd(eig.vectors.leftCols(*opt.max_states));
    }
  } else {
    eig = detail::grid_hamiltonian_eigen(g, w, sel, opt.want_vectors);
  }

  const double threshold = std::min(w[1], w[n_grid - 2]);
  int nbound = 0;
  while (nbound < static_cast<int>(eig.values.size()) && eig.values[static_cast<std::size_t>(nbound)] < threshold) ++nbound;

  // Second grid with half the step: resolution check and Richardson
  // extrapolation of the bound energies (the stencil error is O(h^2)).
  const int levels = std::max(opt.check_resolution ? std::min<int>(opt.resolution_levels, static_cast<int>(eig.values.size())) : 0,
                              opt.extrapolate ? nbound : 0);
  if (levels > 0) {
    const UniformGrid fine(domain.first, domain.second, 2 * n_grid - 1);
    const auto ref = grid_eigenvalues(profile, fine, levels);
    const auto [wmin, wmax] = std::minmax_element(w.begin(), w.end());
    const double scale = *wmax - *wmin;
    const int checked = opt.check_resolution ? std::min<int>(opt.resolution_levels, static_cast<int>(eig.values.size())) : 0;
    for (int i = 0; i < checked; ++i) {
      const double e = eig.values[static_cast<std::size_t>(i)];
      const double drift = std::abs(e - ref[static_cast<std::size_t>(i)]) /
                           std::max({std::abs(e), scale, 1e-300});
      if (drift > opt.resolution_tol) {
        std::ostringstream os;
        os << "numerical_spectrum: resolution insufficient, eigenvalue " << i << " moves from " << e
           << " to " << ref[static_cast<std::size_t>(i)] << " (relative " << drift << ") between "
           << n_grid << " and " << 2 * n_grid - 1 << " nodes";
        throw resolution_error(os.str());
      }
    }
    if (opt.extrapolate) {
      for (int i = 0; i < nbound; ++i) {
        auto& e = eig.values[static_cast<std::size_t>(i)];
        e = (4.0 * ref[static_cast<std::size_t>(i)] - e) / 3.0;
      }
    }
  }

  SpectralDecomposition d;
  d.source = SpectrumSource::NumericalGrid;
  d.grid = g;
  d.threshold = threshold;
  const double inv_sqrt_h = 1.0 / std::sqrt(g.step());
  int label = 0;
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    const double e = eig.values[i];
    SpectralState s;
    if (static_cast<int>(i) < nbound) {
      s.kind = StateKind::Bound;
      s.n = label++;
    } else {
      s.kind = StateKind::Continuum;
      s.k = std::sqrt(2.0 * (e - d.threshold));
    }
    s.energy = e;
    s.norm = inv_sqrt_h;
    d.states.push_back(s);
  }
  if (opt.want_vectors) {
    auto full = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_grid),
                                                                       static_cast<Eigen::Index>(eig.values.size())));
    full->middleRows(1, interior) = eig.vectors * inv_sqrt_h;
    // Fix signs so that the largest lobe is positive (reproducible output).
    for (Eigen::Index j = 0; j < full->cols(); ++j) {
      Eigen::Index imax = 0;
      full->col(j).cwiseAbs().maxCoeff(&imax);
      if ((*full)(imax, j) < 0.0) full->col(j) *= -1.0;
    }
    d.vectors = std::move(full);
  }
  return d;
}

}  // namespace smilekernel
