#pragma once

// Uniform grids, trapezoidal weights, Gauss-Legendre rules and an adaptive
// Gauss-Kronrod (7/15) integrator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace smilekernel {

/// Uniform grid on [lo, hi] with `size` nodes (both ends included).
class UniformGrid {
 public:
  UniformGrid() = default;
  UniformGrid(double lo, double hi, std::size_t size) : lo_(lo), hi_(hi), size_(size) {
    if (size < 3) throw std::invalid_argument("UniformGrid: need at least 3 nodes");
    if (!(hi > lo)) throw std::invalid_argument("UniformGrid: hi must exceed lo");
    step_ = (hi - lo) / static_cast<double>(size - 1);
  }

  /// Symmetric grid [-half_width, half_width].
  static UniformGrid symmetric(double half_width, std::size_t size) {
    return UniformGrid(-half_width, half_width, size);
  }

  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }
  [[nodiscard]] double step() const noexcept { return step_; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }

  [[nodiscard]] double operator[](std::size_t i) const noexcept {
    // Pin the last node so round-off never pushes it past hi.
    return i + 1 == size_ ? hi_ : lo_ + step_ * static_cast<double>(i);
  }

  [[nodiscard]] std::vector<double> nodes() const {
    std::vector<double> x(size_);
    for (std::size_t i = 0; i < size_; ++i) x[i] = (*this)[i];
    return x;
  }

  /// Trapezoidal weights.
  [[nodiscard]] std::vector<double> trapezoid_weights() const {
    std::vector<double> w(size_, step_);
    w.front() = w.back() = 0.5 * step_;
    return w;
  }

  /// Index of the node nearest to x (clamped).
  [[nodiscard]] std::size_t nearest(double x) const noexcept {
    if (x <= lo_) return 0;
    if (x >= hi_) return size_ - 1;
    return static_cast<std::size_t>(std::lround((x - lo_) / step_));
  }

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::size_t size_ = 0;
  double step_ = 0.0;
};

/// Trapezoidal integral of samples on a uniform grid.
inline double trapezoid(const UniformGrid& grid, const std::vector<double>& f) {
  if (f.size() != grid.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * grid.step();
}

/// Four-point Lagrange interpolation of uniform-grid samples f[0 .. size-1].
inline double interpolate_cubic(const UniformGrid& grid, const double* f, double x) {
  const std::size_t n = grid.size();
  if (x < grid.lo() || x > grid.hi()) throw std::domain_error("interpolate_cubic: x outside grid");
  const double t = (x - grid.lo()) / grid.step();
  auto i0 = static_cast<std::ptrdiff_t>(std::floor(t)) - 1;
  i0 = std::clamp<std::ptrdiff_t>(i0, 0, static_cast<std::ptrdiff_t>(n) - 4);
  const double s = t - static_cast<double>(i0);
  double result = 0.0;
  for (int j = 0; j < 4; ++j) {
    double l = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != j) l *= (s - m) / static_cast<double>(j - m);
    result += l * f[i0 + j];
  }
  return result;
}

inline double interpolate_cubic(const UniformGrid& grid, const std::vector<double>& f, double x) {
  if (f.size() != grid.size()) throw std::invalid_argument("interpolate_cubic: size mismatch");
  return interpolate_cubic(grid, f.data(), x);
}

/// Nodes and weights of a quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes on [lo, hi] (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        const auto jd = static_cast<double>(j);
        p0 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p2) / jd;
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

/// Result of adaptive quadrature.
struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

namespace detail {

inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double g_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * gk_weights[7];
  double gauss = fc * g_weights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * gk_nodes[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += gk_weights[j] * (f1 + f2);
    if (j % 2 == 1) gauss += g_weights[j / 2] * (f1 + f2);
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

template <class F>
void gk_adapt(F& f, double a, double b, double whole, double err, double abs_tol, double rel_tol,
              int depth, int& budget, IntegrationResult& out) {
  const bool accurate = err <= std::max(abs_tol, rel_tol * std::abs(whole));
  if (accurate || depth == 0 || budget <= 0) {
    out.value += whole;
    out.error += err;
    if (!accurate) out.converged = false;
    return;
  }
  --budget;
  const double m = 0.5 * (a + b);
  auto [left, el] = gk15(f, a, m);
  auto [right, er] = gk15(f, m, b);
  gk_adapt(f, a, m, left, el, 0.5 * abs_tol, rel_tol, depth - 1, budget, out);
  gk_adapt(f, m, b, right, er, 0.5 * abs_tol, rel_tol, depth - 1, budget, out);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integral of f over [a, b] (finite interval).
template <class F>
IntegrationResult integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-13,
                                     double rel_tol = 1e-13, int max_depth = 40) {
  IntegrationResult out;
  out.converged = true;
  if (a == b) return out;
  const double sign = b > a ? 1.0 : -1.0;
  if (sign < 0.0) std::swap(a, b);
  auto [whole, err] = detail::gk15(f, a, b);
  int budget = 20000;  // subdivisions
  detail::gk_adapt(f, a, b, whole, err, abs_tol, rel_tol, max_depth, budget, out);
  out.value *= sign;
  if (!std::isfinite(out.value)) out.converged = false;
  return out;
}

}  // namespace smilekernel
