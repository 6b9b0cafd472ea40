#pragma once

// Quadratic normal volatility model sigma(S) = a S^2 + b S + c with a constant
// short rate, and its classification by the discriminant of sigma.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smilekernel {

struct QnvModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double r = 0.0;

  /// Throws std::invalid_argument for non-finite or all-zero coefficients.
  void validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(r)) {
      throw std::invalid_argument("QnvModel: non-finite parameter");
    }
    if (a == 0.0 && b == 0.0 && c == 0.0) {
      throw std::invalid_argument("QnvModel: degenerate volatility (a = b = c = 0)");
    }
  }

  /// The raw polynomial a S^2 + b S + c.
  [[nodiscard]] double polynomial(double s) const noexcept { return (a * s + b) * s + c; }
};

enum class Regime { Hyperbolic, Euclidean, Spherical };

inline std::string_view to_string(Regime g) noexcept {
  switch (g) {
    case Regime::Hyperbolic: return "Hyperbolic";
    case Regime::Euclidean: return "Euclidean";
    case Regime::Spherical: return "Spherical";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, Regime g) { return os << to_string(g); }

struct GeometryClass {
  Regime regime = Regime::Spherical;
  double discriminant = 0.0;
  /// Two ascending roots for Hyperbolic, at most one for Euclidean, none for Spherical.
  std::vector<double> roots;
};

namespace detail {

// b^2 - 4ac with the product error recovered by fma (Kahan's trick).
inline double discriminant(double a, double b, double c) noexcept {
  const double w = 4.0 * a * c;
  const double e = std::fma(-4.0 * a, c, w);
  const double f = std::fma(b, b, -w);
  return f + e;
}

}  // namespace detail

/// Classifies the model by the sign of b^2 - 4ac.
///
/// The Euclidean branch is taken when |Delta| <= 1e-12 max(b^2, |4ac|). An
/// affine volatility (a = 0) has no two-root structure and is reported as
/// Euclidean with its single root, if any.
inline GeometryClass classify(const QnvModel& m) {
  m.validate();
  GeometryClass g;
  g.discriminant = detail::discriminant(m.a, m.b, m.c);
  if (m.a == 0.0) {
    g.regime = Regime::Euclidean;
    if (m.b != 0.0) g.roots = {-m.c / m.b};
    return g;
  }
  const double tol = 1e-12 * std::max(m.b * m.b, std::abs(4.0 * m.a * m.c));
  if (std::abs(g.discriminant) <= tol) {
    g.regime = Regime::Euclidean;
    g.roots = {-m.b / (2.0 * m.a)};
  } else if (g.discriminant > 0.0) {
    g.regime = Regime::Hyperbolic;
    const double sq = std::sqrt(g.discriminant);
    const double q = -0.5 * (m.b + std::copysign(sq, m.b));
    double r1 = q / m.a;
    double r2 = m.c / q;
    if (r1 > r2) std::swap(r1, r2);
    g.roots = {r1, r2};
  } else {
    g.regime = Regime::Spherical;
  }
  return g;
}

struct RootPair {
  double lower;
  double upper;
};

/// Real roots S_l < S_u of a hyperbolic model.
inline RootPair roots(const QnvModel& m) {
  const GeometryClass g = classify(m);
  if (g.regime != Regime::Hyperbolic) {
    std::ostringstream os;
    os << "roots: model is " << g.regime << ", not Hyperbolic";
    throw std::domain_error(os.str());
  }
  return {g.roots[0], g.roots[1]};
}

}  // namespace smilekernel
