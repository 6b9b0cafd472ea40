#pragma once

// Real-argument special functions: log-gamma, digamma, Pochhammer symbols,
// the Gauss hypergeometric function and Ferrers (on-cut associated Legendre)
// functions of arbitrary real degree and order.
//
// Conventions follow DLMF chapters 5, 14 and 15. Ferrers functions carry the
// Condon-Shortley phase, which falls out of the regularized hypergeometric
// representation P_nu^mu(x) = ((1+x)/(1-x))^(mu/2) F~(nu+1, -nu; 1-mu; (1-x)/2).

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace smilekernel::specfun {

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

/// Raised when a series or transformation fails to reach its tolerance.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool is_nonpositive_integer(double x) noexcept {
  return x <= 0.0 && x == std::nearbyint(x);
}

// sin(pi x) with exact zeros at the integers.
inline double sin_pi(double x) noexcept {
  const double n = std::nearbyint(2.0 * x);
  const double f = x - 0.5 * n;  // |f| <= 1/4
  const double s = std::sin(std::numbers::pi * f);
  const double c = std::cos(std::numbers::pi * f);
  switch (static_cast<long long>(std::fmod(n, 4.0) + 4.0) % 4) {
    case 0: return s;
    case 1: return c;
    case 2: return -s;
    default: return -c;
  }
}

inline double cos_pi(double x) noexcept { return sin_pi(x + 0.5); }

// Bernoulli numbers B_2 .. B_20.
inline constexpr std::array<double, 10> bernoulli_even = {
    1.0 / 6.0,        -1.0 / 30.0,       1.0 / 42.0,        -1.0 / 30.0,
    5.0 / 66.0,       -691.0 / 2730.0,   7.0 / 6.0,         -3617.0 / 510.0,
    43867.0 / 798.0,  -174611.0 / 330.0};

// zeta(k) - 1 for k >= 2 by Euler-Maclaurin summation with cut N = 20.
inline double zeta_minus_one(int k) {
  constexpr int cut = 20;
  double sum = 0.0;
  for (int n = cut - 1; n >= 2; --n) sum += std::pow(static_cast<double>(n), -k);
  const double big_n = cut;
  double tail = std::pow(big_n, 1.0 - k) / (k - 1) + 0.5 * std::pow(big_n, -k);
  double rising = k;  // k (k+1) ... (k + 2j - 2)
  double fact = 2.0;  // (2j)!
  for (int j = 1; j <= 8; ++j) {
    tail += bernoulli_even[j - 1] / fact * rising * std::pow(big_n, -k - 2 * j + 1);
    rising *= (k + 2 * j - 1) * (k + 2 * j);
    fact *= (2 * j + 1) * (2 * j + 2);
  }
  return sum + tail;
}

// ln Gamma(2 + eps) for |eps| <= 0.25 via the zeta series.
inline double log_gamma_near_two(double eps) {
  static const auto coeffs = [] {
    std::array<double, 40> c{};
    for (int k = 2; k < 42; ++k) c[k - 2] = zeta_minus_one(k) / k;
    return c;
  }();
  double sum = 0.0;
  double p = eps * eps;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double term = ((i % 2 == 0) ? 1.0 : -1.0) * coeffs[i] * p;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    p *= eps;
  }
  return (1.0 - euler_gamma) * eps + sum;
}

// Stirling series for ln Gamma(x), x >= 15.
inline double log_gamma_stirling(double x) {
  constexpr double half_log_two_pi = 0.91893853320467274178032973640562;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double p = inv;
  for (int k = 1; k <= 9; ++k) {
    series += bernoulli_even[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * p;
    p *= inv2;
  }
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + series;
}

// ln|Gamma(x)| for x >= 0.5.
inline double log_gamma_positive(double x) {
  if (std::abs(x - 2.0) <= 0.2) return log_gamma_near_two(x - 2.0);
  if (std::abs(x - 1.0) <= 0.2) return log_gamma_near_two(x - 1.0) - std::log1p(x - 1.0);
  if (x >= 15.0) return log_gamma_stirling(x);
  double prod = 1.0;
  while (x < 15.0) {
    prod *= x;
    x += 1.0;
  }
  return log_gamma_stirling(x) - std::log(prod);
}

}  // namespace detail

/// ln|Gamma(x)|. Throws std::domain_error at the poles x = 0, -1, -2, ...
inline double log_gamma(double x) {
  if (!std::isfinite(x)) throw std::domain_error("log_gamma: non-finite argument");
  if (detail::is_nonpositive_integer(x)) {
    std::ostringstream os;
    os << "log_gamma: pole at x = " << x;
    throw std::domain_error(os.str());
  }
  if (x >= 0.5) return detail::log_gamma_positive(x);
  // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
  return std::log(std::numbers::pi / std::abs(detail::sin_pi(x))) -
         detail::log_gamma_positive(1.0 - x);
}

/// Sign of Gamma(x) away from the poles.
inline double gamma_sign(double x) noexcept {
  if (x > 0.0) return 1.0;
  return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
}

inline double gamma(double x) {
  if (x > 0.0 && x < 20.0 && x == std::nearbyint(x)) {
    double f = 1.0;
    for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
    return f;
  }
  return gamma_sign(x) * std::exp(log_gamma(x));
}

/// 1/Gamma(x), entire; zero at the poles of Gamma.
inline double rgamma(double x) {
  if (detail::is_nonpositive_integer(x)) return 0.0;
  return gamma_sign(x) * std::exp(-log_gamma(x));
}

/// Digamma psi(x) = Gamma'(x)/Gamma(x).
inline double digamma(double x) {
  if (!std::isfinite(x)) throw std::domain_error("digamma: non-finite argument");
  if (detail::is_nonpositive_integer(x)) throw std::domain_error("digamma: pole");
  double result = 0.0;
  if (x < 0.5) {
    // psi(1-x) - psi(x) = pi cot(pi x)
    result -= std::numbers::pi * detail::cos_pi(x) / detail::sin_pi(x);
    x = 1.0 - x;
  }
  while (x < 12.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  double series = 0.0;
  double p = inv2;
  for (int k = 1; k <= 8; ++k) {
    series += detail::bernoulli_even[k - 1] / (2.0 * k) * p;
    p *= inv2;
  }
  return result + std::log(x) - 0.5 / x - series;
}

/// Rising factorial (q)_n = q (q+1) ... (q+n-1), (q)_0 = 1.
template <class T>
T pochhammer(T q, int n) {
  if (n < 0) throw std::domain_error("pochhammer: negative n");
  T p = T(1);
  for (int k = 0; k < n; ++k) p *= (q + T(k));
  return p;
}

namespace detail {

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

// Product of Gamma(num_i) / Gamma(den_i). Poles in the denominator give 0;
// poles in the numerator throw.
template <std::size_t N, std::size_t M>
double gamma_ratio(const std::array<double, N>& num, const std::array<double, M>& den) {
  double log_mag = 0.0;
  double sign = 1.0;
  for (double d : den)
    if (is_nonpositive_integer(d)) return 0.0;
  for (double v : num) {
    if (is_nonpositive_integer(v)) {
      std::ostringstream os;
      os << "gamma_ratio: Gamma pole at " << v;
      throw std::domain_error(os.str());
    }
    log_mag += log_gamma(v);
    sign *= gamma_sign(v);
  }
  for (double d : den) {
    log_mag -= log_gamma(d);
    sign *= gamma_sign(d);
  }
  return sign * std::exp(log_mag);
}

}  // namespace detail

inline constexpr int hyp2f1_max_terms = 100000;
inline constexpr double hyp2f1_tail_tol = 1e-15;

/// Direct Gauss series sum_n (a)_n (b)_n / ((c)_n n!) z^n.
///
/// Works for real or complex parameters. Stops once two consecutive terms fall
/// below `tol` relative to the partial sum while the term ratio is already
/// contracting; terminating (polynomial) series stop at the exact zero term.
template <class T>
T hyp2f1_series(T a, T b, T c, T z, int max_terms = hyp2f1_max_terms,
                double tol = hyp2f1_tail_tol) {
  T term = T(1);
  T sum = T(1);
  int small_run = 0;
  for (int n = 0; n < max_terms; ++n) {
    const T nn = T(static_cast<double>(n));
    const T ratio = (a + nn) * (b + nn) / ((c + nn) * (nn + T(1))) * z;
    term *= ratio;
    if (term == T(0)) return sum;
    sum += term;
    if (detail::magnitude(term) <= tol * detail::magnitude(sum) &&
        detail::magnitude(ratio) < 1.0) {
      if (++small_run >= 2) return sum;
    } else {
      small_run = 0;
    }
  }
  throw convergence_error("hyp2f1_series: no convergence within max terms");
}

namespace detail {

// Finite sum when a is a non-positive integer.
inline double hyp2f1_polynomial(double a, double b, double c, double z) {
  const int degree = static_cast<int>(-a);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < degree; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
  }
  return sum;
}

inline double hyp2f1_dispatch(double a, double b, double c, double z);

// F(a, b; a+b+m; z), m = 0, 1, 2, ..., around z = 1 (A&S 15.3.10-15.3.11).
inline double hyp2f1_degenerate(double a, double b, int m, double z) {
  const double c = a + b + m;
  const double w = 1.0 - z;
  double finite = 0.0;
  if (m > 0) {
    const double pref =
        gamma_ratio(std::array<double, 2>{static_cast<double>(m), c},
                    std::array<double, 2>{a + m, b + m});
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n + 1 < m; ++n) {
      term *= (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n)) * w;
      sum += term;
    }
    finite = pref * sum;
  }
  const double pref2 = ((m % 2 == 0) ? 1.0 : -1.0) * std::pow(w, m) *
                       gamma_ratio(std::array<double, 1>{c}, std::array<double, 2>{a, b});
  if (pref2 == 0.0) return finite;
  // n = 0 term of sum (a+m)_n (b+m)_n / (n! (n+m)!) w^n [...]
  double coef = 1.0;
  for (int k = 2; k <= m; ++k) coef /= k;
  double psi_n1 = digamma(1.0);
  double psi_nm1 = digamma(m + 1.0);
  double psi_a = digamma(a + m);
  double psi_b = digamma(b + m);
  const double log_w = std::log(w);
  double sum = 0.0;
  int small_run = 0;
  for (int n = 0; n < hyp2f1_max_terms; ++n) {
    const double term = coef * (log_w - psi_n1 - psi_nm1 + psi_a + psi_b);
    sum += term;
    if (std::abs(term) <= hyp2f1_tail_tol * std::abs(sum) && n > 2) {
      if (++small_run >= 2) return finite - pref2 * sum;
    } else {
      small_run = 0;
    }
    coef *= (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * w;
    psi_n1 += 1.0 / (n + 1.0);
    psi_nm1 += 1.0 / (n + m + 1.0);
    psi_a += 1.0 / (a + m + n);
    psi_b += 1.0 / (b + m + n);
  }
  throw convergence_error("hyp2f1: degenerate z->1-z series did not converge");
}

// 0.5 < z < 1 via the z -> 1-z connection formula.
inline double hyp2f1_near_one(double a, double b, double c, double z) {
  const double d = c - a - b;
  const double m = std::nearbyint(d);
  if (std::abs(d - m) <= 1e-13 * std::max(1.0, std::abs(d))) {
    const int mi = static_cast<int>(m);
    if (mi >= 0) return hyp2f1_degenerate(a, b, mi, z);
    // Euler transformation flips the sign of c-a-b.
    return std::pow(1.0 - z, d) * hyp2f1_dispatch(c - a, c - b, c, z);
  }
  if (std::abs(d - m) < 1e-5) {
    // The connection formula cancels catastrophically here.
    return hyp2f1_series(a, b, c, z);
  }
  const double w = 1.0 - z;
  double t1 = gamma_ratio(std::array<double, 2>{c, d}, std::array<double, 2>{c - a, c - b});
  if (t1 != 0.0) t1 *= hyp2f1_dispatch(a, b, 1.0 - d, w);
  double t2 = gamma_ratio(std::array<double, 2>{c, -d}, std::array<double, 2>{a, b});
  if (t2 != 0.0) t2 *= std::pow(w, d) * hyp2f1_dispatch(c - a, c - b, 1.0 + d, w);
  return t1 + t2;
}

inline double hyp2f1_dispatch(double a, double b, double c, double z) {
  if (z == 0.0) return 1.0;
  if (is_nonpositive_integer(a)) return hyp2f1_polynomial(a, b, c, z);
  if (is_nonpositive_integer(b)) return hyp2f1_polynomial(b, a, c, z);
  if (z < 0.0) {
    // Pfaff: F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1)), pick the cheaper side.
    const double w = z / (z - 1.0);
    if (std::abs(a) <= std::abs(b))
      return std::pow(1.0 - z, -a) * hyp2f1_dispatch(a, c - b, c, w);
    return std::pow(1.0 - z, -b) * hyp2f1_dispatch(b, c - a, c, w);
  }
  if (z <= 0.5) return hyp2f1_series(a, b, c, z);
  return hyp2f1_near_one(a, b, c, z);
}

inline void check_params(double a, double b, double c, double z, const char* who) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(z)) {
    throw std::domain_error(std::string(who) + ": non-finite parameter");
  }
  if (z > 1.0) throw std::domain_error(std::string(who) + ": z > 1 is on the branch cut");
}

}  // namespace detail

/// Gauss hypergeometric function 2F1(a, b; c; z) for real parameters and z <= 1.
///
/// Uses the power series on [0, 1/2], Pfaff for z < 0 and the z -> 1-z
/// connection formula (including the logarithmic integer cases) on (1/2, 1).
inline double hyp2f1(double a, double b, double c, double z) {
  detail::check_params(a, b, c, z, "hyp2f1");
  if (detail::is_nonpositive_integer(c)) {
    // Only a polynomial that terminates before the pole is finite.
    const bool a_ok = detail::is_nonpositive_integer(a) && a > c;
    const bool b_ok = detail::is_nonpositive_integer(b) && b > c;
    if (!a_ok && !b_ok) {
      std::ostringstream os;
      os << "hyp2f1: c = " << c << " is a pole of the series";
      throw std::domain_error(os.str());
    }
    return detail::hyp2f1_polynomial(a_ok ? a : b, a_ok ? b : a, c, z);
  }
  if (z == 1.0) {
    if (c - a - b <= 0.0) throw std::domain_error("hyp2f1: divergent at z = 1");
    return detail::gamma_ratio(std::array<double, 2>{c, c - a - b},
                               std::array<double, 2>{c - a, c - b});
  }
  return detail::hyp2f1_dispatch(a, b, c, z);
}

/// Regularized function 2F1(a, b; c; z) / Gamma(c), finite for every c.
inline double hyp2f1_regularized(double a, double b, double c, double z) {
  detail::check_params(a, b, c, z, "hyp2f1_regularized");
  if (detail::is_nonpositive_integer(c)) {
    const int m = static_cast<int>(-c);
    const double pre = pochhammer(a, m + 1) * pochhammer(b, m + 1) *
                       rgamma(m + 2.0) * std::pow(z, m + 1);
    if (pre == 0.0) return 0.0;
    return pre * hyp2f1(a + m + 1, b + m + 1, m + 2.0, z);
  }
  const double r = rgamma(c);
  return r * hyp2f1(a, b, c, z);
}

/// Ferrers function of the first kind P_nu^mu(x), -1 < x < 1, real nu and mu,
/// with the Condon-Shortley phase (P_1^1(x) = -sqrt(1 - x^2)).
inline double legendre_p(double nu, double mu, double x) {
  if (!std::isfinite(nu) || !std::isfinite(mu) || !std::isfinite(x)) {
    throw std::domain_error("legendre_p: non-finite parameter");
  }
  if (!(std::abs(x) < 1.0)) {
    std::ostringstream os;
    os << "legendre_p: argument " << x << " outside the cut (-1, 1)";
    throw std::domain_error(os.str());
  }
  const double z = 0.5 * (1.0 - x);
  const double pref = std::pow((1.0 + x) / (1.0 - x), 0.5 * mu);
  return pref * hyp2f1_regularized(nu + 1.0, -nu, 1.0 - mu, z);
}

/// P_nu^mu(tanh y) for y >= 0 without forming 1 - tanh(y): the prefactor is
/// exp(mu y) and the hypergeometric argument is 1/(1 + exp(2y)).
inline double legendre_p_tanh(double nu, double mu, double y) {
  if (y < 0.0) throw std::domain_error("legendre_p_tanh: y must be >= 0");
  const double z = 1.0 / (1.0 + std::exp(2.0 * y));
  return std::exp(mu * y) * hyp2f1_regularized(nu + 1.0, -nu, 1.0 - mu, z);
}

}  // namespace smilekernel::specfun
