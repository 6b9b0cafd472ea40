#pragma once

// Symmetric tridiagonal eigensolver (LAPACK dstevr, MRRR) and the Thomas
// algorithm for general tridiagonal systems.

#include <lapacke.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace smilekernel {

struct TridiagonalEigen {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;     // column j pairs with values[j]; empty if not requested
};

struct EigenSelection {
  enum class Kind { All, Index, Value } kind = Kind::All;
  int first = 0;  // Index: zero-based, inclusive
  int last = 0;
  double lower = 0.0;  // Value: half-open (lower, upper]
  double upper = 0.0;

  static EigenSelection all() { return {}; }
  static EigenSelection index(int first, int last) { return {Kind::Index, first, last, 0.0, 0.0}; }
  static EigenSelection below(double lower, double upper) { return {Kind::Value, 0, 0, lower, upper}; }
};

/// Eigenpairs of the symmetric tridiagonal matrix with the given diagonal and
/// off-diagonal (size n-1).
inline TridiagonalEigen tridiagonal_eigen(std::vector<double> diag, std::vector<double> off,
                                          EigenSelection sel = EigenSelection::all(),
                                          bool want_vectors = true) {
  const auto n = static_cast<lapack_int>(diag.size());
  if (n == 0) throw std::invalid_argument("tridiagonal_eigen: empty matrix");
  if (off.size() + 1 != diag.size()) throw std::invalid_argument("tridiagonal_eigen: size mismatch");
  off.push_back(0.0);  // dstevr uses E(N) as workspace
  char range = 'A';
  lapack_int il = 1, iu = n;
  double vl = 0.0, vu = 0.0;
  lapack_int capacity = n;
  if (sel.kind == EigenSelection::Kind::Index) {
    range = 'I';
    il = sel.first + 1;
    iu = std::min<lapack_int>(sel.last + 1, n);
    if (il < 1 || il > iu) throw std::invalid_argument("tridiagonal_eigen: bad index range");
    capacity = iu - il + 1;
  } else if (sel.kind == EigenSelection::Kind::Value) {
    range = 'V';
    vl = sel.lower;
    vu = sel.upper;
  }
  TridiagonalEigen out;
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  Eigen::MatrixXd z;
  if (want_vectors) z.resize(n, capacity);
  lapack_int m = 0;
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', range, n, diag.data(), off.data(), vl, vu, il, iu,
      0.0, &m, w.data(), want_vectors ? z.data() : nullptr, want_vectors ? n : 1, support.data());
  if (info != 0) throw std::runtime_error("tridiagonal_eigen: dstevr failed, info = " + std::to_string(info));
  out.values.assign(w.begin(), w.begin() + m);
  if (want_vectors) out.vectors = z.leftCols(m);
  return out;
}

/// Solves the tridiagonal system with sub-diagonal `lower` (a[1..n-1]),
/// diagonal `diag` and super-diagonal `upper` (c[0..n-2]); a[0] and c[n-1]
/// are ignored.
inline std::vector<double> thomas_solve(const std::vector<double>& lower,
                                        const std::vector<double>& diag,
                                        const std::vector<double>& upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw std::invalid_argument("thomas_solve: size mismatch");
  }
  std::vector<double> c(n);
  double beta = diag[0];
  if (beta == 0.0) throw std::runtime_error("thomas_solve: zero pivot");
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i - 1] = upper[i - 1] / beta;
    beta = diag[i] - lower[i] * c[i - 1];
    if (beta == 0.0) throw std::runtime_error("thomas_solve: zero pivot");
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

}  // namespace smilekernel
