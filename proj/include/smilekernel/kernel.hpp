#pragma once

// Propagator K(x, x'; tau) = sum_m c_m phi_m(x) phi_m(x') e^{-E_m tau} of
// d psi / d tau = -H psi, with c_m the continuum quadrature weight (1 for
// bound and box states).
//
// The kernel keeps the sampled eigenfunctions Phi (grid x states) and the
// coefficients, so K psi = Phi diag(c) Phi^T diag(w) psi costs O(N M); the
// dense N x N matrix is only formed on request.

#include "smilekernel/io/csv.hpp"
#include "smilekernel/quadrature.hpp"
#include "smilekernel/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smilekernel {

struct KernelOptions {
  /// Warn once e^{-E_0 tau} exceeds this (deep bound state, long maturity).
  double growth_guard = 1e100;
  /// Outer fraction of the grid used by the tail-truncation diagnostic.
  double tail_fraction = 0.05;
  /// Warn when the outer region contributes more than this relative share.
  double tail_tol = 1e-6;
  /// Region checked by the diagnostic; defaults to everything inside the strips.
  std::optional<std::pair<double, double>> tail_region;
};

struct KernelApplication {
  std::vector<double> total;
  std::vector<double> bound;      // bound-state part
  std::vector<double> continuum;  // continuum (or box-state) part
  /// Relative contribution of the outer grid region to the output interior.
  double tail_share = 0.0;
  std::vector<std::string> warnings;
};

class PricingKernel {
 public:
  PricingKernel(std::shared_ptr<const SpectralDecomposition> spectrum, double tau, const UniformGrid& grid,
                const KernelOptions& opt = {})
      : spectrum_(std::move(spectrum)), tau_(tau), grid_(grid), opt_(opt) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::domain_error("PricingKernel: tau must be >= 0");
    phi_ = spectrum_->sample(grid_);
    const auto m = static_cast<Eigen::Index>(spectrum_->states.size());
    coef_.resize(m);
    is_bound_.resize(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& s = spectrum_->states[static_cast<std::size_t>(j)];
      const double expo = -s.energy * tau_;
      if (expo > 709.0) {
        std::ostringstream os;
        os << "PricingKernel: e^{-E tau} overflows (E = " << s.energy << ", tau = " << tau_ << ")";
        throw std::overflow_error(os.str());
      }
      coef_[j] = s.weight * std::exp(expo);
      is_bound_[static_cast<std::size_t>(j)] = s.kind == StateKind::Bound;
    }
    if (!spectrum_->states.empty()) {
      const double e0 = spectrum_->states.front().energy;
      if (std::exp(-e0 * tau_) > opt_.growth_guard) {
        std::ostringstream os;
        os << "ground-state growth e^{-E_0 tau} = " << std::exp(-e0 * tau_) << " exceeds guard";
        warnings_.push_back(os.str());
      }
    }
    weights_ = grid_.trapezoid_weights();
  }

  [[nodiscard]] double tau() const noexcept { return tau_; }
  [[nodiscard]] const UniformGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const SpectralDecomposition& spectrum() const noexcept { return *spectrum_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  [[nodiscard]] const Eigen::MatrixXd& eigenfunctions() const noexcept { return phi_; }
  [[nodiscard]] const Eigen::VectorXd& coefficients() const noexcept { return coef_; }

  /// K(x, x') straight from the spectrum, at arbitrary points.
  [[nodiscard]] double evaluate(double x, double xp) const {
    double k = 0.0;
    for (std::size_t m = 0; m < spectrum_->states.size(); ++m) {
      k += coef_[static_cast<Eigen::Index>(m)] * spectrum_->value(m, x) * spectrum_->value(m, xp);
    }
    return k;
  }

  /// Row i of the dense kernel, K(x_i, x_j) over j.
  [[nodiscard]] std::vector<double> row(std::size_t i) const {
    const Eigen::VectorXd r = phi_ * coef_.asDiagonal() * phi_.row(static_cast<Eigen::Index>(i)).transpose();
    return {r.data(), r.data() + r.size()};
  }

  /// Dense K(x_i, x_j).
  [[nodiscard]] Eigen::MatrixXd matrix() const { return phi_ * coef_.asDiagonal() * phi_.transpose(); }

  /// (K psi)(x_i) = sum_j w_j K(x_i, x_j) psi(x_j), with the bound/continuum
  /// split and the tail diagnostic.
  [[nodiscard]] KernelApplication apply_detailed(const std::vector<double>& psi) const {
    if (psi.size() != grid_.size()) throw std::invalid_argument("PricingKernel::apply: size mismatch");
    const auto n = static_cast<Eigen::Index>(grid_.size());
    Eigen::VectorXd wpsi(n);
    for (Eigen::Index i = 0; i < n; ++i) wpsi[i] = weights_[static_cast<std::size_t>(i)] * psi[static_cast<std::size_t>(i)];
    const Eigen::VectorXd proj = (phi_.transpose() * wpsi).cwiseProduct(coef_);
    Eigen::VectorXd pb = proj, pc = proj;
    for (Eigen::Index j = 0; j < proj.size(); ++j) (is_bound_[static_cast<std::size_t>(j)] ? pc : pb)[j] = 0.0;
    const Eigen::VectorXd ob = phi_ * pb;
    const Eigen::VectorXd oc = phi_ * pc;

    KernelApplication out;
    out.bound.assign(ob.data(), ob.data() + n);
    out.continuum.assign(oc.data(), oc.data() + n);
    out.total.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.total[static_cast<std::size_t>(i)] = ob[i] + oc[i];

    // Contribution of the outer strips to the interior output.
    const auto edge = static_cast<Eigen::Index>(std::ceil(opt_.tail_fraction * static_cast<double>(n)));
    if (edge > 0 && 2 * edge < n) {
      Eigen::VectorXd tail = Eigen::VectorXd::Zero(n);
      tail.head(edge) = wpsi.head(edge);
      tail.tail(edge) = wpsi.tail(edge);
      const Eigen::VectorXd ot = phi_ * (phi_.transpose() * tail).cwiseProduct(coef_);
      double num = 0.0, den = 0.0;
      for (Eigen::Index i = edge; i < n - edge; ++i) {
        const double x = grid_[static_cast<std::size_t>(i)];
        if (opt_.tail_region && (x < opt_.tail_region->first || x > opt_.tail_region->second)) continue;
        num = std::max(num, std::abs(ot[i]));
        den = std::max(den, std::abs(ob[i] + oc[i]));
      }
      out.tail_share = den > 0.0 ? num / den : (num > 0.0 ? 1.0 : 0.0);
      if (out.tail_share > opt_.tail_tol) {
        std::ostringstream os;
        os << "tail truncation: outer " << opt_.tail_fraction * 100.0
           << "% of the grid contributes a relative " << out.tail_share << " to the result";
        out.warnings.push_back(os.str());
      }
    }
    out.warnings.insert(out.warnings.begin(), warnings_.begin(), warnings_.end());
    return out;
  }

  [[nodiscard]] std::vector<double> apply(const std::vector<double>& psi) const { return apply_detailed(psi).total; }

  /// Long-format CSV (x, x_prime, K), every `stride`-th node in each direction.
  void write_csv(std::ostream& os, std::size_t stride = 1) const {
    if (stride == 0) throw std::invalid_argument("PricingKernel::write_csv: stride must be positive");
    io::CsvWriter csv(os);
    csv.header({"x", "x_prime", "K"});
    for (std::size_t i = 0; i < grid_.size(); i += stride) {
      const auto r = row(i);
      for (std::size_t j = 0; j < grid_.size(); j += stride) csv.cell(grid_[i]).cell(grid_[j]).cell(r[j]).end_row();
    }
  }

 private:
  std::shared_ptr<const SpectralDecomposition> spectrum_;
  double tau_;
  UniformGrid grid_;
  KernelOptions opt_;
  Eigen::MatrixXd phi_;
  Eigen::VectorXd coef_;
  std::vector<bool> is_bound_;
  std::vector<double> weights_;
  std::vector<std::string> warnings_;
};

inline PricingKernel assemble(std::shared_ptr<const SpectralDecomposition> spectrum, double tau,
                              const UniformGrid& grid, const KernelOptions& opt = {}) {
  return PricingKernel(std::move(spectrum), tau, grid, opt);
}

inline PricingKernel assemble(const SpectralDecomposition& spectrum, double tau, const UniformGrid& grid,
                              const KernelOptions& opt = {}) {
  return PricingKernel(std::make_shared<const SpectralDecomposition>(spectrum), tau, grid, opt);
}

}  // namespace smilekernel
