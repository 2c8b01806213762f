#pragma once

#include <cmath>
#include <span>

#include "sigw/linalg.hpp"
#include "sigw/measures.hpp"

namespace sigw {

/// Closed-form sliced IGW between centered Gaussians together with the
/// aligner that attains it.
struct GaussianAlignment {
  Matrix delta_star;  ///< d_y x d_x, orthonormal columns
  double sliced_igw_squared = 0.0;
};

namespace detail {

/// Descending spectrum with roundoff negatives clamped to zero.
inline SymmetricEigen clamped_spectrum(const Matrix& sigma) {
  auto eig = sym_eigen(sigma);
  const double scale = sigma.frobenius_norm();
  for (double& l : eig.eigenvalues) {
    require(l >= -1e-8 * scale, ErrorKind::NotPSD, "covariance eigenvalue " + std::to_string(l) + " is negative");
    l = std::max(l, 0.0);
  }
  return eig;
}

inline double padded_spectrum_gap(const Vector& a, const Vector& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double la = i < a.size() ? a[i] : 0.0;
    const double lb = i < b.size() ? b[i] : 0.0;
    s += (la - lb) * (la - lb);
  }
  return s;
}

}  // namespace detail

/// Sliced IGW² between N(0, Σ_μ) on ℝ^{d_x} and N(0, Σ_ν) on ℝ^{d_y}, d_x ≤ d_y:
///
///   ((tr Σ_μ − tr Σ_ν)² + 2 Σᵢ (λᵢ(Σ_μ) − λᵢ(Σ_ν))²) / (d_y (d_y + 2))
///
/// with both spectra sorted descending and Σ_μ's padded by zeros. The
/// minimizing aligner is V [I; 0] Uᵀ where U and V diagonalize Σ_μ and Σ_ν.
inline GaussianAlignment sliced_igw_gaussian(const GaussianMeasure& mu, const GaussianMeasure& nu) {
  const std::size_t dx = mu.dim();
  const std::size_t dy = nu.dim();
  require(dx <= dy, ErrorKind::DimensionOrder,
          "source dimension " + std::to_string(dx) + " exceeds target dimension " + std::to_string(dy));
  const auto eu = detail::clamped_spectrum(mu.covariance());
  const auto ev = detail::clamped_spectrum(nu.covariance());

  double trace_mu = 0.0;
  double trace_nu = 0.0;
  for (double l : eu.eigenvalues) trace_mu += l;
  for (double l : ev.eigenvalues) trace_nu += l;
  const double gap = detail::padded_spectrum_gap(eu.eigenvalues, ev.eigenvalues);
  const double d = static_cast<double>(dy);

  GaussianAlignment out;
  out.sliced_igw_squared = ((trace_mu - trace_nu) * (trace_mu - trace_nu) + 2.0 * gap) / (d * (d + 2.0));
  out.delta_star = Matrix(dy, dx);
  for (std::size_t r = 0; r < dy; ++r)
    for (std::size_t c = 0; c < dx; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < dx; ++k) s += ev.eigenvectors(r, k) * eu.eigenvectors(c, k);
      out.delta_star(r, c) = s;
    }
  return out;
}

/// IGW between centered Gaussians: sqrt(Σᵢ (λᵢ(Σ_μ) − λᵢ(Σ_ν))²), shorter
/// spectrum zero-padded. Either argument may have the larger dimension.
inline double igw_gaussian(const GaussianMeasure& mu, const GaussianMeasure& nu) {
  const auto eu = detail::clamped_spectrum(mu.covariance());
  const auto ev = detail::clamped_spectrum(nu.covariance());
  return std::sqrt(detail::padded_spectrum_gap(eu.eigenvalues, ev.eigenvalues));
}

/// IGW² between the projections (θᵀΔ)♯N(0,Σ_μ) and θᵀ♯N(0,Σ_ν), i.e.
/// (θᵀΔΣ_μΔᵀθ − θᵀΣ_νθ)².
inline double projected_igw_gaussian(const Matrix& sigma_mu, const Matrix& sigma_nu, const Matrix& delta,
                                     std::span<const double> theta) {
  require(delta.rows() == theta.size() && delta.cols() == sigma_mu.rows() && sigma_nu.rows() == theta.size(),
          ErrorKind::DimensionMismatch,
          "projected_igw_gaussian: delta " + delta.shape() + ", sigma_mu " + sigma_mu.shape() + ", sigma_nu " +
              sigma_nu.shape() + ", theta " + std::to_string(theta.size()));
  const Vector w = multiply_transposed(delta, theta);
  const double a = quadratic_form(sigma_mu, w);
  const double b = quadratic_form(sigma_nu, theta);
  return (a - b) * (a - b);
}

inline double projected_igw_gaussian(const GaussianMeasure& mu, const GaussianMeasure& nu, const Matrix& delta,
                                     std::span<const double> theta) {
  return projected_igw_gaussian(mu.covariance(), nu.covariance(), delta, theta);
}

}  // namespace sigw
