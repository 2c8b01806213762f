#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "sigw/linalg.hpp"
#include "sigw/matrix.hpp"

namespace sigw {

namespace detail {

inline void validate_weights(std::span<const double> weights, std::size_t expected) {
  require(weights.size() == expected, ErrorKind::LengthMismatch,
          "expected " + std::to_string(expected) + " weights, got " + std::to_string(weights.size()));
  require(all_finite(weights), ErrorKind::NonFinite, "weights must be finite");
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0, ErrorKind::InvalidWeights, "weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorKind::InvalidWeights,
          "weights sum to " + std::to_string(total) + ", not 1");
}

inline Vector uniform_weights(std::size_t n) { return Vector(n, 1.0 / static_cast<double>(n)); }

}  // namespace detail

/// Finitely supported probability measure: one point per row of `points`.
class EmpiricalMeasure {
 public:
  /// Uniform weights 1/n.
  explicit EmpiricalMeasure(Matrix points) : points_(std::move(points)), uniform_(true) {
    require(points_.rows() > 0, ErrorKind::EmptyMeasure, "empirical measure needs at least one point");
    require(all_finite(points_.data()), ErrorKind::NonFinite, "points must be finite");
    weights_ = detail::uniform_weights(points_.rows());
  }

  EmpiricalMeasure(Matrix points, Vector weights) : points_(std::move(points)), weights_(std::move(weights)) {
    require(points_.rows() > 0, ErrorKind::EmptyMeasure, "empirical measure needs at least one point");
    require(all_finite(points_.data()), ErrorKind::NonFinite, "points must be finite");
    detail::validate_weights(weights_, points_.rows());
    uniform_ = std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == weights_.front(); });
  }

  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return points_.rows(); }
  std::size_t dim() const noexcept { return points_.cols(); }
  bool is_uniform() const noexcept { return uniform_; }

 private:
  Matrix points_;
  Vector weights_;
  bool uniform_ = false;
};

/// Centered Gaussian N(0, Σ).
class GaussianMeasure {
 public:
  explicit GaussianMeasure(Matrix covariance) : covariance_(std::move(covariance)) {
    require(covariance_.is_square() && covariance_.rows() > 0, ErrorKind::DimensionMismatch,
            "covariance must be square and nonempty, got " + covariance_.shape());
    const double scale = covariance_.frobenius_norm();
    const auto eig = sym_eigen(covariance_);
    require(eig.eigenvalues.back() >= -1e-9 * scale, ErrorKind::NotPSD,
            "covariance has eigenvalue " + std::to_string(eig.eigenvalues.back()));
    covariance_ = symmetric_part(covariance_);
  }

  const Matrix& covariance() const noexcept { return covariance_; }
  std::size_t dim() const noexcept { return covariance_.rows(); }

 private:
  Matrix covariance_;
};

/// A measure on the real line, e.g. a one-dimensional projection.
class UnivariateSample {
 public:
  explicit UnivariateSample(Vector values) : values_(std::move(values)), uniform_(true) {
    require(!values_.empty(), ErrorKind::EmptyMeasure, "univariate sample is empty");
    require(all_finite(values_), ErrorKind::NonFinite, "sample values must be finite");
    weights_ = detail::uniform_weights(values_.size());
  }

  UnivariateSample(Vector values, Vector weights) : values_(std::move(values)), weights_(std::move(weights)) {
    require(!values_.empty(), ErrorKind::EmptyMeasure, "univariate sample is empty");
    require(all_finite(values_), ErrorKind::NonFinite, "sample values must be finite");
    detail::validate_weights(weights_, values_.size());
    uniform_ = std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == weights_.front(); });
  }

  const Vector& values() const noexcept { return values_; }
  const Vector& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_uniform() const noexcept { return uniform_; }

 private:
  UnivariateSample() = default;
  friend UnivariateSample reflect(const UnivariateSample& s);

  Vector values_;
  Vector weights_;
  bool uniform_ = false;
};

/// (−id)♯s
inline UnivariateSample reflect(const UnivariateSample& s) {
  UnivariateSample out;
  out.values_ = s.values_;
  for (double& v : out.values_) v = -v;
  out.weights_ = s.weights_;
  out.uniform_ = s.uniform_;
  return out;
}

/// M₂(m) = Σᵢ wᵢ‖xᵢ‖²
inline double second_moment(const EmpiricalMeasure& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto x = m.points().row(i);
    s += m.weights()[i] * dot(x, x);
  }
  return s;
}

inline double second_moment(const UnivariateSample& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += s.weights()[i] * s.values()[i] * s.values()[i];
  return acc;
}

inline double second_moment(const GaussianMeasure& g) { return g.covariance().trace(); }

/// R = Σᵢ wᵢ xᵢxᵢᵀ
inline Matrix second_moment_matrix(const EmpiricalMeasure& m) {
  const std::size_t d = m.dim();
  Matrix r(d, d);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto x = m.points().row(i);
    add_outer(r, m.weights()[i], x, x);
  }
  return symmetric_part(r);
}

inline const Matrix& second_moment_matrix(const GaussianMeasure& g) { return g.covariance(); }

/// One-dimensional projection x ↦ θᵀx, or x ↦ θᵀΔx when an aligner Δ
/// (d_y × d_x) is given.
inline UnivariateSample project(const EmpiricalMeasure& m, std::span<const double> direction,
                                const std::optional<Matrix>& aligner = std::nullopt) {
  Vector w;
  if (aligner) {
    require(aligner->rows() == direction.size() && aligner->cols() == m.dim(), ErrorKind::DimensionMismatch,
            "aligner " + aligner->shape() + " does not map dimension " + std::to_string(m.dim()) +
                " to direction length " + std::to_string(direction.size()));
    w = multiply_transposed(*aligner, direction);
  } else {
    require(direction.size() == m.dim(), ErrorKind::DimensionMismatch,
            "direction length " + std::to_string(direction.size()) + " vs measure dimension " +
                std::to_string(m.dim()));
    w.assign(direction.begin(), direction.end());
  }
  Vector values(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) values[i] = dot(m.points().row(i), w);
  if (m.is_uniform()) return UnivariateSample(std::move(values));
  return UnivariateSample(std::move(values), m.weights());
}

inline Vector weighted_mean(const EmpiricalMeasure& m) {
  Vector mean(m.dim(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto x = m.points().row(i);
    for (std::size_t j = 0; j < m.dim(); ++j) mean[j] += m.weights()[i] * x[j];
  }
  return mean;
}

inline EmpiricalMeasure center(const EmpiricalMeasure& m) {
  const Vector mean = weighted_mean(m);
  Matrix pts = m.points();
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    auto x = pts.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= mean[j];
  }
  if (m.is_uniform()) return EmpiricalMeasure(std::move(pts));
  return EmpiricalMeasure(std::move(pts), m.weights());
}

/// Gaussian with the (weighted, population-normalized) covariance of `m`.
inline GaussianMeasure empirical_covariance(const EmpiricalMeasure& m) {
  return GaussianMeasure(second_moment_matrix(center(m)));
}

}  // namespace sigw
