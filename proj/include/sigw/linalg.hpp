#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "sigw/matrix.hpp"

namespace sigw {

/// Eigendecomposition of a symmetric matrix. `eigenvalues` are sorted in
/// descending order and column i of `eigenvectors` pairs with eigenvalue i.
struct SymmetricEigen {
  Vector eigenvalues;
  Matrix eigenvectors;
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Ties in the eigenvalues keep the order in which Jacobi left them (stable
/// sort), so the result is deterministic for a given input.
inline SymmetricEigen sym_eigen(const Matrix& m) {
  require(m.is_square(), ErrorKind::DimensionMismatch, "sym_eigen needs a square matrix, got " + m.shape());
  require(all_finite(m.data()), ErrorKind::NonFinite, "sym_eigen input has NaN/Inf");
  const std::size_t n = m.rows();
  const double scale = m.frobenius_norm();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      require(std::abs(m(i, j) - m(j, i)) <= 1e-9 * scale, ErrorKind::NonSymmetric,
              "entry (" + std::to_string(i) + "," + std::to_string(j) + ") breaks symmetry");

  Matrix a = symmetric_part(m);
  Matrix v = Matrix::identity(n);
  if (n == 0) return {};

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (detail::off_diagonal_norm(a) <= 1e-15 * std::max(scale, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Skip rotations that cannot change the diagonal at working precision.
        if (sweep > 3 && std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = v(r, order[c]);
  }
  return out;
}

struct QrResult {
  Matrix q;  ///< rows x cols, orthonormal columns
  Matrix r;  ///< cols x cols, upper triangular with positive diagonal
};

/// Thin QR factorization by Householder reflections, normalized so that R has
/// a strictly positive diagonal. Used as the retraction onto the Stiefel
/// manifold.
inline QrResult qr_positive(const Matrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  require(rows >= cols, ErrorKind::DimensionMismatch, "qr_positive needs rows >= cols, got " + m.shape());
  require(all_finite(m.data()), ErrorKind::NonFinite, "qr_positive input has NaN/Inf");
  const double scale = m.frobenius_norm();

  Matrix a = m;
  std::vector<Vector> reflectors;
  reflectors.reserve(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    Vector u(rows - k);
    for (std::size_t i = k; i < rows; ++i) u[i - k] = a(i, k);
    const double alpha = norm(u);
    require(alpha > 1e-12 * scale && alpha > 0.0, ErrorKind::RankDeficient,
            "column " + std::to_string(k) + " is numerically dependent on earlier columns");
    u[0] += (u[0] >= 0 ? alpha : -alpha);
    const double unorm = norm(u);
    for (double& x : u) x /= unorm;
    for (std::size_t j = k; j < cols; ++j) {
      double proj = 0.0;
      for (std::size_t i = k; i < rows; ++i) proj += u[i - k] * a(i, j);
      for (std::size_t i = k; i < rows; ++i) a(i, j) -= 2.0 * proj * u[i - k];
    }
    reflectors.push_back(std::move(u));
  }

  QrResult out{Matrix::padded_identity(rows, cols), Matrix(cols, cols)};
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = i; j < cols; ++j) out.r(i, j) = a(i, j);

  // Q = H_0 H_1 ... H_{cols-1} [I; 0]
  for (std::size_t kk = cols; kk-- > 0;) {
    const Vector& u = reflectors[kk];
    for (std::size_t j = 0; j < cols; ++j) {
      double proj = 0.0;
      for (std::size_t i = kk; i < rows; ++i) proj += u[i - kk] * out.q(i, j);
      for (std::size_t i = kk; i < rows; ++i) out.q(i, j) -= 2.0 * proj * u[i - kk];
    }
  }

  for (std::size_t i = 0; i < cols; ++i) {
    if (out.r(i, i) < 0.0) {
      for (std::size_t j = i; j < cols; ++j) out.r(i, j) = -out.r(i, j);
      for (std::size_t k = 0; k < rows; ++k) out.q(k, i) = -out.q(k, i);
    }
  }
  return out;
}

}  // namespace sigw
