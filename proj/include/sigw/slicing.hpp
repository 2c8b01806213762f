#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "sigw/gaussian.hpp"
#include "sigw/measures.hpp"
#include "sigw/parallel.hpp"
#include "sigw/random.hpp"
#include "sigw/univariate.hpp"

namespace sigw {

/// Unit vectors θ₁…θ_m on the sphere in ℝ^{d_y}, one per row, plus the seed
/// that produced them.
struct DirectionSet {
  Matrix directions;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return directions.rows(); }
  std::size_t dim() const noexcept { return directions.cols(); }
  std::span<const double> operator[](std::size_t j) const { return directions.row(j); }
};

/// Wraps caller-supplied directions, checking that every row is a unit vector.
inline DirectionSet make_direction_set(Matrix directions, std::uint64_t seed = 0) {
  require(directions.rows() > 0 && directions.cols() > 0, ErrorKind::ZeroDimension, "empty direction set");
  for (std::size_t j = 0; j < directions.rows(); ++j)
    require(std::abs(norm(directions.row(j)) - 1.0) <= 1e-12, ErrorKind::InvalidArgument,
            "direction " + std::to_string(j) + " is not a unit vector");
  return DirectionSet{std::move(directions), seed};
}

/// m i.i.d. Haar-distributed directions on 𝕊^{d_y−1}: normalized standard
/// Gaussian vectors, deterministic in `seed`.
inline DirectionSet sample_directions(std::size_t dim, std::size_t count, std::uint64_t seed) {
  require(dim >= 1, ErrorKind::ZeroDimension, "direction dimension must be at least 1");
  require(count >= 1, ErrorKind::ZeroDimension, "need at least one direction");
  Rng rng(seed);
  Matrix dirs(count, dim);
  for (std::size_t j = 0; j < count; ++j) {
    auto row = dirs.row(j);
    double len = 0.0;
    do {
      for (double& v : row) v = rng.normal();
      len = norm(row);
    } while (!(len > 1e-300));
    for (double& v : row) v /= len;
  }
  return DirectionSet{std::move(dirs), seed};
}

/// g_Δ(θ) = IGW((θᵀΔ)♯μ, θᵀ♯ν)² for empirical measures.
inline double slice_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const Matrix& delta,
                         std::span<const double> theta) {
  require(nu.dim() == theta.size(), ErrorKind::DimensionMismatch, "theta length must match the target dimension");
  return igw_1d(project(mu, theta, delta), project(nu, theta)).igw_squared;
}

/// g_Δ(θ) for centered Gaussians, from the covariances.
inline double slice_cost(const GaussianMeasure& mu, const GaussianMeasure& nu, const Matrix& delta,
                         std::span<const double> theta) {
  return projected_igw_gaussian(mu, nu, delta, theta);
}

/// Fixed-direction Monte-Carlo objective Δ ↦ (1/m) Σⱼ g_Δ(θⱼ) for a pair of
/// measures with d_x ≤ d_y. Target-side projections do not depend on Δ and
/// are cached at construction.
class SliceObjective {
 public:
  struct Evaluation {
    double value = 0.0;
    Matrix subgradient;  ///< empty unless requested
  };

  SliceObjective(EmpiricalMeasure mu, EmpiricalMeasure nu, DirectionSet directions)
      : directions_(std::move(directions)), backend_(build(std::move(mu), std::move(nu), directions_)) {
    const auto& b = std::get<EmpiricalBackend>(backend_);
    set_dims(b.mu.dim(), b.nu.dim(), second_moment(b.mu), second_moment(b.nu));
  }

  SliceObjective(GaussianMeasure mu, GaussianMeasure nu, DirectionSet directions)
      : directions_(std::move(directions)), backend_(build(std::move(mu), std::move(nu), directions_)) {
    const auto& b = std::get<GaussianBackend>(backend_);
    set_dims(b.mu.dim(), b.nu.dim(), second_moment(b.mu), second_moment(b.nu));
  }

  bool is_gaussian() const noexcept { return std::holds_alternative<GaussianBackend>(backend_); }
  std::size_t source_dim() const noexcept { return source_dim_; }
  std::size_t target_dim() const noexcept { return target_dim_; }
  std::size_t num_slices() const noexcept { return directions_.size(); }
  const DirectionSet& directions() const noexcept { return directions_; }
  /// M₂ of the source and target measures.
  double m2_mu() const noexcept { return m2_mu_; }
  double m2_nu() const noexcept { return m2_nu_; }

  /// Source second-moment matrix (R_μ, or Σ_μ for the Gaussian backend).
  const Matrix& source_second_moment() const {
    if (const auto* g = std::get_if<GaussianBackend>(&backend_)) return g->mu.covariance();
    return std::get<EmpiricalBackend>(backend_).second_moment_mu;
  }

  const GaussianMeasure* gaussian_source() const {
    const auto* g = std::get_if<GaussianBackend>(&backend_);
    return g ? &g->mu : nullptr;
  }
  const GaussianMeasure* gaussian_target() const {
    const auto* g = std::get_if<GaussianBackend>(&backend_);
    return g ? &g->nu : nullptr;
  }

  const EmpiricalMeasure* empirical_source() const {
    const auto* e = std::get_if<EmpiricalBackend>(&backend_);
    return e ? &e->mu : nullptr;
  }
  const EmpiricalMeasure* empirical_target() const {
    const auto* e = std::get_if<EmpiricalBackend>(&backend_);
    return e ? &e->nu : nullptr;
  }

  /// g_Δ(θⱼ) for every slice, in direction order.
  Vector slice_costs(const Matrix& delta) const {
    check_delta(delta);
    Vector costs(num_slices());
    run_slices([&](std::size_t j) { costs[j] = slice_term(delta, j, nullptr); });
    return costs;
  }

  /// Objective value and, optionally, one Clarke subgradient at Δ. Slice
  /// terms are reduced in direction order, so results do not depend on the
  /// thread count.
  Evaluation evaluate(const Matrix& delta, bool with_subgradient) const {
    check_delta(delta);
    const std::size_t m = num_slices();
    Vector costs(m);
    Matrix per_slice;
    if (with_subgradient) per_slice = Matrix(m, source_dim_);
    run_slices([&](std::size_t j) {
      costs[j] = slice_term(delta, j, with_subgradient ? &per_slice : nullptr);
    });
    Evaluation out;
    double total = 0.0;
    for (double c : costs) total += c;
    out.value = total / static_cast<double>(m);
    if (with_subgradient) {
      // Σⱼ θⱼ vⱼᵀ / m
      out.subgradient = transpose_times(directions_.directions, per_slice);
      out.subgradient *= 1.0 / static_cast<double>(m);
    }
    return out;
  }

  double value(const Matrix& delta) const { return evaluate(delta, false).value; }

 private:
  struct EmpiricalBackend {
    EmpiricalMeasure mu;
    EmpiricalMeasure nu;
    Matrix second_moment_mu;
    std::vector<detail::SortedAtoms> target;
    Vector target_m2;
    bool fast_path;
  };
  struct GaussianBackend {
    GaussianMeasure mu;
    GaussianMeasure nu;
    Vector target_m2;
  };

  static void check_dims(std::size_t dx, std::size_t dy, const DirectionSet& directions) {
    require(dx <= dy, ErrorKind::DimensionOrder,
            "source dimension " + std::to_string(dx) + " exceeds target dimension " + std::to_string(dy));
    require(directions.dim() == dy, ErrorKind::DimensionMismatch,
            "directions live in dimension " + std::to_string(directions.dim()) + ", target in " +
                std::to_string(dy));
  }

  static EmpiricalBackend build(EmpiricalMeasure mu, EmpiricalMeasure nu, const DirectionSet& directions) {
    check_dims(mu.dim(), nu.dim(), directions);
    Matrix r = second_moment_matrix(mu);
    const bool fast = mu.is_uniform() && nu.is_uniform() && mu.size() == nu.size();
    EmpiricalBackend b{std::move(mu), std::move(nu), std::move(r), {}, {}, fast};
    b.target.reserve(directions.size());
    b.target_m2.reserve(directions.size());
    for (std::size_t j = 0; j < directions.size(); ++j) {
      auto sorted = detail::sort_atoms(project(b.nu, directions[j]));
      b.target_m2.push_back(detail::sorted_correlation(sorted, sorted, Orientation::Monotone, b.nu.is_uniform()));
      b.target.push_back(std::move(sorted));
    }
    return b;
  }

  static GaussianBackend build(GaussianMeasure mu, GaussianMeasure nu, const DirectionSet& directions) {
    check_dims(mu.dim(), nu.dim(), directions);
    GaussianBackend b{std::move(mu), std::move(nu), {}};
    b.target_m2.reserve(directions.size());
    for (std::size_t j = 0; j < directions.size(); ++j)
      b.target_m2.push_back(quadratic_form(b.nu.covariance(), directions[j]));
    return b;
  }

  void set_dims(std::size_t dx, std::size_t dy, double m2_mu, double m2_nu) {
    source_dim_ = dx;
    target_dim_ = dy;
    m2_mu_ = m2_mu;
    m2_nu_ = m2_nu;
  }

  void check_delta(const Matrix& delta) const {
    require(delta.rows() == target_dim_ && delta.cols() == source_dim_, ErrorKind::DimensionMismatch,
            "aligner is " + delta.shape() + ", expected " + std::to_string(target_dim_) + "x" +
                std::to_string(source_dim_));
  }

  template <typename Body>
  void run_slices(Body&& body) const {
    std::size_t work = num_slices() * source_dim_;
    if (const auto* e = std::get_if<EmpiricalBackend>(&backend_)) work *= e->mu.size() + e->nu.size();
    // Thread start-up outweighs small batches.
    if (work < (std::size_t{1} << 16)) {
      for (std::size_t j = 0; j < num_slices(); ++j) body(j);
    } else {
      parallel_for(num_slices(), body);
    }
  }

  /// Cost of slice j. When `grad_rows` is set, stores vⱼ in its row j so that
  /// θⱼ vⱼᵀ is the slice's subgradient contribution.
  double slice_term(const Matrix& delta, std::size_t j, Matrix* grad_rows) const {
    const auto theta = directions_[j];
    const Vector w = multiply_transposed(delta, theta);
    if (const auto* g = std::get_if<GaussianBackend>(&backend_)) {
      const Vector sw = multiply(g->mu.covariance(), w);
      const double a = dot(w, sw);
      const double diff = a - g->target_m2[j];
      if (grad_rows) {
        auto row = grad_rows->row(j);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] = 4.0 * diff * sw[k];
      }
      return diff * diff;
    }
    return empirical_term(std::get<EmpiricalBackend>(backend_), w, j, grad_rows);
  }

  static double empirical_term(const EmpiricalBackend& b, const Vector& w, std::size_t j, Matrix* grad_rows) {
    const auto& pts = b.mu.points();
    const std::size_t n = pts.rows();
    Vector proj(n);
    for (std::size_t i = 0; i < n; ++i) proj[i] = dot(pts.row(i), w);
    const auto& y = b.target[j];
    const double bm2 = b.target_m2[j];

    if (!grad_rows && b.fast_path) {
      std::sort(proj.begin(), proj.end());
      double sq = 0.0;
      double mono = 0.0;
      double anti = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        sq += proj[k] * proj[k];
        mono += proj[k] * y.values[k];
        anti += proj[k] * y.values[n - 1 - k];
      }
      const double nn = static_cast<double>(n);
      return detail::combine_igw(sq / nn, bm2, mono / nn, anti / nn).igw_squared;
    }

    const auto x = detail::sort_atoms(proj, b.mu.weights());
    const double a = detail::sorted_correlation(x, x, Orientation::Monotone, b.mu.is_uniform());
    const auto r = detail::combine_igw(a, bm2, detail::sorted_correlation(x, y, Orientation::Monotone, b.fast_path),
                                       detail::sorted_correlation(x, y, Orientation::Antitone, b.fast_path));
    if (grad_rows) {
      // paired[i] = Σ_j π_ij y_j for source atom i under the chosen coupling,
      // so C_π θ = Σ_i x_i paired[i].
      Vector paired(n, 0.0);
      if (b.fast_path) {
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t yk = r.chosen == Orientation::Monotone ? k : n - 1 - k;
          paired[x.order[k]] = y.values[yk] * inv;
        }
      } else {
        detail::quantile_sweep(x.weights, y.weights, r.chosen, [&](std::size_t i, std::size_t jj, double mass) {
          paired[x.order[i]] += mass * y.values[jj];
        });
      }
      const double c = r.chosen == Orientation::Monotone ? r.correlation_monotone : r.correlation_antitone;
      const Vector rw = multiply(b.second_moment_mu, w);
      auto row = grad_rows->row(j);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] = 4.0 * a * rw[k];
      for (std::size_t i = 0; i < n; ++i) {
        const double coef = -4.0 * c * paired[i];
        if (coef == 0.0) continue;
        const auto xi = pts.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] += coef * xi[k];
      }
    }
    return r.igw_squared;
  }

  DirectionSet directions_;
  std::variant<EmpiricalBackend, GaussianBackend> backend_;
  std::size_t source_dim_ = 0;
  std::size_t target_dim_ = 0;
  double m2_mu_ = 0.0;
  double m2_nu_ = 0.0;
};

/// (1/m) Σⱼ g_Δ(θⱼ)
inline double mc_estimate(const SliceObjective& objective, const Matrix& delta) { return objective.value(delta); }

/// Number of slices whose projected source or target values contain exact
/// ties at Δ. The sorting shortcut is exact regardless; this is diagnostic.
inline std::size_t slices_with_ties(const SliceObjective& objective, const Matrix& delta) {
  const auto* mu = objective.empirical_source();
  const auto* nu = objective.empirical_target();
  if (!mu || !nu) return 0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < objective.num_slices(); ++j) {
    const auto theta = objective.directions()[j];
    if (has_duplicate_values(project(*mu, theta, delta)) || has_duplicate_values(project(*nu, theta))) ++count;
  }
  return count;
}

}  // namespace sigw
