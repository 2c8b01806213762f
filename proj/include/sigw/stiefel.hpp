#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sigw/gaussian.hpp"
#include "sigw/linalg.hpp"
#include "sigw/slicing.hpp"

namespace sigw {

/// A d_y x d_x matrix together with its distance from the Stiefel manifold,
/// ‖ΔᵀΔ − I‖_F.
class StiefelPoint {
 public:
  StiefelPoint() = default;
  explicit StiefelPoint(Matrix matrix) : matrix_(std::move(matrix)), residual_(stiefel_residual(matrix_)) {}

  const Matrix& matrix() const noexcept { return matrix_; }
  double feasibility_residual() const noexcept { return residual_; }

 private:
  Matrix matrix_;
  double residual_ = 0.0;
};

/// Step-size schedule for the constraint-dissolving subgradient method.
struct StepRule {
  enum class Kind { Theoretical, Practical };
  Kind kind = Kind::Practical;
  double c = 1.0;  ///< Theoretical: η_k = min(1/(2β), c/k)

  static StepRule theoretical(double c) { return {Kind::Theoretical, c}; }
  /// η_k = min(0.01 / max(‖G_k‖_F, 1), 5000 / (k + 1))
  static StepRule practical() { return {Kind::Practical, 0.0}; }

  double step(std::size_t k, double beta, double grad_norm) const {
    const double kk = static_cast<double>(k);
    if (kind == Kind::Theoretical) return std::min(1.0 / (2.0 * beta), c / kk);
    return std::min(0.01 / std::max(grad_norm, 1.0), 5000.0 / (kk + 1.0));
  }
};

enum class InitKind { PaddedIdentity, GaussianAlignment, Given };

struct Initialization {
  InitKind kind = InitKind::PaddedIdentity;
  Matrix given;

  static Initialization padded_identity() { return {InitKind::PaddedIdentity, {}}; }
  static Initialization gaussian_alignment() { return {InitKind::GaussianAlignment, {}}; }
  static Initialization from(Matrix delta) { return {InitKind::Given, std::move(delta)}; }
};

struct OptimizerConfig {
  double beta = 100.0;
  StepRule step_rule = StepRule::practical();
  std::size_t max_iters = 2500;
  double grad_tol = 5e-6;
  std::size_t backtrack_max = 12;
  double backtrack_alpha = 1e-4;
  Initialization init = Initialization::padded_identity();

  /// β = 100, 2500 iterations, practical steps.
  static OptimizerConfig constraint_dissolving_defaults() { return {}; }

  /// 500 iterations, tolerance 5e-6, 12 halvings, Armijo constant 1e-4.
  static OptimizerConfig riemannian_defaults() {
    OptimizerConfig cfg;
    cfg.max_iters = 500;
    return cfg;
  }
};

enum class ConvergedReason { MaxIters, GradTol, BacktrackExhausted };

inline const char* to_string(ConvergedReason r) {
  switch (r) {
    case ConvergedReason::MaxIters: return "MaxIters";
    case ConvergedReason::GradTol: return "GradTol";
    case ConvergedReason::BacktrackExhausted: return "BacktrackExhausted";
  }
  return "Unknown";
}

struct IterateRecord {
  std::size_t iteration = 0;
  double objective = 0.0;  ///< F at the iterate (at A(Δ_k) for the dissolving method)
  double feasibility_residual = 0.0;
  double subgradient_norm = 0.0;
};

struct OptimizerTrace {
  std::vector<IterateRecord> iterates;
  StiefelPoint final;       ///< point on the manifold used for reporting
  double final_objective = 0.0;  ///< F at `final`
  ConvergedReason converged_reason = ConvergedReason::MaxIters;
  /// Dissolving method only: last raw iterate Δ_{K+1} and H there.
  std::optional<StiefelPoint> raw_final;
  std::optional<double> raw_h;
  double wall_time_seconds = 0.0;
};

/// F(Δ) = (1/m) Σⱼ IGW(((θⱼ)ᵀΔ)♯μ, θⱼᵀ♯ν)², defined for any d_y x d_x matrix.
inline double objective_f(const SliceObjective& objective, const Matrix& delta) { return objective.value(delta); }

/// One element of the Clarke subdifferential of F at Δ. Per slice this is
/// 4(θᵀΔRΔᵀθ) θθᵀΔR − 4(θᵀΔC_πθ) θθᵀC_πᵀ with π the coupling chosen by the
/// univariate solver (monotone on ties); Gaussian inputs give the gradient.
inline Matrix subgrad_f(const SliceObjective& objective, const Matrix& delta) {
  return objective.evaluate(delta, true).subgradient;
}

/// A(Δ) = (1/8) Δ (15 I − 10 ΔᵀΔ + 3 (ΔᵀΔ)²)
inline Matrix dissolve_map(const Matrix& delta) {
  const Matrix gram = transpose_times(delta, delta);
  Matrix k = gram * gram * 3.0 - gram * 10.0;
  for (std::size_t i = 0; i < k.rows(); ++i) k(i, i) += 15.0;
  return delta * k * 0.125;
}

/// DA_[Δ](Ξ) = (1/8) Ξ (15 I − 10 ΔᵀΔ + 3 (ΔᵀΔ)²) − Δ Φ(ΔᵀΞ)
///             + (3/2) Δ Φ(Φ(ΔᵀΞ)(ΔᵀΔ − I)),   Φ(M) = (M + Mᵀ)/2.
/// The map is self-adjoint, so it also transports subgradients.
inline Matrix dissolve_jacobian_apply(const Matrix& delta, const Matrix& xi) {
  require(delta.rows() == xi.rows() && delta.cols() == xi.cols(), ErrorKind::DimensionMismatch,
          "dissolve_jacobian_apply: " + delta.shape() + " vs " + xi.shape());
  Matrix gram = transpose_times(delta, delta);
  Matrix k = gram * gram * 3.0 - gram * 10.0;
  for (std::size_t i = 0; i < k.rows(); ++i) k(i, i) += 15.0;
  const Matrix p = symmetric_part(transpose_times(delta, xi));
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) -= 1.0;
  Matrix inner = p * -1.0 + symmetric_part(p * gram) * 1.5;
  return xi * k * 0.125 + delta * inner;
}

inline double penalty(const Matrix& delta) {
  const double r = stiefel_residual(delta);
  return r * r;
}

/// H(Δ) = F(A(Δ)) + (β/4) ‖ΔᵀΔ − I‖²_F
inline double objective_h(const SliceObjective& objective, const Matrix& delta, double beta) {
  return objective_f(objective, dissolve_map(delta)) + 0.25 * beta * penalty(delta);
}

namespace detail {

inline Matrix penalty_gradient(const Matrix& delta, double beta) {
  Matrix gram = transpose_times(delta, delta);
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) -= 1.0;
  return delta * gram * beta;
}

}  // namespace detail

/// DA_[Δ](∂F(A(Δ))) + βΔ(ΔᵀΔ − I)
inline Matrix subgrad_h(const SliceObjective& objective, const Matrix& delta, double beta) {
  require(beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
  return dissolve_jacobian_apply(delta, subgrad_f(objective, dissolve_map(delta))) +
         detail::penalty_gradient(delta, beta);
}

/// Tangent-space projection Z − ½Δ(ΔᵀZ + ZᵀΔ) at a point on the manifold.
inline Matrix riemannian_grad(const StiefelPoint& delta, const Matrix& s) {
  require(delta.feasibility_residual() <= 1e-10, ErrorKind::InfeasiblePoint,
          "point is off the manifold by " + std::to_string(delta.feasibility_residual()));
  const Matrix& d = delta.matrix();
  require(d.rows() == s.rows() && d.cols() == s.cols(), ErrorKind::DimensionMismatch,
          "riemannian_grad: " + d.shape() + " vs " + s.shape());
  return s - d * symmetric_part(transpose_times(d, s));
}

struct TheoreticalConstants {
  double alpha = 0.0;
  double l1 = 0.0;
  double beta_min = 0.0;
};

/// α = 4M₂(μ)√(217/216)(M₂(ν) + (217/216)M₂(μ)),
/// L_R = 4M₂(μ)√(1+R)(M₂(ν) + M₂(μ)(1+R)) at R = 1, and
/// β_min = max(162α, 2L₁).
inline TheoreticalConstants theoretical_constants(double m2_mu, double m2_nu) {
  constexpr double ratio = 217.0 / 216.0;
  TheoreticalConstants c;
  c.alpha = 4.0 * m2_mu * std::sqrt(ratio) * (m2_nu + ratio * m2_mu);
  c.l1 = 4.0 * m2_mu * std::sqrt(2.0) * (m2_nu + 2.0 * m2_mu);
  c.beta_min = std::max(162.0 * c.alpha, 2.0 * c.l1);
  return c;
}

inline TheoreticalConstants theoretical_constants(const SliceObjective& objective) {
  return theoretical_constants(objective.m2_mu(), objective.m2_nu());
}

/// Starting aligner for `init`. GaussianAlignment uses the closed-form
/// optimizer between the covariances (empirical covariances for samples).
inline Matrix initial_point(const SliceObjective& objective, const Initialization& init,
                            const std::optional<GaussianMeasure>& mu_cov = std::nullopt,
                            const std::optional<GaussianMeasure>& nu_cov = std::nullopt) {
  const std::size_t dy = objective.target_dim();
  const std::size_t dx = objective.source_dim();
  switch (init.kind) {
    case InitKind::PaddedIdentity: return Matrix::padded_identity(dy, dx);
    case InitKind::Given:
      require(init.given.rows() == dy && init.given.cols() == dx, ErrorKind::DimensionMismatch,
              "initial aligner is " + init.given.shape());
      return init.given;
    case InitKind::GaussianAlignment: {
      if (mu_cov && nu_cov) return sliced_igw_gaussian(*mu_cov, *nu_cov).delta_star;
      if (const auto* mu = objective.gaussian_source())
        return sliced_igw_gaussian(*mu, *objective.gaussian_target()).delta_star;
      const auto* mu = objective.empirical_source();
      return sliced_igw_gaussian(empirical_covariance(*mu), empirical_covariance(*objective.empirical_target()))
          .delta_star;
    }
  }
  return Matrix::padded_identity(dy, dx);
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Subgradient method on the constraint-dissolving objective H:
/// Δ_{k+1} = Δ_k − η_k (DA_[Δ_k](S_k) + βΔ_k(Δ_kᵀΔ_k − I)), S_k ∈ ∂F(A(Δ_k)).
/// Runs the full iteration budget. The reported point is the Q factor of the
/// last iterate.
inline OptimizerTrace run_cd_subgradient(const SliceObjective& objective, const OptimizerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  require(cfg.beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
  Matrix delta = initial_point(objective, cfg.init);
  const double init_residual = stiefel_residual(delta);
  require(init_residual <= 1.0 / 6.0, ErrorKind::InfeasibleInit,
          "initial residual " + std::to_string(init_residual) + " exceeds 1/6");

  OptimizerTrace trace;
  if (objective.m2_mu() == 0.0) {
    trace.final = StiefelPoint(qr_positive(delta).q);
    trace.final_objective = objective_f(objective, trace.final.matrix());
    trace.converged_reason = ConvergedReason::GradTol;
    trace.wall_time_seconds = detail::seconds_since(start);
    return trace;
  }

  trace.iterates.reserve(cfg.max_iters);
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    const Matrix a = dissolve_map(delta);
    const auto eval = objective.evaluate(a, true);
    const Matrix g = dissolve_jacobian_apply(delta, eval.subgradient) + detail::penalty_gradient(delta, cfg.beta);
    const double gnorm = g.frobenius_norm();
    trace.iterates.push_back({k, eval.value, stiefel_residual(delta), gnorm});
    const double eta = cfg.step_rule.step(k, cfg.beta, gnorm);
    delta -= g * eta;
  }
  trace.converged_reason = ConvergedReason::MaxIters;
  trace.raw_final = StiefelPoint(delta);
  trace.raw_h = objective_h(objective, delta, cfg.beta);
  trace.final = StiefelPoint(qr_positive(delta).q);
  trace.final_objective = objective_f(objective, trace.final.matrix());
  trace.wall_time_seconds = detail::seconds_since(start);
  return trace;
}

/// Riemannian subgradient method with Armijo backtracking (η = 1, halved up
/// to `backtrack_max` times) and the QR retraction.
inline OptimizerTrace run_riemannian_subgradient(const SliceObjective& objective, const OptimizerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  StiefelPoint point(initial_point(objective, cfg.init));
  require(point.feasibility_residual() <= 1e-10, ErrorKind::InfeasibleInit,
          "initial point is off the manifold by " + std::to_string(point.feasibility_residual()));

  OptimizerTrace trace;
  double value = objective_f(objective, point.matrix());
  if (objective.m2_mu() == 0.0) {
    trace.final = point;
    trace.final_objective = value;
    trace.converged_reason = ConvergedReason::GradTol;
    trace.wall_time_seconds = detail::seconds_since(start);
    return trace;
  }

  trace.converged_reason = ConvergedReason::MaxIters;
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    const Matrix s = subgrad_f(objective, point.matrix());
    const Matrix g = riemannian_grad(point, s);
    const double gnorm = g.frobenius_norm();
    trace.iterates.push_back({k, value, point.feasibility_residual(), gnorm});
    if (gnorm < cfg.grad_tol) {
      trace.converged_reason = ConvergedReason::GradTol;
      break;
    }
    const double decrease = cfg.backtrack_alpha * gnorm * gnorm;
    double eta = 1.0;
    bool accepted = false;
    for (std::size_t l = 0; l < cfg.backtrack_max; ++l) {
      StiefelPoint trial(qr_positive(point.matrix() - g * eta).q);
      const double trial_value = objective_f(objective, trial.matrix());
      if (trial_value <= value - eta * decrease) {
        point = std::move(trial);
        value = trial_value;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      trace.converged_reason = ConvergedReason::BacktrackExhausted;
      break;
    }
  }
  trace.final = point;
  trace.final_objective = value;
  trace.wall_time_seconds = detail::seconds_since(start);
  return trace;
}

enum class OptimizerKind { ConstraintDissolving, Riemannian };

inline OptimizerTrace run_optimizer(const SliceObjective& objective, OptimizerKind kind, const OptimizerConfig& cfg) {
  return kind == OptimizerKind::Riemannian ? run_riemannian_subgradient(objective, cfg)
                                           : run_cd_subgradient(objective, cfg);
}

}  // namespace sigw
