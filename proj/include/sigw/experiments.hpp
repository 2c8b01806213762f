#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sigw/gaussian.hpp"
#include "sigw/random.hpp"
#include "sigw/slicing.hpp"
#include "sigw/stiefel.hpp"

namespace sigw {

/// Centered Gaussian Σ = SᵀS with S uniform on [0, 1]^{d×d}. Keeping S
/// lets samples be drawn as Sᵀz with z standard normal.
struct FactoredGaussian {
  Matrix factor;
  GaussianMeasure measure;
};

inline FactoredGaussian random_factored_gaussian(std::size_t dim, Rng& rng) {
  Matrix s(dim, dim);
  for (double& v : s.data()) v = rng.uniform();
  Matrix sigma = transpose_times(s, s);
  return {std::move(s), GaussianMeasure(std::move(sigma))};
}

/// n draws from N(0, SᵀS), one per row.
inline EmpiricalMeasure sample_gaussian(const Matrix& factor, std::size_t n, Rng& rng) {
  const std::size_t d = factor.rows();
  Matrix pts(n, d);
  Vector z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : z) v = rng.normal();
    const Vector x = multiply_transposed(factor, z);
    std::copy(x.begin(), x.end(), pts.row(i).begin());
  }
  return EmpiricalMeasure(std::move(pts));
}

inline double mean_of(const Vector& v) {
  require(!v.empty(), ErrorKind::EmptyMeasure, "mean of an empty list");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double median_of(Vector v) {
  require(!v.empty(), ErrorKind::EmptyMeasure, "median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Sample standard deviation (n − 1 denominator).
inline double stddev_of(const Vector& v) {
  require(v.size() >= 2, ErrorKind::TooFewItems, "standard deviation needs two values");
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y ≈ intercept + slope·x.
inline LineFit fit_line(const Vector& x, const Vector& y) {
  require(x.size() == y.size(), ErrorKind::LengthMismatch, "fit_line: x and y differ in length");
  require(x.size() >= 2, ErrorKind::TooFewItems, "fit_line needs two points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::InvalidArgument, "fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.rms_residual = std::sqrt(ss_res / static_cast<double>(x.size()));
  return f;
}

/// Slope of log(y) against log(x).
inline LineFit fit_loglog(const Vector& x, const Vector& y) {
  Vector lx(x.size());
  Vector ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorKind::InvalidArgument, "log-log fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

/// y ≈ C₁ + C₂·√(log n / n); intercept is C₁ and slope is C₂.
inline LineFit fit_rate(const Vector& n, const Vector& y) {
  Vector r(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) r[i] = std::sqrt(std::log(n[i]) / n[i]);
  return fit_line(r, y);
}

struct ErrorRow {
  std::size_t size = 0;  ///< m for slice sweeps, n for sample sweeps
  Vector errors;         ///< one per repetition
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline ErrorRow summarize(std::size_t size, Vector errors) {
  ErrorRow row;
  row.size = size;
  row.mean = mean_of(errors);
  row.median = median_of(errors);
  row.min = *std::min_element(errors.begin(), errors.end());
  row.max = *std::max_element(errors.begin(), errors.end());
  row.errors = std::move(errors);
  return row;
}

struct ExperimentSetup {
  std::size_t source_dim = 5;
  std::size_t target_dim = 10;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Riemannian;
  OptimizerConfig config = OptimizerConfig::riemannian_defaults();
};

/// The covariance pair used by a validation run: stream 0 of the seed for
/// the source, stream 1 for the target.
inline std::pair<FactoredGaussian, FactoredGaussian> experiment_gaussians(const ExperimentSetup& setup) {
  Rng rs = Rng::stream(setup.seed, 0);
  Rng rt = Rng::stream(setup.seed, 1);
  auto mu = random_factored_gaussian(setup.source_dim, rs);
  auto nu = random_factored_gaussian(setup.target_dim, rt);
  return {std::move(mu), std::move(nu)};
}

struct ValidationReport {
  double closed_form_squared = 0.0;
  std::vector<ErrorRow> rows;
  LineFit fit;  ///< log-log fit for slice sweeps, C₁ + C₂√(log n/n) for sample sweeps
};

/// Slice-count sweep on the Gaussian backend: for each m and repetition,
/// minimize the m-slice objective starting from the closed-form aligner and
/// record |estimate² − closed form²|.
inline ValidationReport validate_mc(const ExperimentSetup& setup, const std::vector<std::size_t>& m_grid,
                                    std::size_t reps) {
  require(!m_grid.empty() && reps >= 1, ErrorKind::InvalidArgument, "validate_mc needs a grid and reps >= 1");
  const auto [mu, nu] = experiment_gaussians(setup);
  const auto closed = sliced_igw_gaussian(mu.measure, nu.measure);
  OptimizerConfig cfg = setup.config;
  cfg.init = Initialization::from(closed.delta_star);

  ValidationReport report;
  report.closed_form_squared = closed.sliced_igw_squared;
  Vector sizes;
  Vector medians;
  for (std::size_t g = 0; g < m_grid.size(); ++g) {
    Vector errors(reps);
    parallel_for(reps, [&](std::size_t r) {
      const auto dirs = sample_directions(setup.target_dim, m_grid[g], stream_seed(stream_seed(setup.seed, 2 + g), r));
      const SliceObjective objective(mu.measure, nu.measure, dirs);
      const auto trace = run_optimizer(objective, setup.optimizer, cfg);
      errors[r] = std::abs(trace.final_objective - closed.sliced_igw_squared);
    });
    report.rows.push_back(summarize(m_grid[g], std::move(errors)));
    sizes.push_back(static_cast<double>(m_grid[g]));
    medians.push_back(report.rows.back().median);
  }
  if (sizes.size() >= 2) report.fit = fit_loglog(sizes, medians);
  return report;
}

/// Sample-size sweep: for each n and repetition, draw n points from each
/// Gaussian, minimize the m-slice empirical objective from the alignment of
/// the sample covariances and record |estimate − closed form| (unsquared).
inline ValidationReport validate_rate(const ExperimentSetup& setup, const std::vector<std::size_t>& n_grid,
                                      std::size_t m, std::size_t reps) {
  require(!n_grid.empty() && reps >= 1, ErrorKind::InvalidArgument, "validate_rate needs a grid and reps >= 1");
  const auto [mu, nu] = experiment_gaussians(setup);
  const double closed = std::sqrt(sliced_igw_gaussian(mu.measure, nu.measure).sliced_igw_squared);
  OptimizerConfig cfg = setup.config;
  cfg.init = Initialization::gaussian_alignment();

  ValidationReport report;
  report.closed_form_squared = closed * closed;
  Vector sizes;
  Vector medians;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    Vector errors(reps);
    parallel_for(reps, [&](std::size_t r) {
      const std::uint64_t rep_seed = stream_seed(stream_seed(setup.seed, 2 + g), r);
      Rng rx = Rng::stream(rep_seed, 0);
      Rng ry = Rng::stream(rep_seed, 1);
      const auto x = sample_gaussian(mu.factor, n_grid[g], rx);
      const auto y = sample_gaussian(nu.factor, n_grid[g], ry);
      const auto dirs = sample_directions(setup.target_dim, m, stream_seed(rep_seed, 2));
      const SliceObjective objective(x, y, dirs);
      const auto trace = run_optimizer(objective, setup.optimizer, cfg);
      errors[r] = std::abs(std::sqrt(std::max(trace.final_objective, 0.0)) - closed);
    });
    report.rows.push_back(summarize(n_grid[g], std::move(errors)));
    sizes.push_back(static_cast<double>(n_grid[g]));
    medians.push_back(report.rows.back().median);
  }
  if (sizes.size() >= 2) report.fit = fit_rate(sizes, medians);
  return report;
}

/// Powers of two 2^lo, …, 2^hi.
inline std::vector<std::size_t> power_grid(unsigned lo, unsigned hi) {
  std::vector<std::size_t> g;
  for (unsigned e = lo; e <= hi; ++e) g.push_back(std::size_t{1} << e);
  return g;
}

}  // namespace sigw
