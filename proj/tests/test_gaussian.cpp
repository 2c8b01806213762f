#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sigw/experiments.hpp"
#include "sigw/gaussian.hpp"

using sigw::ErrorKind;
using sigw::GaussianMeasure;
using sigw::Matrix;
using sigw::Rng;
using sigw::SliceObjective;
using sigw::Vector;

namespace {

/// Closed form rebuilt from spectra known by construction, so the
/// eigensolver is not involved.
double closed_form_from_spectra(Vector a, Vector b) {
  std::sort(a.rbegin(), a.rend());
  std::sort(b.rbegin(), b.rend());
  const std::size_t dy = b.size();
  a.resize(dy, 0.0);
  double ta = 0.0;
  double tb = 0.0;
  double gap = 0.0;
  for (std::size_t i = 0; i < dy; ++i) {
    ta += a[i];
    tb += b[i];
    gap += (a[i] - b[i]) * (a[i] - b[i]);
  }
  const double d = static_cast<double>(dy);
  return ((ta - tb) * (ta - tb) + 2.0 * gap) / (d * (d + 2.0));
}

Matrix conjugate(const Matrix& sigma, const Matrix& o) { return o * sigma * o.transpose(); }

}  // namespace

TEST(SlicedGaussian, EqualCovariances) {
  Rng rng(1);
  const GaussianMeasure g(oracle::random_psd(4, rng));
  const auto r = sigw::sliced_igw_gaussian(g, g);
  EXPECT_NEAR(r.sliced_igw_squared, 0.0, 1e-14);
  EXPECT_LE(sigw::stiefel_residual(r.delta_star), 1e-10);
  // Δ* aligns the eigenbases: Δ*ᵀ Σ_ν Δ* = Σ_μ.
  const Matrix back = sigw::transpose_times(r.delta_star, g.covariance() * r.delta_star);
  EXPECT_LT(oracle::max_abs_diff(back, g.covariance()), 1e-10);
}

TEST(SlicedGaussian, ScaledIdentity) {
  for (std::size_t d = 1; d <= 6; ++d) {
    Matrix two = Matrix::identity(d);
    two *= 2.0;
    EXPECT_NEAR(sigw::sliced_igw_gaussian(GaussianMeasure(Matrix::identity(d)), GaussianMeasure(two))
                    .sliced_igw_squared,
                1.0, 1e-14);
  }
}

TEST(SlicedGaussian, PaddedSpectrum) {
  const auto r = sigw::sliced_igw_gaussian(GaussianMeasure(Matrix{{1.0}}), GaussianMeasure(Matrix::identity(2)));
  EXPECT_NEAR(r.sliced_igw_squared, 3.0 / 8.0, 1e-15);
  EXPECT_NEAR(closed_form_from_spectra({1.0}, {1.0, 1.0}), 3.0 / 8.0, 1e-15);
}

TEST(SlicedGaussian, DiagonalSpectraMatchRestatement) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t dx = 1 + rng.below(4);
    const std::size_t dy = dx + rng.below(4);
    Vector a(dx);
    Vector b(dy);
    for (double& v : a) v = rng.uniform(0.0, 3.0);
    for (double& v : b) v = rng.uniform(0.0, 3.0);
    const Matrix oa = oracle::random_stiefel(dx, dx, rng);
    const Matrix ob = oracle::random_stiefel(dy, dy, rng);
    const GaussianMeasure mu(sigw::symmetric_part(conjugate(Matrix::diagonal(a), oa)));
    const GaussianMeasure nu(sigw::symmetric_part(conjugate(Matrix::diagonal(b), ob)));
    const auto r = sigw::sliced_igw_gaussian(mu, nu);
    EXPECT_NEAR(r.sliced_igw_squared, closed_form_from_spectra(a, b), 1e-10);
    EXPECT_LE(sigw::stiefel_residual(r.delta_star), 1e-10);
  }
}

TEST(SlicedGaussian, DimensionOrder) {
  EXPECT_EQ(error_kind_of([] {
              sigw::sliced_igw_gaussian(GaussianMeasure(Matrix::identity(3)), GaussianMeasure(Matrix::identity(2)));
            }),
            ErrorKind::DimensionOrder);
}

TEST(SlicedGaussian, SymmetricWhenSquare) {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const GaussianMeasure a(oracle::random_psd(4, rng));
    const GaussianMeasure b(oracle::random_psd(4, rng));
    EXPECT_NEAR(sigw::sliced_igw_gaussian(a, b).sliced_igw_squared, sigw::sliced_igw_gaussian(b, a).sliced_igw_squared,
                1e-10);
  }
}

TEST(SlicedGaussian, RotationInvariance) {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    const GaussianMeasure a(oracle::random_psd(3, rng));
    const Matrix sb = oracle::random_psd(5, rng);
    const Matrix o = oracle::random_stiefel(5, 5, rng);
    const GaussianMeasure b(sb);
    const GaussianMeasure rb(sigw::symmetric_part(conjugate(sb, o)));
    EXPECT_NEAR(sigw::sliced_igw_gaussian(a, b).sliced_igw_squared,
                sigw::sliced_igw_gaussian(a, rb).sliced_igw_squared, 1e-10);
    EXPECT_NEAR(sigw::igw_gaussian(a, b), sigw::igw_gaussian(a, rb), 1e-10);
  }
}

TEST(SlicedGaussian, DeltaStarIsNoWorseThanRandomAligners) {
  Rng rng(5);
  const GaussianMeasure mu(oracle::random_psd(3, rng));
  const GaussianMeasure nu(oracle::random_psd(5, rng));
  const auto closed = sigw::sliced_igw_gaussian(mu, nu);
  const SliceObjective obj(mu, nu, sigw::sample_directions(5, 4000, 6));
  const Vector at_star = obj.slice_costs(closed.delta_star);
  for (int t = 0; t < 100; ++t) {
    const Matrix d = sigw::qr_positive(oracle::random_gaussian_matrix(5, 3, rng)).q;
    const Vector at_d = obj.slice_costs(d);
    Vector diff(at_d.size());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = at_d[j] - at_star[j];
    const double se = sigw::stddev_of(diff) / std::sqrt(static_cast<double>(diff.size()));
    EXPECT_GE(sigw::mean_of(at_d), sigw::mean_of(at_star) - 2.0 * se);
  }
}

TEST(SlicedGaussian, McConvergesAtDeltaStar) {
  sigw::ExperimentSetup setup;
  setup.seed = 31;
  const auto [mu, nu] = sigw::experiment_gaussians(setup);
  const auto closed = sigw::sliced_igw_gaussian(mu.measure, nu.measure);
  Vector medians;
  for (std::size_t m : {64u, 1024u, 16384u}) {
    Vector errs;
    for (std::uint64_t s = 0; s < 25; ++s) {
      const SliceObjective obj(mu.measure, nu.measure, sigw::sample_directions(10, m, s + 1000 * m));
      errs.push_back(std::abs(sigw::mc_estimate(obj, closed.delta_star) - closed.sliced_igw_squared));
    }
    medians.push_back(sigw::median_of(errs));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(IgwGaussian, WorkedExamples) {
  Rng rng(7);
  const GaussianMeasure g(oracle::random_psd(3, rng));
  EXPECT_NEAR(sigw::igw_gaussian(g, g), 0.0, 1e-12);
  EXPECT_NEAR(sigw::igw_gaussian(GaussianMeasure(Matrix::identity(2)),
                                 GaussianMeasure(Matrix::diagonal(Vector{4.0, 1.0}))),
              3.0, 1e-14);
  for (std::size_t d = 1; d <= 5; ++d)
    for (double c : {0.0, 0.5, 3.0}) {
      Matrix s = Matrix::identity(d);
      s *= c;
      EXPECT_NEAR(sigw::igw_gaussian(GaussianMeasure(Matrix::identity(d)), GaussianMeasure(s)),
                  std::sqrt(static_cast<double>(d)) * std::abs(1.0 - c), 1e-13);
    }
}

TEST(ProjectedGaussian, WorkedExamples) {
  const Matrix smu{{2.0}};
  const Matrix snu{{3.0, 0.0}, {0.0, 1.0}};
  const Matrix delta{{1.0}, {0.0}};
  EXPECT_DOUBLE_EQ(sigw::projected_igw_gaussian(smu, snu, delta, Vector{1.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(sigw::projected_igw_gaussian(Matrix{{3.0}}, snu, delta, Vector{1.0, 0.0}), 0.0);
  const Vector theta{0.6, 0.8};
  const double b = 0.36 * 3.0 + 0.64 * 1.0;
  EXPECT_NEAR(sigw::projected_igw_gaussian(Matrix{{0.0}}, snu, delta, theta), b * b, 1e-15);
  EXPECT_EQ(error_kind_of([&] { sigw::projected_igw_gaussian(smu, snu, delta, Vector{1.0}); }),
            ErrorKind::DimensionMismatch);
}

TEST(GaussianPseudometric, TriangleInequality) {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.below(6);
    const GaussianMeasure a(oracle::random_psd(d, rng));
    const GaussianMeasure b(oracle::random_psd(d, rng));
    const GaussianMeasure c(oracle::random_psd(d, rng));
    const double ab = std::sqrt(sigw::sliced_igw_gaussian(a, b).sliced_igw_squared);
    const double bc = std::sqrt(sigw::sliced_igw_gaussian(b, c).sliced_igw_squared);
    const double ac = std::sqrt(sigw::sliced_igw_gaussian(a, c).sliced_igw_squared);
    EXPECT_LE(ac, ab + bc + 1e-12);
  }
}
