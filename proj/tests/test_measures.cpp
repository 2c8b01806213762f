#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sigw/measures.hpp"

using sigw::EmpiricalMeasure;
using sigw::ErrorKind;
using sigw::GaussianMeasure;
using sigw::Matrix;
using sigw::Rng;
using sigw::UnivariateSample;
using sigw::Vector;

TEST(EmpiricalMeasure, Validation) {
  EXPECT_EQ(error_kind_of([] { EmpiricalMeasure(Matrix(0, 2)); }), ErrorKind::EmptyMeasure);
  EXPECT_EQ(error_kind_of([] { EmpiricalMeasure(Matrix{{1.0}, {2.0}}, Vector{0.7, 0.7}); }),
            ErrorKind::InvalidWeights);
  EXPECT_EQ(error_kind_of([] { EmpiricalMeasure(Matrix{{1.0}, {2.0}}, Vector{1.5, -0.5}); }),
            ErrorKind::InvalidWeights);
  EXPECT_EQ(error_kind_of([] { EmpiricalMeasure(Matrix{{1.0}, {2.0}}, Vector{1.0}); }), ErrorKind::LengthMismatch);
  const EmpiricalMeasure m(Matrix{{1.0}, {2.0}}, Vector{0.25, 0.75});
  EXPECT_FALSE(m.is_uniform());
  EXPECT_TRUE(EmpiricalMeasure(Matrix{{1.0}, {2.0}}).is_uniform());
}

TEST(GaussianMeasure, RejectsIndefiniteCovariance) {
  EXPECT_EQ(error_kind_of([] { GaussianMeasure(Matrix{{1.0, 0.0}, {0.0, -1.0}}); }), ErrorKind::NotPSD);
  EXPECT_EQ(error_kind_of([] { GaussianMeasure(Matrix(2, 3)); }), ErrorKind::DimensionMismatch);
}

TEST(SecondMoment, WorkedExamples) {
  EXPECT_EQ(sigw::second_moment(EmpiricalMeasure(Matrix{{0.0}})), 0.0);
  EXPECT_DOUBLE_EQ(sigw::second_moment(EmpiricalMeasure(Matrix{{-1.0}, {1.0}})), 1.0);
  EXPECT_DOUBLE_EQ(sigw::second_moment(EmpiricalMeasure(Matrix{{1.0, 0.0}, {0.0, 2.0}})), 2.5);
}

TEST(SecondMomentMatrix, WorkedExamples) {
  EXPECT_EQ(sigw::second_moment_matrix(EmpiricalMeasure(Matrix{{0.0, 0.0}})), Matrix(2, 2));
  EXPECT_EQ(sigw::second_moment_matrix(EmpiricalMeasure(Matrix{{-1.0, 0.0}, {1.0, 0.0}})),
            (Matrix{{1.0, 0.0}, {0.0, 0.0}}));
  EXPECT_EQ(sigw::second_moment_matrix(EmpiricalMeasure(Matrix{{1.0, 1.0}, {1.0, -1.0}})), Matrix::identity(2));
}

TEST(Project, WorkedExamples) {
  const EmpiricalMeasure m(Matrix{{1.0, 2.0}, {3.0, 4.0}});
  const Vector e1{1.0, 0.0};
  EXPECT_EQ(sigw::project(m, e1).values(), (Vector{1.0, 3.0}));

  const double s = 1.0 / std::sqrt(2.0);
  const auto diag = sigw::project(EmpiricalMeasure(Matrix{{1.0, 0.0}, {0.0, 1.0}}), Vector{s, s});
  EXPECT_DOUBLE_EQ(diag.values()[0], s);
  EXPECT_DOUBLE_EQ(diag.values()[1], s);
}

TEST(Project, PaddedIdentityAlignerUsesLeadingCoordinates) {
  Rng rng(3);
  const EmpiricalMeasure m(oracle::random_matrix(6, 2, rng));
  const Vector theta{0.6, 0.0, 0.8};
  const auto aligned = sigw::project(m, theta, Matrix::padded_identity(3, 2));
  const auto direct = sigw::project(m, Vector{0.6, 0.0});
  EXPECT_EQ(aligned.values(), direct.values());
}

TEST(Project, DimensionErrors) {
  const EmpiricalMeasure m(Matrix{{1.0, 2.0}});
  EXPECT_EQ(error_kind_of([&] { sigw::project(m, Vector{1.0, 0.0, 0.0}); }), ErrorKind::DimensionMismatch);
  EXPECT_EQ(error_kind_of([&] { sigw::project(m, Vector{1.0, 0.0, 0.0}, Matrix(3, 3)); }),
            ErrorKind::DimensionMismatch);
}

TEST(Project, CarriesWeights) {
  const EmpiricalMeasure m(Matrix{{1.0}, {2.0}}, Vector{0.25, 0.75});
  EXPECT_EQ(sigw::project(m, Vector{1.0}).weights(), (Vector{0.25, 0.75}));
}

TEST(Center, WorkedExamples) {
  const auto a = sigw::center(EmpiricalMeasure(Matrix{{0.0}, {2.0}}));
  EXPECT_EQ(a.points(), (Matrix{{-1.0}, {1.0}}));
  const auto b = sigw::center(EmpiricalMeasure(Matrix{{1.0, 1.0}, {3.0, 5.0}}));
  EXPECT_EQ(b.points(), (Matrix{{-1.0, -2.0}, {1.0, 2.0}}));
  const Matrix centered{{-1.0, 1.0}, {1.0, -1.0}};
  EXPECT_EQ(sigw::center(EmpiricalMeasure(centered)).points(), centered);
}

TEST(EmpiricalCovariance, WorkedExamples) {
  EXPECT_EQ(sigw::empirical_covariance(EmpiricalMeasure(Matrix{{3.0, 4.0}})).covariance(), Matrix(2, 2));
  EXPECT_EQ(sigw::empirical_covariance(EmpiricalMeasure(Matrix{{-1.0}, {1.0}})).covariance(), Matrix{{1.0}});
  EXPECT_EQ(sigw::empirical_covariance(EmpiricalMeasure(Matrix{{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}, {2.0, 2.0}}))
                .covariance(),
            Matrix::identity(2));
}

TEST(MeasureProperties, RandomMeasures) {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(20);
    const std::size_t d = 1 + rng.below(5);
    Vector w(n);
    double total = 0.0;
    for (double& v : w) total += (v = rng.uniform() + 0.01);
    for (double& v : w) v /= total;
    const EmpiricalMeasure m(oracle::random_matrix(n, d, rng, -3.0, 3.0), w);

    const double m2 = sigw::second_moment(m);
    const Matrix r = sigw::second_moment_matrix(m);
    EXPECT_NEAR(r.trace(), m2, 1e-12 * std::max(m2, 1.0));

    Vector theta(d);
    for (double& v : theta) v = rng.normal();
    const double nt = sigw::norm(theta);
    for (double& v : theta) v /= nt;
    const double projected = sigw::second_moment(sigw::project(m, theta));
    EXPECT_NEAR(projected, sigw::quadratic_form(r, theta), 1e-10 * std::max(projected, 1.0));

    const Vector mean = sigw::weighted_mean(sigw::center(m));
    for (double v : mean) EXPECT_NEAR(v, 0.0, 1e-12);

    Matrix scaled = m.points();
    scaled *= 2.5;
    const auto a = sigw::project(m, theta).values();
    const auto b = sigw::project(EmpiricalMeasure(scaled, w), theta).values();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(b[i], 2.5 * a[i], 1e-12 * std::max(1.0, std::abs(b[i])));
  }
}

TEST(UnivariateSample, Validation) {
  EXPECT_EQ(error_kind_of([] { UnivariateSample(Vector{}); }), ErrorKind::EmptyMeasure);
  EXPECT_EQ(error_kind_of([] { UnivariateSample(Vector{1.0, 2.0}, Vector{0.5, 0.6}); }), ErrorKind::InvalidWeights);
  const auto r = sigw::reflect(UnivariateSample(Vector{1.0, -2.0}));
  EXPECT_EQ(r.values(), (Vector{-1.0, 2.0}));
}
