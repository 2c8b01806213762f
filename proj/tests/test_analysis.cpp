#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sigw/analysis.hpp"

using sigw::DistanceMatrix;
using sigw::EmpiricalMeasure;
using sigw::ErrorKind;
using sigw::GaussianMeasure;
using sigw::Matrix;
using sigw::Partition;
using sigw::Rng;
using sigw::Vector;

namespace {

DistanceMatrix distances_of(const Matrix& pts) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < pts.rows(); ++i) labels.push_back("p" + std::to_string(i));
  return DistanceMatrix(labels, oracle::euclidean_distances(pts));
}

Matrix blobs(std::size_t per, std::size_t k, double spread, Rng& rng, Partition& truth) {
  Matrix pts(per * k, 2);
  truth.clear();
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t i = 0; i < per; ++i) {
      const std::size_t r = c * per + i;
      pts(r, 0) = 20.0 * std::cos(2.0 * c) + spread * rng.normal();
      pts(r, 1) = 20.0 * std::sin(2.0 * c) + spread * rng.normal();
      truth.push_back(static_cast<int>(c));
    }
  return pts;
}

Partition relabel(const Partition& p, const std::vector<int>& perm) {
  Partition out;
  for (int v : p) out.push_back(perm[static_cast<std::size_t>(v)]);
  return out;
}

}  // namespace

TEST(DistanceMatrix, Validation) {
  EXPECT_EQ(error_kind_of([] { DistanceMatrix({"a", "b"}, Matrix{{0.0, 1.0}, {2.0, 0.0}}); }),
            ErrorKind::NonSymmetric);
  EXPECT_EQ(error_kind_of([] { DistanceMatrix({"a", "b"}, Matrix{{1.0, 1.0}, {1.0, 0.0}}); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(error_kind_of([] { DistanceMatrix({"a"}, Matrix{{0.0, 1.0}, {1.0, 0.0}}); }),
            ErrorKind::DimensionMismatch);
}

TEST(AdjustedRandIndex, WorkedExamples) {
  const Partition a{0, 0, 1, 1, 2};
  EXPECT_DOUBLE_EQ(sigw::adjusted_rand_index(a, a), 1.0);
  EXPECT_DOUBLE_EQ(sigw::adjusted_rand_index(a, Partition{5, 5, 3, 3, 9}), 1.0);

  const Partition one(6, 0);
  const Partition singletons{0, 1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(sigw::adjusted_rand_index(one, singletons), 0.0);

  // Contingency [[1,1],[0,2]]: index 1, row term 2, column term 3, 6 pairs,
  // so expected 1 and the adjusted value is 0.
  const Partition p{0, 0, 1, 1};
  const Partition q{0, 1, 1, 1};
  EXPECT_DOUBLE_EQ(oracle::pair_enumeration_ari(p, q), 0.0);
  EXPECT_DOUBLE_EQ(sigw::adjusted_rand_index(p, q), 0.0);

  EXPECT_EQ(error_kind_of([] { sigw::adjusted_rand_index({0, 1}, {0}); }), ErrorKind::LengthMismatch);
}

TEST(AdjustedRandIndex, MatchesPairEnumeration) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(20);
    Partition a(n);
    Partition b(n);
    for (auto& v : a) v = static_cast<int>(rng.below(4));
    for (auto& v : b) v = static_cast<int>(rng.below(3));
    EXPECT_NEAR(sigw::adjusted_rand_index(a, b), oracle::pair_enumeration_ari(a, b), 1e-12);
  }
}

TEST(AdjustedRandIndex, SymmetricAndRelabelInvariant) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(15);
    Partition a(n);
    Partition b(n);
    for (auto& v : a) v = static_cast<int>(rng.below(3));
    for (auto& v : b) v = static_cast<int>(rng.below(3));
    const double ab = sigw::adjusted_rand_index(a, b);
    EXPECT_NEAR(ab, sigw::adjusted_rand_index(b, a), 1e-14);
    EXPECT_NEAR(ab, sigw::adjusted_rand_index(relabel(a, {2, 0, 1}), relabel(b, {1, 2, 0})), 1e-14);
    EXPECT_LE(ab, 1.0 + 1e-12);
    EXPECT_GE(ab, -1.0 - 1e-12);
  }
}

TEST(Purity, WorkedExamples) {
  const Partition truth{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(sigw::purity(Partition{4, 4, 7, 7, 1, 1}, truth), 1.0);
  EXPECT_DOUBLE_EQ(sigw::purity(Partition{0, 0, 0, 0}, Partition{0, 0, 1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(sigw::purity(Partition{0, 0, 1, 1}, Partition{0, 1, 1, 1}), 0.75);
  EXPECT_EQ(error_kind_of([] { sigw::purity({0, 1}, {0}); }), ErrorKind::LengthMismatch);
}

TEST(Purity, RelabelInvariantAndMonotoneUnderRefinement) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(20);
    Partition pred(n);
    Partition truth(n);
    for (auto& v : pred) v = static_cast<int>(rng.below(3));
    for (auto& v : truth) v = static_cast<int>(rng.below(3));
    const double p = sigw::purity(pred, truth);
    EXPECT_DOUBLE_EQ(p, sigw::purity(relabel(pred, {1, 2, 0}), truth));
    Partition refined = pred;
    for (std::size_t i = 0; i < n; ++i) refined[i] = pred[i] * 2 + static_cast<int>(rng.below(2));
    EXPECT_GE(sigw::purity(refined, truth), p);
  }
}

TEST(SelfTuningAffinity, WorkedExamples) {
  const DistanceMatrix zero({"a", "b", "c", "d"}, Matrix(4, 4));
  const Matrix k0 = sigw::self_tuning_affinity(zero);
  for (double v : k0.data()) EXPECT_EQ(v, 1.0);

  // Points 0, 1, 2, 10 on a line. Excluding self, the third-nearest
  // distances are 10, 9, 8 and 10.
  const DistanceMatrix line = distances_of(Matrix{{0.0}, {1.0}, {2.0}, {10.0}});
  const Matrix k = sigw::self_tuning_affinity(line);
  const double sigma[] = {10.0, 9.0, 8.0, 10.0};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(k(i, i), 1.0);
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      const double d = line(i, j);
      EXPECT_NEAR(k(i, j), std::exp(-d * d / (sigma[i] * sigma[j])), 1e-15);
      EXPECT_EQ(k(i, j), k(j, i));
    }
  }
  EXPECT_NEAR(k(0, 1), std::exp(-1.0 / 90.0), 1e-15);

  EXPECT_EQ(error_kind_of([] { sigw::self_tuning_affinity(DistanceMatrix({"a", "b", "c"}, Matrix(3, 3))); }),
            ErrorKind::TooFewItems);
}

TEST(SelfTuningAffinity, ScaleFree) {
  Rng rng(4);
  const Matrix pts = oracle::random_matrix(9, 3, rng);
  const Matrix k = sigw::self_tuning_affinity(distances_of(pts));
  Matrix scaled = pts;
  scaled *= 37.0;
  EXPECT_LT(oracle::max_abs_diff(k, sigw::self_tuning_affinity(distances_of(scaled))), 1e-12);
  for (double v : k.data()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(SpectralCluster, BlockDiagonal) {
  Matrix aff(6, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) aff(i, j) = (i < 3) == (j < 3) ? 1.0 : 0.0;
  const auto r = sigw::spectral_cluster(aff, 2, 1);
  EXPECT_EQ(r.assignments, (Partition{0, 0, 0, 1, 1, 1}));
}

TEST(SpectralCluster, OneClusterPerItem) {
  Rng rng(5);
  const Matrix pts = oracle::random_matrix(5, 2, rng);
  const auto r = sigw::spectral_cluster(sigw::self_tuning_affinity(distances_of(pts), 2), 5, 7);
  Partition sorted = r.assignments;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (Partition{0, 1, 2, 3, 4}));
}

TEST(SpectralCluster, SeparatedBlobs) {
  Rng rng(6);
  Partition truth;
  const Matrix pts = blobs(10, 3, 1.0, rng, truth);
  const Matrix aff = sigw::self_tuning_affinity(distances_of(pts));
  const auto r = sigw::spectral_cluster(aff, 3, 11);
  EXPECT_DOUBLE_EQ(sigw::adjusted_rand_index(r.assignments, truth), 1.0);
  EXPECT_EQ(r.assignments, sigw::spectral_cluster(aff, 3, 11).assignments);
}

TEST(SpectralCluster, Errors) {
  Matrix aff = Matrix::identity(3);
  aff(2, 2) = 0.0;
  EXPECT_EQ(error_kind_of([&] { sigw::spectral_cluster(aff, 2, 1); }), ErrorKind::DegenerateAffinity);
  EXPECT_EQ(error_kind_of([] { sigw::spectral_cluster(Matrix::identity(3), 1, 1); }), ErrorKind::InvalidArgument);
}

TEST(ClassicalMds, EquilateralTriangle) {
  const DistanceMatrix d({"a", "b", "c"}, Matrix{{0.0, 2.0, 2.0}, {2.0, 0.0, 2.0}, {2.0, 2.0, 0.0}});
  const auto r = sigw::classical_mds_2d(d);
  const Matrix back = oracle::euclidean_distances(r.coordinates);
  EXPECT_LT(oracle::max_abs_diff(back, d.values()), 1e-8);
  EXPECT_FALSE(r.warning.has_value());
}

TEST(ClassicalMds, CollinearIsOneDimensional) {
  const DistanceMatrix d = distances_of(Matrix{{0.0}, {1.0}, {2.0}});
  const auto r = sigw::classical_mds_2d(d);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.coordinates(i, 1), 0.0, 1e-7);
  EXPECT_GT(r.coordinates(0, 0), 0.0);  // sign convention
}

TEST(ClassicalMds, ReconstructsPlanarConfigurations) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Matrix pts = oracle::random_matrix(4 + rng.below(8), 2, rng, -5.0, 5.0);
    const DistanceMatrix d = distances_of(pts);
    const auto r = sigw::classical_mds_2d(d);
    const Matrix back = oracle::euclidean_distances(r.coordinates);
    EXPECT_LE(oracle::max_abs_diff(back, d.values()), 1e-6 * d.values().max_abs());
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t i = 0; i < pts.rows(); ++i) {
        if (std::abs(r.coordinates(i, c)) > 1e-9) {
          EXPECT_GT(r.coordinates(i, c), 0.0);
          break;
        }
      }
    }
  }
}

TEST(ClassicalMds, WarnsOnNonEuclideanInput) {
  // Violates the triangle inequality badly.
  const DistanceMatrix d({"a", "b", "c", "d"},
                         Matrix{{0, 1, 1, 10}, {1, 0, 1, 1}, {1, 1, 0, 1}, {10, 1, 1, 0}});
  const auto r = sigw::classical_mds_2d(d);
  EXPECT_TRUE(r.warning.has_value());
  EXPECT_GT(r.truncated_fraction, 0.01);
  EXPECT_EQ(error_kind_of([] { sigw::classical_mds_2d(DistanceMatrix({"a", "b"}, Matrix(2, 2))); }),
            ErrorKind::TooFewItems);
}

TEST(CkaDistance, WorkedExamples) {
  Rng rng(8);
  const Matrix x = oracle::random_matrix(20, 4, rng);
  EXPECT_NEAR(sigw::cka_distance(x, x), 0.0, 1e-12);
  EXPECT_NEAR(sigw::cka_distance(x, x * oracle::random_stiefel(4, 4, rng)), 0.0, 1e-12);

  // Orthonormal, mean-zero columns split between x and y: YᵀX = 0.
  Matrix basis = oracle::random_gaussian_matrix(12, 5, rng);
  for (std::size_t j = 0; j < 5; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 12; ++i) mean += basis(i, j) / 12.0;
    for (std::size_t i = 0; i < 12; ++i) basis(i, j) -= mean;
  }
  const Matrix q = sigw::qr_positive(basis).q;
  Matrix a(12, 2);
  Matrix b(12, 3);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 2; ++j) a(i, j) = q(i, j);
    for (std::size_t j = 0; j < 3; ++j) b(i, j) = q(i, 2 + j);
  }
  EXPECT_NEAR(sigw::cka_distance(a, b), 1.0, 1e-12);
}

TEST(CkaDistance, BoundedAndErrors) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng.below(10);
    const double v = sigw::cka_distance(oracle::random_matrix(n, 1 + rng.below(4), rng),
                                        oracle::random_matrix(n, 1 + rng.below(4), rng));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(error_kind_of([] { sigw::cka_distance(Matrix(3, 2), Matrix(4, 2)); }), ErrorKind::RowMismatch);
  EXPECT_EQ(error_kind_of([] { sigw::cka_distance(Matrix{{1.0}, {1.0}}, Matrix{{1.0}, {2.0}}); }),
            ErrorKind::ZeroMatrix);
}

TEST(PairwiseDistances, OneDimensionalExample) {
  const std::vector<EmpiricalMeasure> ms{EmpiricalMeasure(Matrix{{-1.0}, {1.0}}),
                                         EmpiricalMeasure(Matrix{{-2.0}, {2.0}}),
                                         EmpiricalMeasure(Matrix{{-3.0}, {3.0}})};
  const auto d = sigw::pairwise_distances(ms, {"a", "b", "c"}, sigw::PairwiseMethod{}, 5);
  EXPECT_NEAR(d(0, 1), 3.0, 1e-12);
  EXPECT_NEAR(d(0, 2), 8.0, 1e-12);
  EXPECT_NEAR(d(1, 2), 5.0, 1e-12);
  EXPECT_EQ(d.metric_name(), "sliced-igw");
}

TEST(PairwiseDistances, DuplicateMeasuresAreAtZero) {
  Rng rng(10);
  const EmpiricalMeasure a(oracle::random_matrix(15, 3, rng));
  const EmpiricalMeasure b(oracle::random_matrix(15, 4, rng));
  const std::vector<EmpiricalMeasure> ms{a, b, a};
  auto method = sigw::PairwiseMethod::sliced(30, sigw::OptimizerKind::Riemannian,
                                             sigw::OptimizerConfig::riemannian_defaults());
  std::vector<sigw::PairSummary> summaries;
  const auto d = sigw::pairwise_distances(ms, {"a", "b", "a2"}, method, 3, &summaries);
  EXPECT_LE(d(0, 2), 1e-6);  // squared value at roundoff
  EXPECT_GT(d(0, 1), 0.0);
  ASSERT_EQ(summaries.size(), 3u);
  EXPECT_TRUE(summaries[1].swapped == false);  // (0, 2): equal dimensions
  EXPECT_TRUE(summaries[2].swapped);           // (1, 2): 4-dim vs 3-dim
}

TEST(PairwiseDistances, GaussianMethodsDelegate) {
  Rng rng(11);
  const GaussianMeasure a(oracle::random_psd(2, rng));
  const GaussianMeasure b(oracle::random_psd(3, rng));
  const std::vector<GaussianMeasure> ms{b, a};
  const auto igw = sigw::pairwise_distances(ms, sigw::PairwiseMethod::gaussian_igw(), 0);
  EXPECT_DOUBLE_EQ(igw(0, 1), sigw::igw_gaussian(a, b));
  const auto sliced = sigw::pairwise_distances(ms, sigw::PairwiseMethod::gaussian_sliced(), 0);
  EXPECT_DOUBLE_EQ(sliced(0, 1), std::sqrt(sigw::sliced_igw_gaussian(a, b).sliced_igw_squared));
}

TEST(PairwiseDistances, IndependentOfThreadCount) {
  Rng rng(12);
  std::vector<EmpiricalMeasure> ms;
  for (int i = 0; i < 4; ++i) ms.emplace_back(oracle::random_matrix(10, 2 + (i % 2), rng));
  auto method = sigw::PairwiseMethod::sliced(20, sigw::OptimizerKind::Riemannian,
                                             sigw::OptimizerConfig::riemannian_defaults());
  method.config.max_iters = 20;
  sigw::set_thread_count(1);
  const auto serial = sigw::pairwise_distances(ms, method, 9);
  sigw::set_thread_count(3);
  const auto threaded = sigw::pairwise_distances(ms, method, 9);
  sigw::set_thread_count(0);
  EXPECT_EQ(serial.values(), threaded.values());
  EXPECT_EQ(error_kind_of([&] { sigw::pairwise_distances(std::vector<EmpiricalMeasure>{ms[0]}, method, 0); }),
            ErrorKind::TooFewItems);
}

TEST(Kmeans, DeterministicAndCanonical) {
  Rng rng(13);
  Partition truth;
  const Matrix pts = blobs(6, 3, 0.5, rng, truth);
  const auto a = sigw::kmeans(pts, 3, 4);
  EXPECT_EQ(a, sigw::kmeans(pts, 3, 4));
  EXPECT_EQ(a.front(), 0);
  EXPECT_DOUBLE_EQ(sigw::adjusted_rand_index(a, truth), 1.0);
}
