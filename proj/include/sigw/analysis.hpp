#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigw/gaussian.hpp"
#include "sigw/parallel.hpp"
#include "sigw/random.hpp"
#include "sigw/slicing.hpp"
#include "sigw/stiefel.hpp"

namespace sigw {

/// Symmetric, nonnegative, zero-diagonal distance table over labelled items.
class DistanceMatrix {
 public:
  DistanceMatrix(std::vector<std::string> labels, Matrix values, std::string metric_name = "")
      : labels_(std::move(labels)), values_(std::move(values)), metric_name_(std::move(metric_name)) {
    const std::size_t n = labels_.size();
    require(values_.rows() == n && values_.cols() == n, ErrorKind::DimensionMismatch,
            std::to_string(n) + " labels but distance matrix is " + values_.shape());
    for (std::size_t i = 0; i < n; ++i) {
      require(values_(i, i) == 0.0, ErrorKind::InvalidArgument, "nonzero diagonal at " + std::to_string(i));
      for (std::size_t j = 0; j < n; ++j) {
        require(values_(i, j) >= 0.0, ErrorKind::InvalidArgument,
                "negative distance at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        require(std::abs(values_(i, j) - values_(j, i)) <= 1e-9, ErrorKind::NonSymmetric,
                "distance matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Matrix& values() const noexcept { return values_; }
  const std::string& metric_name() const noexcept { return metric_name_; }
  std::size_t size() const noexcept { return labels_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }

 private:
  std::vector<std::string> labels_;
  Matrix values_;
  std::string metric_name_;
};

enum class PairwiseKind { SlicedIGW, GaussianSlicedIGW, GaussianIGW };

struct PairwiseMethod {
  PairwiseKind kind = PairwiseKind::SlicedIGW;
  std::size_t slices = 200;
  OptimizerKind optimizer = OptimizerKind::Riemannian;
  OptimizerConfig config = [] {
    auto c = OptimizerConfig::riemannian_defaults();
    c.init = Initialization::gaussian_alignment();
    return c;
  }();

  static PairwiseMethod sliced(std::size_t slices, OptimizerKind optimizer, OptimizerConfig config) {
    return {PairwiseKind::SlicedIGW, slices, optimizer, std::move(config)};
  }
  static PairwiseMethod gaussian_sliced() { return {PairwiseKind::GaussianSlicedIGW}; }
  static PairwiseMethod gaussian_igw() { return {PairwiseKind::GaussianIGW}; }
};

inline const char* to_string(PairwiseKind k) {
  switch (k) {
    case PairwiseKind::SlicedIGW: return "sliced-igw";
    case PairwiseKind::GaussianSlicedIGW: return "gaussian-sliced-igw";
    case PairwiseKind::GaussianIGW: return "gaussian-igw";
  }
  return "?";
}

/// What happened on one unordered pair (i < j). `swapped` means measure j
/// had the lower dimension and was used as the source.
struct PairSummary {
  std::size_t i = 0;
  std::size_t j = 0;
  bool swapped = false;
  double distance = 0.0;
  std::optional<double> objective;
  std::size_t iterations = 0;
  std::optional<ConvergedReason> converged_reason;
  double wall_time_seconds = 0.0;
};

namespace detail {

inline GaussianMeasure as_gaussian(const GaussianMeasure& g) { return g; }
inline GaussianMeasure as_gaussian(const EmpiricalMeasure& m) { return empirical_covariance(m); }

inline std::size_t measure_dim(const GaussianMeasure& g) { return g.dim(); }
inline std::size_t measure_dim(const EmpiricalMeasure& m) { return m.dim(); }

template <typename M>
PairSummary pair_distance(const M& a, const M& b, std::size_t i, std::size_t j, const PairwiseMethod& method,
                          std::uint64_t seed) {
  PairSummary s;
  s.i = i;
  s.j = j;
  s.swapped = measure_dim(a) > measure_dim(b);
  const M& mu = s.swapped ? b : a;
  const M& nu = s.swapped ? a : b;
  switch (method.kind) {
    case PairwiseKind::GaussianIGW: s.distance = igw_gaussian(as_gaussian(mu), as_gaussian(nu)); break;
    case PairwiseKind::GaussianSlicedIGW:
      s.distance = std::sqrt(sliced_igw_gaussian(as_gaussian(mu), as_gaussian(nu)).sliced_igw_squared);
      break;
    case PairwiseKind::SlicedIGW: {
      const auto dirs = sample_directions(measure_dim(nu), method.slices, stream_seed(stream_seed(seed, i), j));
      const SliceObjective objective(mu, nu, dirs);
      const auto trace = run_optimizer(objective, method.optimizer, method.config);
      s.objective = trace.final_objective;
      s.distance = std::sqrt(std::max(trace.final_objective, 0.0));
      s.iterations = trace.iterates.size();
      s.converged_reason = trace.converged_reason;
      s.wall_time_seconds = trace.wall_time_seconds;
      break;
    }
  }
  return s;
}

}  // namespace detail

/// Distances between every unordered pair of `measures`. Pair (i, j) draws
/// its slices from a stream keyed on (seed, i, j), so the result does not
/// depend on scheduling. Per-pair diagnostics go to `summaries` if given.
template <typename M>
DistanceMatrix pairwise_distances(const std::vector<M>& measures, std::vector<std::string> labels,
                                  const PairwiseMethod& method, std::uint64_t seed,
                                  std::vector<PairSummary>* summaries = nullptr) {
  const std::size_t n = measures.size();
  require(n >= 2, ErrorKind::TooFewItems, "pairwise distances need at least two measures");
  if (labels.empty())
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  require(labels.size() == n, ErrorKind::LengthMismatch, "label count differs from measure count");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<PairSummary> results(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    try {
      results[p] = detail::pair_distance(measures[i], measures[j], i, j, method, seed);
    } catch (const Error& e) {
      throw Error(e.kind(), "pair (" + labels[i] + ", " + labels[j] + "): " + e.what());
    }
  });

  Matrix values(n, n);
  for (const auto& r : results) {
    values(r.i, r.j) = r.distance;
    values(r.j, r.i) = r.distance;
  }
  if (summaries) *summaries = std::move(results);
  return DistanceMatrix(std::move(labels), std::move(values), to_string(method.kind));
}

template <typename M>
DistanceMatrix pairwise_distances(const std::vector<M>& measures, const PairwiseMethod& method, std::uint64_t seed) {
  return pairwise_distances(measures, {}, method, seed);
}

/// K_ij = exp(−D_ij² / (σ_i σ_j)), σ_i the distance from i to its
/// `neighbor_index`-th nearest other item (floored at 1e-12).
inline Matrix self_tuning_affinity(const DistanceMatrix& d, std::size_t neighbor_index = 3) {
  const std::size_t n = d.size();
  require(neighbor_index >= 1 && n > neighbor_index, ErrorKind::TooFewItems,
          "self-tuning affinity with neighbor " + std::to_string(neighbor_index) + " needs more than " +
              std::to_string(neighbor_index) + " items, got " + std::to_string(n));
  Vector sigma(n);
  Vector others;
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(d(i, j));
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(neighbor_index - 1), others.end());
    sigma[i] = std::max(others[neighbor_index - 1], 1e-12);
  }
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      k(i, j) = i == j ? 1.0 : std::exp(-d(i, j) * d(i, j) / (sigma[i] * sigma[j]));
  return k;
}

using Partition = std::vector<int>;

struct ClusteringResult {
  Partition assignments;
  std::size_t k = 0;
  std::optional<double> ari;
  std::optional<double> purity;
};

namespace detail {

struct KMeansFit {
  Partition labels;
  double inertia = std::numeric_limits<double>::infinity();
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline KMeansFit kmeans_once(const Matrix& x, std::size_t k, Rng& rng, std::size_t max_iters) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Matrix centers(k, d);

  // k-means++ seeding
  Vector nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(x.row(i), centers.row(c)));
      total += nearest[i];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.below(n));
      continue;
    }
    double u = rng.uniform() * total;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      u -= nearest[i];
      if (u < 0.0 && nearest[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }

  KMeansFit fit;
  fit.labels.assign(n, -1);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(x.row(i), centers.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = squared_distance(x.row(i), centers.row(c));
        if (dc < best_d) {
          best_d = dc;
          best = static_cast<int>(c);
        }
      }
      if (fit.labels[i] != best) {
        fit.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(fit.labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums(c, j) += x(i, j);
    }
    // An emptied cluster keeps its previous center.
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t j = 0; j < d; ++j) centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
  }
  fit.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    fit.inertia += squared_distance(x.row(i), centers.row(static_cast<std::size_t>(fit.labels[i])));
  return fit;
}

/// Relabels clusters in order of first appearance.
inline Partition canonical_labels(const Partition& p) {
  std::map<int, int> remap;
  Partition out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(p[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

}  // namespace detail

/// Best-inertia k-means over `restarts` k-means++ initializations.
inline Partition kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts = 10,
                        std::size_t max_iters = 100) {
  require(k >= 1 && k <= x.rows(), ErrorKind::InvalidArgument,
          "k-means with k=" + std::to_string(k) + " on " + std::to_string(x.rows()) + " rows");
  detail::KMeansFit best;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng = Rng::stream(seed, r);
    auto fit = detail::kmeans_once(x, k, rng, max_iters);
    if (fit.inertia < best.inertia) best = std::move(fit);
  }
  return detail::canonical_labels(best.labels);
}

/// Normalized spectral clustering: the k leading eigenvectors of
/// D^{-1/2} K D^{-1/2} (the k smallest of the symmetric Laplacian),
/// row-normalized, then k-means.
inline ClusteringResult spectral_cluster(const Matrix& affinity, std::size_t k, std::uint64_t seed) {
  const std::size_t n = affinity.rows();
  require(affinity.is_square(), ErrorKind::DimensionMismatch, "affinity must be square, got " + affinity.shape());
  require(k >= 2 && k <= n, ErrorKind::InvalidArgument,
          "cluster count " + std::to_string(k) + " must lie in [2, " + std::to_string(n) + "]");
  Vector inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      require(affinity(i, j) >= 0.0, ErrorKind::InvalidArgument, "affinity has a negative entry");
      deg += affinity(i, j);
    }
    require(deg > 1e-15, ErrorKind::DegenerateAffinity, "item " + std::to_string(i) + " has zero degree");
    inv_sqrt_degree[i] = 1.0 / std::sqrt(deg);
  }
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = inv_sqrt_degree[i] * affinity(i, j) * inv_sqrt_degree[j];
  const auto eig = sym_eigen(m);

  Matrix embedding(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      embedding(i, c) = eig.eigenvectors(i, c);
      norm2 += embedding(i, c) * embedding(i, c);
    }
    if (norm2 > 0.0)
      for (std::size_t c = 0; c < k; ++c) embedding(i, c) /= std::sqrt(norm2);
  }
  ClusteringResult out;
  out.k = k;
  out.assignments = kmeans(embedding, k, seed);
  return out;
}

namespace detail {

inline double choose2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace detail

/// Hubert–Arabie adjusted Rand index. Two all-in-one-cluster (or
/// all-singleton) partitions agree trivially and score 1.
inline double adjusted_rand_index(const Partition& a, const Partition& b) {
  require(a.size() == b.size(), ErrorKind::LengthMismatch,
          "partitions have lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [cell, count] : table) index += detail::choose2(count);
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (const auto& [label, count] : rows) sum_a += detail::choose2(count);
  for (const auto& [label, count] : cols) sum_b += detail::choose2(count);
  const double total = detail::choose2(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

/// Fraction of items whose truth label is the majority label of their
/// predicted cluster.
inline double purity(const Partition& predicted, const Partition& truth) {
  require(predicted.size() == truth.size(), ErrorKind::LengthMismatch,
          "partitions have lengths " + std::to_string(predicted.size()) + " and " + std::to_string(truth.size()));
  require(!predicted.empty(), ErrorKind::EmptyMeasure, "purity of an empty partition");
  std::map<int, std::map<int, std::size_t>> counts;
  for (std::size_t i = 0; i < predicted.size(); ++i) ++counts[predicted[i]][truth[i]];
  std::size_t hits = 0;
  for (const auto& [cluster, labels] : counts) {
    std::size_t best = 0;
    for (const auto& [label, c] : labels) best = std::max(best, c);
    hits += best;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

struct MdsResult {
  Matrix coordinates;                 ///< n x 2
  Vector eigenvalues;                 ///< full spectrum of B, descending
  double truncated_fraction = 0.0;    ///< |negative mass| / total |mass|
  std::optional<std::string> warning;
};

/// Classical (Torgerson) MDS into the plane. Negative eigenvalues are set to
/// zero; each coordinate column is signed so its first nonzero entry is
/// positive.
inline MdsResult classical_mds_2d(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  require(n >= 3, ErrorKind::TooFewItems, "MDS needs at least 3 items, got " + std::to_string(n));
  Matrix sq(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sq(i, j) = d(i, j) * d(i, j);
  Vector row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row_mean[i] += sq(i, j);
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n * n);
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
  const auto eig = sym_eigen(symmetric_part(b));

  MdsResult out;
  out.eigenvalues = eig.eigenvalues;
  double total = 0.0;
  double negative = 0.0;
  for (double l : eig.eigenvalues) {
    total += std::abs(l);
    if (l < 0.0) negative -= l;
  }
  out.truncated_fraction = total > 0.0 ? negative / total : 0.0;
  if (out.truncated_fraction > 0.01)
    out.warning = "distance matrix is not Euclidean: truncated " + std::to_string(100.0 * out.truncated_fraction) +
                  "% of the spectrum";

  out.coordinates = Matrix(n, 2);
  const double tiny = 1e-12 * std::max(1.0, d.values().max_abs());
  for (std::size_t c = 0; c < 2; ++c) {
    const double scale = std::sqrt(std::max(eig.eigenvalues[c], 0.0));
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(eig.eigenvectors(i, c) * scale) > tiny) {
        sign = eig.eigenvectors(i, c) < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.coordinates(i, c) = sign * scale * eig.eigenvectors(i, c);
  }
  return out;
}

/// 1 − linear CKA between column-centered x (n×p) and y (n×q):
/// 1 − ‖YᵀX‖²_F / (‖XᵀX‖_F ‖YᵀY‖_F).
inline double cka_distance(const Matrix& x, const Matrix& y) {
  require(x.rows() == y.rows(), ErrorKind::RowMismatch,
          "CKA inputs have " + std::to_string(x.rows()) + " and " + std::to_string(y.rows()) + " rows");
  require(x.rows() > 0, ErrorKind::EmptyMeasure, "CKA of empty matrices");
  auto centered = [](const Matrix& m) {
    Matrix c = m;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, j);
      mean /= static_cast<double>(m.rows());
      for (std::size_t i = 0; i < m.rows(); ++i) c(i, j) -= mean;
    }
    return c;
  };
  const Matrix xc = centered(x);
  const Matrix yc = centered(y);
  const double nx = transpose_times(xc, xc).frobenius_norm();
  const double ny = transpose_times(yc, yc).frobenius_norm();
  require(nx >= 1e-15 && ny >= 1e-15, ErrorKind::ZeroMatrix, "CKA input is zero after centering");
  const double cross = transpose_times(yc, xc).frobenius_norm();
  return std::clamp(1.0 - cross * cross / (nx * ny), 0.0, 1.0);
}

}  // namespace sigw
