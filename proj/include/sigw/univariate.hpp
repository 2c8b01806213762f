#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "sigw/measures.hpp"

namespace sigw {

/// Which quantile coupling of two measures on the line: ascending with
/// ascending (Monotone) or ascending with descending (Antitone).
enum class Orientation { Monotone, Antitone };

struct UnivariateIgwResult {
  double igw_squared = 0.0;
  double correlation_monotone = 0.0;  ///< ∫xy dπ under the monotone coupling
  double correlation_antitone = 0.0;  ///< ∫xy dπ under the antitone coupling
  Orientation chosen = Orientation::Monotone;
};

namespace detail {

/// Atoms sorted ascending by value; `order[k]` is the original index of the
/// k-th smallest atom. Stable, so equal values keep input order.
struct SortedAtoms {
  Vector values;
  Vector weights;
  std::vector<std::size_t> order;
};

inline SortedAtoms sort_atoms(std::span<const double> values, std::span<const double> weights) {
  SortedAtoms s;
  s.order.resize(values.size());
  std::iota(s.order.begin(), s.order.end(), 0);
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  s.values.resize(values.size());
  s.weights.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    s.values[k] = values[s.order[k]];
    s.weights[k] = weights[s.order[k]];
  }
  return s;
}

inline SortedAtoms sort_atoms(const UnivariateSample& s) { return sort_atoms(s.values(), s.weights()); }

/// Walks the quantile coupling of two sorted weight sequences (the
/// northwest-corner rule on merged CDF breakpoints). For Antitone the second
/// sequence is traversed from its largest atom down. Calls
/// visit(i, j, mass) for every cell with positive mass, where i and j index
/// the ascending arrays.
template <typename Visit>
void quantile_sweep(std::span<const double> wx, std::span<const double> wy, Orientation orientation,
                    Visit&& visit) {
  // Residual masses below this are rounding leftovers of the partial sums.
  constexpr double kResidual = 1e-14;
  const std::size_t nx = wx.size();
  const std::size_t ny = wy.size();
  auto y_at = [&](std::size_t step) { return orientation == Orientation::Monotone ? step : ny - 1 - step; };
  std::size_t i = 0;
  std::size_t step = 0;
  double rx = wx[0];
  double ry = wy[y_at(0)];
  while (i < nx && step < ny) {
    const double mass = std::min(rx, ry);
    if (mass > 0.0) visit(i, y_at(step), mass);
    rx -= mass;
    ry -= mass;
    if (rx <= kResidual && ++i < nx) rx = wx[i];
    if (ry <= kResidual && ++step < ny) ry = wy[y_at(step)];
  }
}

/// ∫xy dπ for sorted inputs. Equal-size uniform inputs pair index to index.
inline double sorted_correlation(const SortedAtoms& x, const SortedAtoms& y, Orientation orientation,
                                 bool both_uniform) {
  const std::size_t n = x.values.size();
  if (both_uniform && n == y.values.size()) {
    double s = 0.0;
    if (orientation == Orientation::Monotone) {
      for (std::size_t k = 0; k < n; ++k) s += x.values[k] * y.values[k];
    } else {
      for (std::size_t k = 0; k < n; ++k) s += x.values[k] * y.values[n - 1 - k];
    }
    return s / static_cast<double>(n);
  }
  double s = 0.0;
  quantile_sweep(x.weights, y.weights, orientation,
                 [&](std::size_t i, std::size_t j, double mass) { s += mass * x.values[i] * y.values[j]; });
  return s;
}

}  // namespace detail

/// ∫xy dπ under the monotone or antitone quantile coupling of mu and nu.
inline double quantile_coupling_correlation(const UnivariateSample& mu, const UnivariateSample& nu,
                                            Orientation orientation) {
  const auto x = detail::sort_atoms(mu);
  const auto y = detail::sort_atoms(nu);
  return detail::sorted_correlation(x, y, orientation, mu.is_uniform() && nu.is_uniform());
}

namespace detail {

inline UnivariateIgwResult combine_igw(double m2_mu, double m2_nu, double corr_mono, double corr_anti) {
  UnivariateIgwResult r;
  r.correlation_monotone = corr_mono;
  r.correlation_antitone = corr_anti;
  const double mono_sq = corr_mono * corr_mono;
  const double anti_sq = corr_anti * corr_anti;
  r.chosen = mono_sq >= anti_sq ? Orientation::Monotone : Orientation::Antitone;
  const double scale = m2_mu * m2_mu + m2_nu * m2_nu;
  const double value = scale - 2.0 * std::max(mono_sq, anti_sq);
  assert(value >= -1e-9 * scale - 1e-300);
  r.igw_squared = std::max(value, 0.0);
  return r;
}

}  // namespace detail

/// Closed-form IGW² between two measures on the line: the better of the
/// monotone and antitone quantile couplings.
inline UnivariateIgwResult igw_1d(const UnivariateSample& mu, const UnivariateSample& nu) {
  const auto x = detail::sort_atoms(mu);
  const auto y = detail::sort_atoms(nu);
  const bool uniform = mu.is_uniform() && nu.is_uniform();
  // Second moments go through the same sorted sums as the correlations, so
  // identical inputs cancel exactly.
  return detail::combine_igw(detail::sorted_correlation(x, x, Orientation::Monotone, mu.is_uniform()),
                             detail::sorted_correlation(y, y, Orientation::Monotone, nu.is_uniform()),
                             detail::sorted_correlation(x, y, Orientation::Monotone, uniform),
                             detail::sorted_correlation(x, y, Orientation::Antitone, uniform));
}

/// Squared 2-Wasserstein distance on the line (monotone coupling).
inline double w2_squared_1d(const UnivariateSample& mu, const UnivariateSample& nu) {
  const auto x = detail::sort_atoms(mu);
  const auto y = detail::sort_atoms(nu);
  const std::size_t n = x.values.size();
  double s = 0.0;
  if (mu.is_uniform() && nu.is_uniform() && n == y.values.size()) {
    for (std::size_t k = 0; k < n; ++k) {
      const double d = x.values[k] - y.values[k];
      s += d * d;
    }
    return s / static_cast<double>(n);
  }
  detail::quantile_sweep(x.weights, y.weights, Orientation::Monotone, [&](std::size_t i, std::size_t j, double mass) {
    const double d = x.values[i] - y.values[j];
    s += mass * d * d;
  });
  return s;
}

/// True when the sample has two atoms at exactly the same value.
inline bool has_duplicate_values(const UnivariateSample& s) {
  Vector v = s.values();
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

}  // namespace sigw
