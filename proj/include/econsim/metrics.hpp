#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/sort/spreadsort/float_sort.hpp>

namespace econsim {

struct GiniResult {
  double value = 0.0;
  bool degenerate = false;  // empty or all-zero sample
};

/// Ascending sort of plain doubles; radix-based, same order as std::sort.
inline void sort_values(std::vector<double>& xs) {
  boost::sort::spreadsort::float_sort(xs.begin(), xs.end());
}

/// Gini index from sorted cumulative shares (trapezoid rule on the Lorenz
/// curve), optionally weighted. Unweighted, this equals the mean absolute
/// difference divided by twice the mean.
inline GiniResult gini(std::span<const double> values, std::span<const double> weights = {}) {
  if (!weights.empty() && weights.size() != values.size())
    throw std::invalid_argument("gini: weights must match values");
  const std::size_t n = values.size();
  if (n == 0) return {0.0, true};
  if (weights.empty()) {
    std::vector<double> xs(values.begin(), values.end());
    for (double x : xs)
      if (!(x >= 0.0)) throw std::invalid_argument("gini: negative value");
    sort_values(xs);
    double total_x = 0.0;
    for (double x : xs) total_x += x;
    if (!(total_x > 0.0)) return {0.0, true};
    double area = 0.0, cum = 0.0;
    for (double x : xs) {
      const double next = cum + x;
      area += cum + next;
      cum = next;
    }
    return {1.0 - area / (static_cast<double>(n) * total_x), false};
  }
  std::vector<std::pair<double, double>> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] < 0.0) throw std::invalid_argument("gini: negative value");
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0.0) throw std::invalid_argument("gini: negative weight");
    xs[i] = {values[i], w};
  }
  std::sort(xs.begin(), xs.end());
  double total_w = 0.0, total_x = 0.0;
  for (const auto& [x, w] : xs) {
    total_w += w;
    total_x += w * x;
  }
  if (!(total_w > 0.0)) throw std::invalid_argument("gini: weights sum to zero");
  if (!(total_x > 0.0)) return {0.0, true};
  double area = 0.0, cum = 0.0;
  for (const auto& [x, w] : xs) {
    const double next = cum + w * x;
    area += w * (cum + next);
    cum = next;
  }
  return {1.0 - area / (total_w * total_x), false};
}

struct LorenzPoint {
  double population = 0.0;
  double value = 0.0;
};

/// Lorenz curve from (0,0) to (1,1). With points == 0 every sample is a
/// vertex; otherwise the curve is resampled on a grid of `points` equal
/// population steps.
inline std::vector<LorenzPoint> lorenz_curve(std::span<const double> values,
                                             std::size_t points = 0) {
  std::vector<double> xs(values.begin(), values.end());
  for (double x : xs)
    if (x < 0.0) throw std::invalid_argument("lorenz_curve: negative value");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  const double total = std::accumulate(xs.begin(), xs.end(), 0.0);
  std::vector<LorenzPoint> exact{{0.0, 0.0}};
  double cum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cum += xs[i];
    const double share = total > 0.0 ? cum / total : static_cast<double>(i + 1) / n;
    exact.push_back({static_cast<double>(i + 1) / n, share});
  }
  if (n == 0) exact.push_back({1.0, 1.0});
  exact.back().value = 1.0;
  if (points == 0) return exact;

  std::vector<LorenzPoint> grid;
  grid.reserve(points + 1);
  std::size_t seg = 1;
  for (std::size_t k = 0; k <= points; ++k) {
    const double p = static_cast<double>(k) / points;
    while (seg + 1 < exact.size() && exact[seg].population < p) ++seg;
    const auto& a = exact[seg - 1];
    const auto& b = exact[seg];
    const double span = b.population - a.population;
    const double t = span > 0.0 ? (p - a.population) / span : 0.0;
    grid.push_back({p, a.value + std::clamp(t, 0.0, 1.0) * (b.value - a.value)});
  }
  return grid;
}

/// 1 - 2 * area under the polyline.
inline double gini_from_lorenz(std::span<const LorenzPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].population - curve[i - 1].population) *
            (curve[i].value + curve[i - 1].value) * 0.5;
  return 1.0 - 2.0 * area;
}

/// Order-p Wasserstein distance between two empirical distributions, computed
/// exactly from their step quantile functions.
inline double wasserstein_1d(std::span<const double> a, std::span<const double> b,
                             int order = 1) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample");
  if (order < 1) throw std::invalid_argument("wasserstein_1d: order must be >= 1");
  std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());

  if (xa.size() == xb.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) acc += std::pow(std::abs(xa[i] - xb[i]), order);
    acc /= na;
    return order == 1 ? acc : std::pow(acc, 1.0 / order);
  }

  // Walk the merged quantile breakpoints k/na and l/nb.
  std::size_t i = 0, j = 0;
  double u = 0.0, acc = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double next_a = static_cast<double>(i + 1) / na;
    const double next_b = static_cast<double>(j + 1) / nb;
    const double next = std::min(next_a, next_b);
    acc += (next - u) * std::pow(std::abs(xa[i] - xb[j]), order);
    u = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return order == 1 ? acc : std::pow(acc, 1.0 / order);
}

inline double social_welfare(std::span<const double> utilities) {
  double total = 0.0;
  for (double u : utilities) total += u;
  return total;
}

struct DependencyRatio {
  double value = 0.0;
  bool no_young = false;
};

/// Old (age > retirement age) per young (age <= retirement age).
template <class Ages>
DependencyRatio dependency_ratio(const Ages& ages, int retirement_age) {
  std::size_t old = 0, young = 0;
  for (int a : ages) (a > retirement_age ? old : young) += 1;
  if (young == 0) return {std::numeric_limits<double>::infinity(), true};
  return {static_cast<double>(old) / static_cast<double>(young), false};
}

/// Linear-interpolated quantile of an already sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct AgeBin {
  int lo = 0;
  int hi = 0;  // inclusive
  std::size_t count = 0;
  double mean = 0.0;
};

/// Mean of `values` over fixed-width age bins covering [lo, hi].
inline std::vector<AgeBin> age_binned_means(std::span<const int> ages, std::span<const double> values,
                                            int lo, int hi, int width) {
  if (ages.size() != values.size()) throw std::invalid_argument("age_binned_means: size mismatch");
  if (width <= 0 || hi < lo) throw std::invalid_argument("age_binned_means: bad bins");
  std::vector<AgeBin> bins;
  for (int a = lo; a <= hi; a += width) bins.push_back({a, std::min(a + width - 1, hi), 0, 0.0});
  for (std::size_t i = 0; i < ages.size(); ++i) {
    if (ages[i] < lo || ages[i] > hi) continue;
    auto& b = bins[static_cast<std::size_t>((ages[i] - lo) / width)];
    ++b.count;
    b.mean += values[i];
  }
  for (auto& b : bins)
    if (b.count) b.mean /= static_cast<double>(b.count);
  return bins;
}

/// True when the sequence rises to a maximum strictly inside it and falls
/// afterwards (weakly on both sides), i.e. it has one interior peak.
inline bool single_interior_peak(std::span<const double> v) {
  if (v.size() < 3) return false;
  const auto peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  if (peak == 0 || peak + 1 == v.size()) return false;
  if (!(v[peak] > v.front()) || !(v[peak] > v.back())) return false;
  for (std::size_t k = 1; k <= peak; ++k)
    if (v[k] < v[k - 1]) return false;
  for (std::size_t k = peak + 1; k < v.size(); ++k)
    if (v[k] > v[k - 1]) return false;
  return true;
}

}  // namespace econsim
