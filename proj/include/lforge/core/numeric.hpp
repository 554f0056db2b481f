#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lforge {

// Pairwise (cascade) summation over a fixed binary tree. The result depends only
// on the input order, never on how callers split work across threads.
inline double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kLeaf = 8;
  if (xs.size() <= kLeaf) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

// Population variance (divides by N).
inline double population_variance(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return pairwise_sum(sq) / static_cast<double>(xs.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
  return pairwise_sum(prod);
}

// Centers the vector and scales it to unit Euclidean norm. Returns nullopt for
// a constant vector, whose correlation with anything is undefined.
inline std::optional<std::vector<double>> unit_centered(std::span<const double> xs) {
  const double m = mean(xs);
  std::vector<double> c(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) c[i] = xs[i] - m;
  const double norm = std::sqrt(dot(c, c));
  if (!(norm > 1e-12 * (1.0 + std::abs(m)) * std::sqrt(static_cast<double>(xs.size())))) return std::nullopt;
  for (double& v : c) v /= norm;
  return c;
}

// Pearson correlation; nullopt when either side has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  auto ua = unit_centered(a);
  auto ub = unit_centered(b);
  if (!ua || !ub) return std::nullopt;
  double r = dot(*ua, *ub);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

}  // namespace lforge
