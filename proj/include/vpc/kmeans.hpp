#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vpc/core.hpp"
#include "vpc/kernels.hpp"

namespace vpc
{
struct KMeansOptions
{
  std::size_t max_iter = 100;
  /// Stop once the relative WCSS improvement of an iteration drops below this.
  double tol = 1e-6;
  /// Independent k-means++ starts; the lowest-WCSS run wins (ties: earliest).
  std::size_t restarts = 1;
  Exec exec = Exec::Parallel;
};

struct KMeansResult
{
  std::vector<std::uint32_t> assignments;
  /// Row-major k x dim.
  std::vector<double> centroids;
  std::size_t k = 0;
  std::size_t dim = 0;
  double wcss = 0.0;
  /// Lloyd update steps performed by the winning run.
  std::size_t iterations = 0;
  /// WCSS after the initial assignment and after every Lloyd step.
  std::vector<double> wcss_history;

  std::span<const double> centroid(std::size_t c) const
  {
    return std::span<const double>(centroids).subspan(c * dim, dim);
  }
};

/// Lloyd's algorithm from a seeded k-means++ start. Clusters that go empty
/// are re-seeded at the point farthest from its current centroid, so every
/// id in [0, k) is populated on return. Throws std::invalid_argument when
/// k == 0 or k > rows.
KMeansResult kmeans(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Sum of squared distances of every row to the centroid of its cluster.
double within_cluster_sum_of_squares(const FeatureMatrix& features,
                                     std::span<const std::uint32_t> assignments,
                                     std::span<const double> centroids);

/// Per-cluster arithmetic means (row-major k x dim), accumulated in row order.
std::vector<double> cluster_means(const FeatureMatrix& features,
                                  std::span<const std::uint32_t> assignments, std::size_t k);

}  // namespace vpc
