#include "vpc/kmeans.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace vpc
{
namespace
{
std::span<const double> centroid_of(const std::vector<double>& centroids, std::size_t c,
                                    std::size_t dim)
{
  return std::span<const double>(centroids).subspan(c * dim, dim);
}

void set_centroid(std::vector<double>& centroids, std::size_t c, std::span<const float> row)
{
  std::copy(row.begin(), row.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * row.size()));
}

std::vector<double> kmeanspp_init(const FeatureMatrix& features, std::size_t k,
                                  std::mt19937_64& rng)
{
  const std::size_t n = features.rows();
  const std::size_t dim = features.dim();
  std::vector<double> centroids(k * dim, 0.0);
  std::vector<bool> chosen(n, false);

  std::uniform_int_distribution<std::size_t> pick_first(0, n - 1);
  std::size_t current = pick_first(rng);
  chosen[current] = true;
  set_centroid(centroids, 0, features.row(current));

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    d2[i] = squared_distance(features.row(i), centroid_of(centroids, 0, dim));
  }

  for (std::size_t c = 1; c < k; ++c)
  {
    double total = 0.0;
    for (const double d : d2)
    {
      total += d;
    }
    std::size_t next = n;
    if (total > 0.0)
    {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
      {
        if (d2[i] <= 0.0)
        {
          continue;
        }
        acc += d2[i];
        next = i;
        if (acc > target)
        {
          break;
        }
      }
    }
    else
    {
      // Every remaining point coincides with a centre; take any unused row.
      next = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) -
                                      chosen.begin());
    }
    chosen[next] = true;
    set_centroid(centroids, c, features.row(next));
    const auto centre = centroid_of(centroids, c, dim);
    for (std::size_t i = 0; i < n; ++i)
    {
      d2[i] = std::min(d2[i], squared_distance(features.row(i), centre));
    }
  }
  return centroids;
}

// Moves the farthest point of a multi-member cluster into each empty cluster.
void repair_empty_clusters(const FeatureMatrix& features, std::vector<double>& centroids,
                           std::size_t k, std::vector<std::uint32_t>& labels,
                           std::vector<double>& sq_dist)
{
  std::vector<std::size_t> counts(k, 0);
  for (const auto l : labels)
  {
    ++counts[l];
  }
  for (std::size_t c = 0; c < k; ++c)
  {
    if (counts[c] != 0)
    {
      continue;
    }
    std::size_t far = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
      if (counts[labels[i]] > 1 && (far == labels.size() || sq_dist[i] > sq_dist[far]))
      {
        far = i;
      }
    }
    // k <= rows guarantees a donor cluster with two or more members.
    --counts[labels[far]];
    labels[far] = static_cast<std::uint32_t>(c);
    sq_dist[far] = 0.0;
    counts[c] = 1;
    set_centroid(centroids, c, features.row(far));
  }
}

double ordered_sum(const std::vector<double>& values)
{
  double sum = 0.0;
  for (const double v : values)
  {
    sum += v;
  }
  return sum;
}

KMeansResult lloyd(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                   const KMeansOptions& options)
{
  const std::size_t n = features.rows();
  std::mt19937_64 rng(seed);

  KMeansResult result;
  result.k = k;
  result.dim = features.dim();
  result.centroids = kmeanspp_init(features, k, rng);
  result.assignments.assign(n, 0);
  std::vector<double> sq_dist(n, 0.0);

  assign_nearest(options.exec, features, result.centroids, k, result.assignments, sq_dist);
  repair_empty_clusters(features, result.centroids, k, result.assignments, sq_dist);
  result.wcss = ordered_sum(sq_dist);
  result.wcss_history.push_back(result.wcss);

  std::vector<std::uint32_t> next_labels(n, 0);
  std::vector<double> next_dist(n, 0.0);
  while (result.iterations < options.max_iter)
  {
    std::vector<double> next_centroids = cluster_means(features, result.assignments, k);
    assign_nearest(options.exec, features, next_centroids, k, next_labels, next_dist);
    repair_empty_clusters(features, next_centroids, k, next_labels, next_dist);
    const double next_wcss = ordered_sum(next_dist);
    ++result.iterations;
    result.wcss_history.push_back(next_wcss);

    if (next_wcss > result.wcss)
    {
      break;
    }
    const bool unchanged = next_labels == result.assignments;
    const double improvement = result.wcss - next_wcss;
    const double previous = result.wcss;
    result.centroids = std::move(next_centroids);
    result.assignments.swap(next_labels);
    result.wcss = next_wcss;
    if (unchanged || improvement < options.tol * previous)
    {
      break;
    }
  }
  return result;
}

}  // namespace

KMeansResult kmeans(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options)
{
  if (features.empty())
  {
    throw std::invalid_argument("kmeans: empty feature matrix");
  }
  if (k == 0)
  {
    throw std::invalid_argument("kmeans: k must be >= 1");
  }
  if (k > features.rows())
  {
    throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " exceeds row count " +
                                std::to_string(features.rows()));
  }
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  KMeansResult best = lloyd(features, k, seed, options);
  for (std::size_t r = 1; r < restarts; ++r)
  {
    KMeansResult candidate = lloyd(features, k, seed + r, options);
    if (candidate.wcss < best.wcss)
    {
      best = std::move(candidate);
    }
  }
  return best;
}

double within_cluster_sum_of_squares(const FeatureMatrix& features,
                                     std::span<const std::uint32_t> assignments,
                                     std::span<const double> centroids)
{
  const std::size_t dim = features.dim();
  double sum = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i)
  {
    sum += squared_distance(features.row(i), centroids.subspan(assignments[i] * dim, dim));
  }
  return sum;
}

std::vector<double> cluster_means(const FeatureMatrix& features,
                                  std::span<const std::uint32_t> assignments, std::size_t k)
{
  const std::size_t dim = features.dim();
  std::vector<double> sums(k * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < features.rows(); ++i)
  {
    const std::size_t c = assignments[i];
    const auto row = features.row(i);
    for (std::size_t j = 0; j < dim; ++j)
    {
      sums[c * dim + j] += row[j];
    }
    ++counts[c];
  }
  for (std::size_t c = 0; c < k; ++c)
  {
    if (counts[c] == 0)
    {
      continue;
    }
    for (std::size_t j = 0; j < dim; ++j)
    {
      sums[c * dim + j] /= static_cast<double>(counts[c]);
    }
  }
  return sums;
}

}  // namespace vpc
