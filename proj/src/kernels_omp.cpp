#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "vpc/kernels.hpp"

namespace vpc::parallel
{
void assign_nearest(const FeatureMatrix& features, std::span<const double> centroids,
                    std::size_t k, std::span<std::uint32_t> labels, std::span<double> sq_dist)
{
  const std::size_t dim = features.dim();
  const auto n = static_cast<std::int64_t>(features.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
  {
    const auto row = features.row(static_cast<std::size_t>(i));
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
    {
      const double d = squared_distance(row, centroids.subspan(c * dim, dim));
      if (d < best_d)
      {
        best_d = d;
        best = static_cast<std::uint32_t>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    sq_dist[static_cast<std::size_t>(i)] = best_d;
  }
}

void rank_centroids(const FeatureMatrix& queries, std::span<const double> centroids,
                    std::size_t k, std::size_t top, std::span<std::uint32_t> out)
{
  const std::size_t dim = queries.dim();
  const auto n = static_cast<std::int64_t>(queries.rows());
#pragma omp parallel
  {
    std::vector<std::pair<double, std::uint32_t>> scored(k);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
    {
      const auto row = queries.row(static_cast<std::size_t>(i));
      for (std::size_t c = 0; c < k; ++c)
      {
        scored[c] = {squared_distance(row, centroids.subspan(c * dim, dim)),
                     static_cast<std::uint32_t>(c)};
      }
      std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top),
                        scored.end());
      for (std::size_t r = 0; r < top; ++r)
      {
        out[static_cast<std::size_t>(i) * top + r] = scored[r].second;
      }
    }
  }
}

void match_poses(std::span<const Pose> queries, std::span<const Pose> refs,
                 std::span<const SampleId> ref_ids, double max_heading_diff,
                 std::span<PoseMatch> out)
{
  const auto n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t q = 0; q < n; ++q)
  {
    const Pose& query = queries[static_cast<std::size_t>(q)];
    PoseMatch best;
    for (std::size_t r = 0; r < refs.size(); ++r)
    {
      if (angular_difference(query.heading(), refs[r].heading()) > max_heading_diff)
      {
        continue;
      }
      const double d = query.distance_to(refs[r]);
      if (best.index < 0 || d < best.distance ||
          (d == best.distance && ref_ids[r] < ref_ids[static_cast<std::size_t>(best.index)]))
      {
        best.index = static_cast<std::ptrdiff_t>(r);
        best.distance = d;
      }
    }
    out[static_cast<std::size_t>(q)] = best;
  }
}

}  // namespace vpc::parallel
