#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "vpc/kernels.hpp"

namespace vpc::serial
{
void assign_nearest(const FeatureMatrix& features, std::span<const double> centroids,
                    std::size_t k, std::span<std::uint32_t> labels, std::span<double> sq_dist)
{
  const std::size_t dim = features.dim();
  for (std::size_t i = 0; i < features.rows(); ++i)
  {
    const auto row = features.row(i);
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
    labels[i] = best;
    sq_dist[i] = best_d;
  }
}

void rank_centroids(const FeatureMatrix& queries, std::span<const double> centroids,
                    std::size_t k, std::size_t top, std::span<std::uint32_t> out)
{
  const std::size_t dim = queries.dim();
  std::vector<std::pair<double, std::uint32_t>> scored(k);
  for (std::size_t i = 0; i < queries.rows(); ++i)
  {
    const auto row = queries.row(i);
    for (std::size_t c = 0; c < k; ++c)
    {
      scored[c] = {squared_distance(row, centroids.subspan(c * dim, dim)),
                   static_cast<std::uint32_t>(c)};
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top),
                      scored.end());
    for (std::size_t r = 0; r < top; ++r)
    {
      out[i * top + r] = scored[r].second;
    }
  }
}

void match_poses(std::span<const Pose> queries, std::span<const Pose> refs,
                 std::span<const SampleId> ref_ids, double max_heading_diff,
                 std::span<PoseMatch> out)
{
  for (std::size_t q = 0; q < queries.size(); ++q)
  {
    PoseMatch best;
    for (std::size_t r = 0; r < refs.size(); ++r)
    {
      if (angular_difference(queries[q].heading(), refs[r].heading()) > max_heading_diff)
      {
        continue;
      }
      const double d = queries[q].distance_to(refs[r]);
      if (best.index < 0 || d < best.distance ||
          (d == best.distance && ref_ids[r] < ref_ids[static_cast<std::size_t>(best.index)]))
      {
        best.index = static_cast<std::ptrdiff_t>(r);
        best.distance = d;
      }
    }
    out[q] = best;
  }
}

}  // namespace vpc::serial
