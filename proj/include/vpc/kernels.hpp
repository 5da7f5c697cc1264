#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference in vpc::serial and an OpenMP version in vpc::parallel. Each output
// row is written by exactly one iteration with the same arithmetic order, so
// the two must agree bit-for-bit for any thread count.

#include <cstddef>
#include <cstdint>
#include <span>

#include "vpc/core.hpp"

namespace vpc
{
enum class Exec { Serial, Parallel };

/// Squared Euclidean distance, accumulated in double in index order.
inline double squared_distance(std::span<const float> a, std::span<const double> b)
{
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
  {
    const double d = static_cast<double>(a[j]) - b[j];
    sum += d * d;
  }
  return sum;
}

/// Nearest-reference match for one query pose; index < 0 means no candidate.
struct PoseMatch
{
  std::ptrdiff_t index = -1;
  double distance = 0.0;
};

// labels[i] = argmin_c |row_i - centroid_c|^2, ties to the lower c; centroids
// are row-major k x dim.
//
// rank_centroids writes, for query row i, the `top` closest centroids into
// out[i*top, (i+1)*top), ordered by (distance, class id).
//
// match_poses finds, per query, the nearest reference whose heading differs by
// at most max_heading_diff radians; distance ties go to the lower reference id.
namespace serial
{
void assign_nearest(const FeatureMatrix& features, std::span<const double> centroids,
                    std::size_t k, std::span<std::uint32_t> labels,
                    std::span<double> sq_dist);
void rank_centroids(const FeatureMatrix& queries, std::span<const double> centroids,
                    std::size_t k, std::size_t top, std::span<std::uint32_t> out);
void match_poses(std::span<const Pose> queries, std::span<const Pose> refs,
                 std::span<const SampleId> ref_ids, double max_heading_diff,
                 std::span<PoseMatch> out);
}  // namespace serial

namespace parallel
{
void assign_nearest(const FeatureMatrix& features, std::span<const double> centroids,
                    std::size_t k, std::span<std::uint32_t> labels,
                    std::span<double> sq_dist);
void rank_centroids(const FeatureMatrix& queries, std::span<const double> centroids,
                    std::size_t k, std::size_t top, std::span<std::uint32_t> out);
void match_poses(std::span<const Pose> queries, std::span<const Pose> refs,
                 std::span<const SampleId> ref_ids, double max_heading_diff,
                 std::span<PoseMatch> out);
}  // namespace parallel

inline void assign_nearest(Exec exec, const FeatureMatrix& features,
                           std::span<const double> centroids, std::size_t k,
                           std::span<std::uint32_t> labels, std::span<double> sq_dist)
{
  exec == Exec::Serial ? serial::assign_nearest(features, centroids, k, labels, sq_dist)
                       : parallel::assign_nearest(features, centroids, k, labels, sq_dist);
}

inline void rank_centroids(Exec exec, const FeatureMatrix& queries,
                           std::span<const double> centroids, std::size_t k, std::size_t top,
                           std::span<std::uint32_t> out)
{
  exec == Exec::Serial ? serial::rank_centroids(queries, centroids, k, top, out)
                       : parallel::rank_centroids(queries, centroids, k, top, out);
}

inline void match_poses(Exec exec, std::span<const Pose> queries, std::span<const Pose> refs,
                        std::span<const SampleId> ref_ids, double max_heading_diff,
                        std::span<PoseMatch> out)
{
  exec == Exec::Serial ? serial::match_poses(queries, refs, ref_ids, max_heading_diff, out)
                       : parallel::match_poses(queries, refs, ref_ids, max_heading_diff, out);
}

}  // namespace vpc
