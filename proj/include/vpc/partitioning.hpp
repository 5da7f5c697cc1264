#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vpc/core.hpp"
#include "vpc/kmeans.hpp"

namespace vpc
{
enum class Strategy { Time, Location, TimeAppearance, LocationAppearance };

/// "time", "location", "time-appearance", "location-appearance".
std::string_view to_string(Strategy strategy);
/// Inverse of to_string; std::nullopt for unknown names.
std::optional<Strategy> parse_strategy(std::string_view name);

inline bool is_hybrid(Strategy s)
{
  return s == Strategy::TimeAppearance || s == Strategy::LocationAppearance;
}

struct PartitionConfig
{
  Strategy strategy = Strategy::Location;
  /// Exact class count for the base strategies; sizes the sub-clusters of the
  /// hybrids.
  std::size_t n_classes_target = 1;
  /// Appearance cluster count for the hybrids; defaults to n_classes_target.
  std::optional<std::size_t> k_appearance;
  std::uint64_t seed = 0;
  /// Scale feature rows to unit length before clustering.
  bool normalize_features = false;
  KMeansOptions kmeans;
};

/// Equal-width interval rule. The range [min(cues), max(cues)] is cut into
/// `bins` intervals of width w; the boundaries are lo + j*w for j = 1..bins-1
/// and a cue lying exactly on a boundary goes to the upper interval. All cues
/// fall in interval 0 when the range is empty. Returned ids are raw (not
/// compacted) and monotone non-decreasing in the cue.
std::vector<std::uint32_t> interval_bins(std::span<const double> cues, std::size_t bins);

Partition partition_by_time(const Trajectory& traj, std::size_t n_classes);
Partition partition_by_location(const Trajectory& traj, std::size_t n_classes);

/// Appearance k-means followed by per-cluster time or location binning.
/// Cluster c with n_c members is cut into max(1, round(n_c / s)) sub-classes,
/// s = ceil(N / n_classes_target), over its members' own cue range.
Partition partition_hybrid(const Trajectory& traj, const FeatureMatrix& features,
                           const PartitionConfig& config);

/// Dispatches on config.strategy. `features` is required for the hybrids.
Partition partition_workspace(const Trajectory& traj, const FeatureMatrix* features,
                              const PartitionConfig& config);

}  // namespace vpc
