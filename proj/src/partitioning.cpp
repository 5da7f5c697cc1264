#include "vpc/partitioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vpc
{
namespace
{
void require_input(const Trajectory& traj, std::size_t n_classes)
{
  if (traj.empty())
  {
    throw std::invalid_argument("partition: empty trajectory");
  }
  if (n_classes == 0)
  {
    throw std::invalid_argument("partition: number of classes must be >= 1");
  }
}

Partition partition_by_cue(const Trajectory& traj, std::span<const double> cues,
                           std::size_t n_classes)
{
  const auto bins = interval_bins(cues, n_classes);
  const std::vector<std::uint64_t> raw(bins.begin(), bins.end());
  return Partition::from_raw_labels(traj.sample_ids(), raw);
}

}  // namespace

std::string_view to_string(Strategy strategy)
{
  switch (strategy)
  {
    case Strategy::Time:
      return "time";
    case Strategy::Location:
      return "location";
    case Strategy::TimeAppearance:
      return "time-appearance";
    case Strategy::LocationAppearance:
      return "location-appearance";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name)
{
  for (const Strategy s : {Strategy::Time, Strategy::Location, Strategy::TimeAppearance,
                           Strategy::LocationAppearance})
  {
    if (to_string(s) == name)
    {
      return s;
    }
  }
  return std::nullopt;
}

std::vector<std::uint32_t> interval_bins(std::span<const double> cues, std::size_t bins)
{
  if (bins == 0)
  {
    throw std::invalid_argument("interval_bins: bins must be >= 1");
  }
  std::vector<std::uint32_t> out(cues.size(), 0);
  if (cues.empty() || bins == 1)
  {
    return out;
  }
  const auto [lo_it, hi_it] = std::minmax_element(cues.begin(), cues.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo))
  {
    return out;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  const std::size_t last = bins - 1;
  const auto boundary = [&](std::size_t j) { return lo + static_cast<double>(j) * width; };
  for (std::size_t i = 0; i < cues.size(); ++i)
  {
    const double c = cues[i];
    std::size_t b = last;
    if (width > 0.0)
    {
      const double q = std::floor((c - lo) / width);
      b = q <= 0.0 ? 0 : std::min(last, static_cast<std::size_t>(q));
    }
    // The division can round across a boundary; settle against the boundaries
    // themselves.
    while (b < last && c >= boundary(b + 1))
    {
      ++b;
    }
    while (b > 0 && c < boundary(b))
    {
      --b;
    }
    out[i] = static_cast<std::uint32_t>(b);
  }
  return out;
}

Partition partition_by_time(const Trajectory& traj, std::size_t n_classes)
{
  require_input(traj, n_classes);
  const auto cues = traj.timestamps();
  return partition_by_cue(traj, cues, n_classes);
}

Partition partition_by_location(const Trajectory& traj, std::size_t n_classes)
{
  require_input(traj, n_classes);
  const auto cues = cumulative_travel_distance(traj);
  return partition_by_cue(traj, cues, n_classes);
}

Partition partition_hybrid(const Trajectory& traj, const FeatureMatrix& features,
                           const PartitionConfig& config)
{
  require_input(traj, config.n_classes_target);
  if (!is_hybrid(config.strategy))
  {
    throw std::invalid_argument("partition_hybrid: strategy " +
                                std::string(to_string(config.strategy)) + " is not a hybrid");
  }
  if (features.rows() != traj.size())
  {
    throw std::invalid_argument("partition_hybrid: " + std::to_string(features.rows()) +
                                " feature rows for " + std::to_string(traj.size()) +
                                " trajectory samples");
  }
  const std::size_t k_requested = config.k_appearance.value_or(config.n_classes_target);
  if (k_requested == 0)
  {
    throw std::invalid_argument("partition_hybrid: k_appearance must be >= 1");
  }
  const std::size_t n = traj.size();
  const std::size_t k = std::min(k_requested, n);

  const KMeansResult clusters = config.normalize_features
                                    ? kmeans(features.l2_normalized(), k, config.seed, config.kmeans)
                                    : kmeans(features, k, config.seed, config.kmeans);

  const std::vector<double> cues = config.strategy == Strategy::TimeAppearance
                                       ? traj.timestamps()
                                       : cumulative_travel_distance(traj);

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i)
  {
    members[clusters.assignments[i]].push_back(i);
  }

  const std::size_t target_size = (n + config.n_classes_target - 1) / config.n_classes_target;
  std::vector<std::uint64_t> raw(n, 0);
  std::uint64_t offset = 0;
  for (const auto& cluster : members)
  {
    if (cluster.empty())
    {
      continue;
    }
    const auto subclasses = static_cast<std::size_t>(std::max<long>(
        1, std::lround(static_cast<double>(cluster.size()) / static_cast<double>(target_size))));
    std::vector<double> member_cues;
    member_cues.reserve(cluster.size());
    for (const std::size_t i : cluster)
    {
      member_cues.push_back(cues[i]);
    }
    const auto bins = interval_bins(member_cues, subclasses);
    for (std::size_t m = 0; m < cluster.size(); ++m)
    {
      raw[cluster[m]] = offset + bins[m];
    }
    offset += subclasses;
  }
  return Partition::from_raw_labels(traj.sample_ids(), raw);
}

Partition partition_workspace(const Trajectory& traj, const FeatureMatrix* features,
                              const PartitionConfig& config)
{
  switch (config.strategy)
  {
    case Strategy::Time:
      return partition_by_time(traj, config.n_classes_target);
    case Strategy::Location:
      return partition_by_location(traj, config.n_classes_target);
    case Strategy::TimeAppearance:
    case Strategy::LocationAppearance:
      if (features == nullptr)
      {
        throw std::invalid_argument("partition: strategy " +
                                    std::string(to_string(config.strategy)) +
                                    " requires appearance features");
      }
      return partition_hybrid(traj, *features, config);
  }
  throw std::invalid_argument("partition: unknown strategy");
}

}  // namespace vpc
