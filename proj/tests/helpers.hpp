#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vpc/core.hpp"

namespace testutil
{
inline std::vector<vpc::ClassId> classes(const vpc::Partition& p)
{
  return {p.class_ids().begin(), p.class_ids().end()};
}

/// Line of samples at the given x positions, one second apart.
inline vpc::Trajectory line(const std::vector<double>& xs)
{
  std::vector<vpc::TrajectorySample> samples;
  for (std::size_t i = 0; i < xs.size(); ++i)
  {
    samples.push_back({i, static_cast<double>(i), vpc::Pose(xs[i], 0.0, 0.0)});
  }
  return vpc::Trajectory(std::move(samples));
}

inline vpc::Trajectory at_times(const std::vector<double>& ts)
{
  std::vector<vpc::TrajectorySample> samples;
  for (std::size_t i = 0; i < ts.size(); ++i)
  {
    samples.push_back({i, ts[i], vpc::Pose(static_cast<double>(i), 0.0, 0.0)});
  }
  return vpc::Trajectory(std::move(samples));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("vpc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
