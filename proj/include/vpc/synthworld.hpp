#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vpc/core.hpp"

namespace vpc
{
struct SpeedProfile
{
  enum class Kind { Constant, Variable };

  Kind kind = Kind::Constant;
  double min_speed = 1.0;
  double max_speed = 1.0;

  static SpeedProfile constant() { return {}; }
  static SpeedProfile variable(double min_speed, double max_speed)
  {
    return {Kind::Variable, min_speed, max_speed};
  }
};

struct WorldSpec
{
  std::size_t n_places = 8;
  std::size_t n_samples = 400;
  std::size_t feature_dim = 16;
  SpeedProfile speed;
  double feature_noise_sigma = 0.5;
  /// Drive the loop twice.
  bool revisit = false;
  std::uint64_t seed = 0;
  double loop_radius_m = 100.0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// A mapping session and a later test session over the same closed loop.
/// Feature rows follow trajectory sample order.
struct World
{
  Trajectory train;
  FeatureMatrix train_features;
  Trajectory test;
  FeatureMatrix test_features;
  /// True place of each sample, by trajectory position.
  std::vector<std::uint32_t> train_place;
  std::vector<std::uint32_t> test_place;
};

/// Circular loop cut into n_places arcs of jittered length, the first one
/// starting where the training route starts. Each place has a
/// Gaussian prototype and every sample's feature is its place prototype plus
/// isotropic noise. Samples are taken at a fixed frame interval, so under a
/// variable speed profile the sample spacing along the loop varies. The test
/// session drives the loop again with an independently drawn speed profile,
/// fresh feature noise and up to 2 m / 10 degrees of pose jitter; each test
/// pose lies within 15 m and 9 degrees of arc of a training pose before
/// jitter, so every test sample has a match within 18 m and 20 degrees. A test sample's
/// place is the place of that match.
World generate_world(const WorldSpec& spec);

/// Place ids compacted into a Partition of the training trajectory.
Partition true_place_partition(const World& world);

inline constexpr double kTestMaxOffsetM = 2.0;
inline constexpr double kTestMaxHeadingDeg = 10.0;
inline constexpr double kTestMaxArcGapM = 15.0;
inline constexpr double kTestMaxArcGapDeg = 9.0;

}  // namespace vpc
