#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace vpc
{
using SampleId = std::uint64_t;
using ClassId = std::uint32_t;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Maps an angle into [-pi, pi). Values already in range are returned
/// unchanged, so normalization is idempotent bit-for-bit.
double normalize_angle(double rad);

/// Smallest absolute angle between two headings, in [0, pi].
double angular_difference(double a, double b);

/// Planar pose in a local metric frame. Heading is counter-clockwise
/// positive and always stored normalized.
class Pose
{
public:
  Pose() = default;
  Pose(double x, double y, double heading);

  double x() const { return x_; }
  double y() const { return y_; }
  double heading() const { return heading_; }

  double distance_to(const Pose& other) const
  {
    return std::hypot(x_ - other.x_, y_ - other.y_);
  }

  bool operator==(const Pose&) const = default;

private:
  double x_ = 0.0;
  double y_ = 0.0;
  double heading_ = 0.0;
};

struct TrajectorySample
{
  SampleId sample_id = 0;
  double timestamp = 0.0;
  Pose pose;

  bool operator==(const TrajectorySample&) const = default;
};

/// Ordered sequence of samples. Construction sorts by (timestamp, sample_id)
/// and rejects duplicate ids or non-finite timestamps.
class Trajectory
{
public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectorySample> samples,
                      std::string frame_note = "planar local frame, meters");

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const TrajectorySample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const TrajectorySample> samples() const { return samples_; }
  const std::string& frame_note() const { return frame_note_; }

  std::vector<double> timestamps() const;
  std::vector<Pose> poses() const;
  std::vector<SampleId> sample_ids() const;

  bool operator==(const Trajectory&) const = default;

private:
  std::vector<TrajectorySample> samples_;
  std::string frame_note_;
};

/// Distance travelled along the trajectory up to each sample. Element 0 is 0.
std::vector<double> cumulative_travel_distance(const Trajectory& traj);

/// Row-major N x D matrix of appearance descriptors. Entries are stored in
/// single precision (the on-disk precision) and must be finite.
class FeatureMatrix
{
public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<float> values);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_ == 0; }

  std::span<const float> row(std::size_t i) const
  {
    return std::span<const float>(values_).subspan(i * dim_, dim_);
  }
  std::span<const float> values() const { return values_; }
  float operator()(std::size_t r, std::size_t c) const { return values_[r * dim_ + c]; }

  /// New matrix whose row i is this matrix's row `order[i]`.
  FeatureMatrix select_rows(std::span<const std::size_t> order) const;

  /// Copy with every row scaled to unit L2 norm (zero rows left as is).
  FeatureMatrix l2_normalized() const;

  bool operator==(const FeatureMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

/// Assignment of samples to dense place-class ids [0, n_classes).
/// Entries keep the order they were constructed with (trajectory order for
/// every partition produced by this library).
class Partition
{
public:
  Partition() = default;

  /// Validates unique sample ids and class-id density.
  Partition(std::vector<SampleId> sample_ids, std::vector<ClassId> class_ids);

  /// Compacts arbitrary labels to dense ids, preserving label order.
  static Partition from_raw_labels(std::vector<SampleId> sample_ids,
                                   std::span<const std::uint64_t> raw_labels);

  std::size_t size() const { return sample_ids_.size(); }
  std::size_t n_classes() const { return n_classes_; }

  SampleId sample_id(std::size_t i) const { return sample_ids_[i]; }
  ClassId class_at(std::size_t i) const { return class_ids_[i]; }
  std::span<const SampleId> sample_ids() const { return sample_ids_; }
  std::span<const ClassId> class_ids() const { return class_ids_; }

  bool contains(SampleId id) const { return index_.contains(id); }
  /// Throws std::out_of_range for unknown ids.
  ClassId class_of(SampleId id) const;

  /// Number of members per class.
  std::vector<std::size_t> class_sizes() const;

  /// Same assignment re-ordered to follow `traj`. Throws if a trajectory
  /// sample is missing or the partition holds extra samples.
  Partition aligned_to(const Trajectory& traj) const;

  bool operator==(const Partition& other) const
  {
    return sample_ids_ == other.sample_ids_ && class_ids_ == other.class_ids_;
  }

private:
  std::vector<SampleId> sample_ids_;
  std::vector<ClassId> class_ids_;
  std::size_t n_classes_ = 0;
  std::unordered_map<SampleId, std::size_t> index_;
};

}  // namespace vpc
