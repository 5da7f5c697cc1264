#include "vpc/core.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace vpc
{
double normalize_angle(double rad)
{
  constexpr double pi = std::numbers::pi;
  if (rad >= -pi && rad < pi)
  {
    return rad;
  }
  double wrapped = rad - kTwoPi * std::floor((rad + pi) / kTwoPi);
  // floor() can land one period off when rad + pi rounds across a multiple.
  if (wrapped >= pi)
  {
    wrapped -= kTwoPi;
  }
  if (wrapped < -pi)
  {
    wrapped += kTwoPi;
  }
  return wrapped;
}

double angular_difference(double a, double b)
{
  // |a - b| is exactly symmetric in floating point, so is the result.
  const double d = std::fmod(std::fabs(a - b), kTwoPi);
  return d > std::numbers::pi ? kTwoPi - d : d;
}

Pose::Pose(double x, double y, double heading)
    : x_(x), y_(y), heading_(normalize_angle(heading))
{
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(heading))
  {
    throw std::invalid_argument("Pose: non-finite coordinate or heading");
  }
}

Trajectory::Trajectory(std::vector<TrajectorySample> samples, std::string frame_note)
    : samples_(std::move(samples)), frame_note_(std::move(frame_note))
{
  for (const auto& s : samples_)
  {
    if (!std::isfinite(s.timestamp))
    {
      throw std::invalid_argument("Trajectory: non-finite timestamp for sample " +
                                  std::to_string(s.sample_id));
    }
  }
  std::sort(samples_.begin(), samples_.end(),
            [](const TrajectorySample& a, const TrajectorySample& b) {
              if (a.timestamp != b.timestamp)
              {
                return a.timestamp < b.timestamp;
              }
              return a.sample_id < b.sample_id;
            });
  std::vector<SampleId> ids = sample_ids();
  std::sort(ids.begin(), ids.end());
  const auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end())
  {
    throw std::invalid_argument("Trajectory: duplicate sample_id " + std::to_string(*dup));
  }
}

std::vector<double> Trajectory::timestamps() const
{
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_)
  {
    out.push_back(s.timestamp);
  }
  return out;
}

std::vector<Pose> Trajectory::poses() const
{
  std::vector<Pose> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_)
  {
    out.push_back(s.pose);
  }
  return out;
}

std::vector<SampleId> Trajectory::sample_ids() const
{
  std::vector<SampleId> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_)
  {
    out.push_back(s.sample_id);
  }
  return out;
}

std::vector<double> cumulative_travel_distance(const Trajectory& traj)
{
  if (traj.empty())
  {
    throw std::invalid_argument("cumulative_travel_distance: empty trajectory");
  }
  std::vector<double> out(traj.size(), 0.0);
  for (std::size_t i = 1; i < traj.size(); ++i)
  {
    out[i] = out[i - 1] + traj[i - 1].pose.distance_to(traj[i].pose);
  }
  return out;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<float> values)
    : rows_(rows), dim_(dim), values_(std::move(values))
{
  if (rows_ == 0 || dim_ == 0)
  {
    throw std::invalid_argument("FeatureMatrix: n_rows and dim must be >= 1");
  }
  if (values_.size() != rows_ * dim_)
  {
    throw std::invalid_argument("FeatureMatrix: value count does not match rows x dim");
  }
  for (std::size_t i = 0; i < values_.size(); ++i)
  {
    if (!std::isfinite(values_[i]))
    {
      throw std::invalid_argument("FeatureMatrix: non-finite entry at row " +
                                  std::to_string(i / dim_));
    }
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> order) const
{
  std::vector<float> out;
  out.reserve(order.size() * dim_);
  for (const std::size_t r : order)
  {
    if (r >= rows_)
    {
      throw std::out_of_range("FeatureMatrix::select_rows: row index out of range");
    }
    const auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return FeatureMatrix(order.size(), dim_, std::move(out));
}

FeatureMatrix FeatureMatrix::l2_normalized() const
{
  std::vector<float> out(values_);
  for (std::size_t r = 0; r < rows_; ++r)
  {
    double sq = 0.0;
    for (std::size_t c = 0; c < dim_; ++c)
    {
      const double v = values_[r * dim_ + c];
      sq += v * v;
    }
    if (sq > 0.0)
    {
      const double inv = 1.0 / std::sqrt(sq);
      for (std::size_t c = 0; c < dim_; ++c)
      {
        out[r * dim_ + c] = static_cast<float>(values_[r * dim_ + c] * inv);
      }
    }
  }
  return FeatureMatrix(rows_, dim_, std::move(out));
}

Partition::Partition(std::vector<SampleId> sample_ids, std::vector<ClassId> class_ids)
    : sample_ids_(std::move(sample_ids)), class_ids_(std::move(class_ids))
{
  if (sample_ids_.size() != class_ids_.size())
  {
    throw std::invalid_argument("Partition: sample/class count mismatch");
  }
  index_.reserve(sample_ids_.size());
  for (std::size_t i = 0; i < sample_ids_.size(); ++i)
  {
    if (!index_.emplace(sample_ids_[i], i).second)
    {
      throw std::invalid_argument("Partition: duplicate sample_id " +
                                  std::to_string(sample_ids_[i]));
    }
  }
  if (class_ids_.empty())
  {
    return;
  }
  const ClassId max_id = *std::max_element(class_ids_.begin(), class_ids_.end());
  std::vector<bool> used(static_cast<std::size_t>(max_id) + 1, false);
  for (const ClassId c : class_ids_)
  {
    used[c] = true;
  }
  const auto missing = std::find(used.begin(), used.end(), false);
  if (missing != used.end())
  {
    throw std::invalid_argument("Partition: class ids are not dense (missing id " +
                                std::to_string(missing - used.begin()) + ")");
  }
  n_classes_ = used.size();
}

Partition Partition::from_raw_labels(std::vector<SampleId> sample_ids,
                                     std::span<const std::uint64_t> raw_labels)
{
  std::vector<std::uint64_t> distinct(raw_labels.begin(), raw_labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<ClassId> dense;
  dense.reserve(raw_labels.size());
  for (const std::uint64_t raw : raw_labels)
  {
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), raw);
    dense.push_back(static_cast<ClassId>(it - distinct.begin()));
  }
  return Partition(std::move(sample_ids), std::move(dense));
}

ClassId Partition::class_of(SampleId id) const
{
  const auto it = index_.find(id);
  if (it == index_.end())
  {
    throw std::out_of_range("Partition: unknown sample_id " + std::to_string(id));
  }
  return class_ids_[it->second];
}

std::vector<std::size_t> Partition::class_sizes() const
{
  std::vector<std::size_t> sizes(n_classes_, 0);
  for (const ClassId c : class_ids_)
  {
    ++sizes[c];
  }
  return sizes;
}

Partition Partition::aligned_to(const Trajectory& traj) const
{
  if (traj.size() != size())
  {
    throw std::invalid_argument("Partition: covers " + std::to_string(size()) +
                                " samples but trajectory has " + std::to_string(traj.size()));
  }
  std::vector<SampleId> ids;
  std::vector<ClassId> classes;
  ids.reserve(traj.size());
  classes.reserve(traj.size());
  for (const auto& s : traj.samples())
  {
    const auto it = index_.find(s.sample_id);
    if (it == index_.end())
    {
      throw std::invalid_argument("Partition: no class for trajectory sample " +
                                  std::to_string(s.sample_id));
    }
    ids.push_back(s.sample_id);
    classes.push_back(class_ids_[it->second]);
  }
  return Partition(std::move(ids), std::move(classes));
}

}  // namespace vpc
