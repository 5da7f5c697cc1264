#include "vpc/synthworld.hpp"

#include "vpc/evaluation.hpp"
#include "vpc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace vpc
{
namespace
{
// Independent random streams so that e.g. changing the noise level leaves the
// geometry untouched.
enum Stream : std::uint64_t
{
  kGeometry = 1,
  kPrototypes,
  kSpeed,
  kTrainNoise,
  kTestJitter,
  kTestSpeed
};

std::mt19937_64 stream(std::uint64_t seed, Stream id)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

// Angles where each place begins, ascending from 0 at the route start. Place
// lengths are jittered by up to 30% of the nominal arc.
std::vector<double> place_starts(std::size_t n_places, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  const double nominal = kTwoPi / static_cast<double>(n_places);
  std::vector<double> starts(n_places, 0.0);
  for (std::size_t j = 1; j < n_places; ++j)
  {
    starts[j] = (static_cast<double>(j) + jitter(rng)) * nominal;
  }
  return starts;
}

std::uint32_t place_of(double angle, const std::vector<double>& starts)
{
  const double rel = std::fmod(std::fmod(angle, kTwoPi) + kTwoPi, kTwoPi);
  const auto after = std::upper_bound(starts.begin(), starts.end(), rel);
  return static_cast<std::uint32_t>(after - starts.begin() - 1);
}

// Arc length travelled at each frame when n frames at a fixed interval cover
// the route, speed being piecewise constant over segments of 20 frames.
struct Traversal
{
  std::vector<double> arc;
  double frame_dt = 0.0;
};

Traversal traverse(std::size_t n, const SpeedProfile& profile, double route_length,
                   std::mt19937_64& rng)
{
  std::vector<double> speed(n, 1.0);
  if (profile.kind == SpeedProfile::Kind::Variable)
  {
    std::uniform_real_distribution<double> pick(profile.min_speed, profile.max_speed);
    constexpr std::size_t segment = 20;
    double current = pick(rng);
    for (std::size_t i = 0; i < n; ++i)
    {
      if (i > 0 && i % segment == 0)
      {
        current = pick(rng);
      }
      speed[i] = current;
    }
  }
  double speed_sum = 0.0;
  for (const double v : speed)
  {
    speed_sum += v;
  }
  Traversal out;
  out.frame_dt = route_length / speed_sum;
  out.arc.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
  {
    out.arc[i] = out.arc[i - 1] + speed[i - 1] * out.frame_dt;
  }
  return out;
}

std::vector<float> noisy_features(const std::vector<std::uint32_t>& places,
                                  const std::vector<double>& prototypes, std::size_t dim,
                                  double sigma, std::mt19937_64& rng)
{
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<float> out(places.size() * dim);
  for (std::size_t i = 0; i < places.size(); ++i)
  {
    for (std::size_t j = 0; j < dim; ++j)
    {
      const double z = noise(rng);
      out[i * dim + j] = static_cast<float>(prototypes[places[i] * dim + j] + sigma * z);
    }
  }
  return out;
}

}  // namespace

void WorldSpec::validate() const
{
  if (n_places < 1)
  {
    throw std::invalid_argument("WorldSpec: n_places must be >= 1");
  }
  if (n_samples < n_places)
  {
    throw std::invalid_argument("WorldSpec: n_samples must be >= n_places");
  }
  if (feature_dim < 1)
  {
    throw std::invalid_argument("WorldSpec: feature_dim must be >= 1");
  }
  if (!(feature_noise_sigma >= 0.0) || !std::isfinite(feature_noise_sigma))
  {
    throw std::invalid_argument("WorldSpec: feature_noise_sigma must be finite and >= 0");
  }
  if (!(loop_radius_m > 0.0) || !std::isfinite(loop_radius_m))
  {
    throw std::invalid_argument("WorldSpec: loop radius must be positive");
  }
  if (speed.kind == SpeedProfile::Kind::Variable &&
      !(speed.min_speed > 0.0 && speed.max_speed >= speed.min_speed &&
        std::isfinite(speed.max_speed)))
  {
    throw std::invalid_argument("WorldSpec: variable speed needs 0 < min_speed <= max_speed");
  }
}

World generate_world(const WorldSpec& spec)
{
  spec.validate();
  const std::size_t n = spec.n_samples;
  const std::size_t dim = spec.feature_dim;
  const double laps = spec.revisit ? 2.0 : 1.0;

  auto geometry_rng = stream(spec.seed, kGeometry);
  const auto starts = place_starts(spec.n_places, geometry_rng);

  auto prototype_rng = stream(spec.seed, kPrototypes);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> prototypes(spec.n_places * dim);
  for (auto& v : prototypes)
  {
    v = unit(prototype_rng);
  }

  const double route_length = laps * kTwoPi * spec.loop_radius_m;
  auto speed_rng = stream(spec.seed, kSpeed);
  const Traversal train_run = traverse(n, spec.speed, route_length, speed_rng);
  const std::vector<double>& arc = train_run.arc;
  const double frame_dt = train_run.frame_dt;

  World world;
  std::vector<TrajectorySample> train_samples(n);
  world.train_place.resize(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const double angle = arc[i] / spec.loop_radius_m;
    train_samples[i].sample_id = i;
    train_samples[i].timestamp = static_cast<double>(i) * frame_dt;
    train_samples[i].pose = Pose(spec.loop_radius_m * std::cos(angle),
                                 spec.loop_radius_m * std::sin(angle),
                                 angle + std::numbers::pi / 2.0);
    world.train_place[i] = place_of(angle, starts);
  }

  // The test session drives the loop again with its own speed profile. Each
  // test frame stays within a bounded arc distance of some training frame so
  // that it always has a valid ground-truth match.
  auto test_speed_rng = stream(spec.seed, kTestSpeed);
  const Traversal test_run = traverse(n, spec.speed, route_length, test_speed_rng);
  const double max_arc_gap =
      std::min(kTestMaxArcGapM, spec.loop_radius_m * deg_to_rad(kTestMaxArcGapDeg));

  auto jitter_rng = stream(spec.seed, kTestJitter);
  std::uniform_real_distribution<double> unit_interval(0.0, 1.0);
  std::uniform_real_distribution<double> heading_jitter(-deg_to_rad(kTestMaxHeadingDeg),
                                                        deg_to_rad(kTestMaxHeadingDeg));
  const double session_offset = train_samples.back().timestamp + 86400.0;
  std::vector<TrajectorySample> test_samples(n);
  world.test_place.resize(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const double want = test_run.arc[i];
    const auto hi = std::lower_bound(arc.begin(), arc.end(), want);
    std::size_t near = static_cast<std::size_t>(hi - arc.begin());
    if (near == n || (near > 0 && want - arc[near - 1] < arc[near] - want))
    {
      near = near == 0 ? 0 : near - 1;
    }
    const double along = std::clamp(want - arc[near], -max_arc_gap, max_arc_gap);
    const double angle = (arc[near] + along) / spec.loop_radius_m;

    const double radius = kTestMaxOffsetM * std::sqrt(unit_interval(jitter_rng));
    const double direction = kTwoPi * unit_interval(jitter_rng);
    const double dh = heading_jitter(jitter_rng);
    test_samples[i].sample_id = i;
    test_samples[i].timestamp = static_cast<double>(i) * test_run.frame_dt + session_offset;
    test_samples[i].pose = Pose(spec.loop_radius_m * std::cos(angle) + radius * std::cos(direction),
                                spec.loop_radius_m * std::sin(angle) + radius * std::sin(direction),
                                angle + std::numbers::pi / 2.0 + dh);
  }
  // A test frame sees the place of the mapped pose it re-observes, i.e. its
  // ground-truth match under the default thresholds.
  {
    std::vector<Pose> test_poses;
    std::vector<Pose> train_poses;
    std::vector<SampleId> train_ids;
    for (const auto& s : test_samples)
    {
      test_poses.push_back(s.pose);
    }
    for (const auto& s : train_samples)
    {
      train_poses.push_back(s.pose);
      train_ids.push_back(s.sample_id);
    }
    std::vector<PoseMatch> matches(n);
    match_poses(Exec::Parallel, test_poses, train_poses, train_ids,
                deg_to_rad(GroundTruthThresholds{}.orientation_deg), matches);
    for (std::size_t i = 0; i < n; ++i)
    {
      world.test_place[i] = world.train_place[static_cast<std::size_t>(matches[i].index)];
    }
  }

  auto noise_rng = stream(spec.seed, kTrainNoise);
  world.train_features = FeatureMatrix(
      n, dim,
      noisy_features(world.train_place, prototypes, dim, spec.feature_noise_sigma, noise_rng));
  world.test_features = FeatureMatrix(
      n, dim,
      noisy_features(world.test_place, prototypes, dim, spec.feature_noise_sigma, noise_rng));

  world.train = Trajectory(std::move(train_samples), "synthetic loop, local frame, meters");
  world.test = Trajectory(std::move(test_samples), "synthetic loop, local frame, meters");
  return world;
}

Partition true_place_partition(const World& world)
{
  const std::vector<std::uint64_t> raw(world.train_place.begin(), world.train_place.end());
  return Partition::from_raw_labels(world.train.sample_ids(), raw);
}

}  // namespace vpc
