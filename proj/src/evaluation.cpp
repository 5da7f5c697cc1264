#include "vpc/evaluation.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace vpc
{
namespace
{
std::size_t count_valid(std::span<const GroundTruthLabel> gts)
{
  return static_cast<std::size_t>(
      std::count_if(gts.begin(), gts.end(), [](const auto& g) { return g.valid(); }));
}

void require_aligned(std::span<const TopXPrediction> preds, std::span<const GroundTruthLabel> gts)
{
  if (preds.size() != gts.size())
  {
    throw std::invalid_argument("metrics: " + std::to_string(preds.size()) + " predictions for " +
                                std::to_string(gts.size()) + " ground-truth labels");
  }
  for (std::size_t i = 0; i < preds.size(); ++i)
  {
    if (preds[i].test_sample_id != gts[i].test_sample_id)
    {
      throw std::invalid_argument("metrics: prediction " + std::to_string(i) +
                                  " is for test sample " +
                                  std::to_string(preds[i].test_sample_id) +
                                  " but ground truth is for " +
                                  std::to_string(gts[i].test_sample_id));
    }
  }
}

RateResult finish(Rational numerator, std::size_t n_valid)
{
  RateResult r;
  r.n_valid = n_valid;
  if (n_valid == 0)
  {
    r.no_valid_tests = true;
    return r;
  }
  r.exact = numerator / Rational(n_valid);
  r.value = r.exact.convert_to<double>();
  return r;
}

bool contains(const std::vector<ClassId>& ranked, ClassId c)
{
  return std::find(ranked.begin(), ranked.end(), c) != ranked.end();
}

}  // namespace

std::vector<GroundTruthLabel> assign_ground_truth(const Trajectory& test, const Trajectory& train,
                                                  const Partition& train_partition,
                                                  const GroundTruthThresholds& thresholds,
                                                  Exec exec)
{
  if (train.empty())
  {
    throw std::invalid_argument("assign_ground_truth: empty training trajectory");
  }
  const Partition aligned = train_partition.aligned_to(train);
  const auto queries = test.poses();
  const auto refs = train.poses();
  const auto ref_ids = train.sample_ids();
  std::vector<PoseMatch> matches(queries.size());
  match_poses(exec, queries, refs, ref_ids, deg_to_rad(thresholds.orientation_deg), matches);

  std::vector<GroundTruthLabel> out(test.size());
  for (std::size_t i = 0; i < test.size(); ++i)
  {
    out[i].test_sample_id = test[i].sample_id;
    const PoseMatch& m = matches[i];
    if (m.index < 0 || m.distance > thresholds.distance_m)
    {
      continue;
    }
    const auto r = static_cast<std::size_t>(m.index);
    out[i].label = aligned.class_at(r);
    out[i].matched_train_id = ref_ids[r];
    out[i].match_distance = m.distance;
  }
  return out;
}

CentroidModel train_centroid_model(const FeatureMatrix& train_features,
                                   const Partition& train_partition)
{
  if (train_features.rows() != train_partition.size())
  {
    throw std::invalid_argument("train_centroid_model: " +
                                std::to_string(train_features.rows()) + " feature rows for " +
                                std::to_string(train_partition.size()) + " partitioned samples");
  }
  CentroidModel model;
  model.dim = train_features.dim();
  model.counts.assign(train_partition.n_classes(), 0);
  model.centroids.assign(train_partition.n_classes() * model.dim, 0.0);
  for (std::size_t i = 0; i < train_features.rows(); ++i)
  {
    const ClassId c = train_partition.class_at(i);
    const auto row = train_features.row(i);
    for (std::size_t j = 0; j < model.dim; ++j)
    {
      model.centroids[c * model.dim + j] += row[j];
    }
    ++model.counts[c];
  }
  for (std::size_t c = 0; c < model.n_classes(); ++c)
  {
    for (std::size_t j = 0; j < model.dim; ++j)
    {
      model.centroids[c * model.dim + j] /= static_cast<double>(model.counts[c]);
    }
  }
  return model;
}

TopXPrediction classify_top_x(const CentroidModel& model, std::span<const float> feature,
                              std::size_t top, SampleId test_sample_id)
{
  const FeatureMatrix query(1, feature.size(), std::vector<float>(feature.begin(), feature.end()));
  return classify_batch(model, query, std::span<const SampleId>(&test_sample_id, 1), top,
                        Exec::Serial)
      .front();
}

std::vector<TopXPrediction> classify_batch(const CentroidModel& model,
                                           const FeatureMatrix& features,
                                           std::span<const SampleId> test_sample_ids,
                                           std::size_t top, Exec exec)
{
  if (top == 0)
  {
    throw std::invalid_argument("classify: X must be >= 1");
  }
  if (model.n_classes() == 0)
  {
    throw std::invalid_argument("classify: model has no classes");
  }
  if (features.dim() != model.dim)
  {
    throw std::invalid_argument("classify: feature dimension " + std::to_string(features.dim()) +
                                " does not match model dimension " + std::to_string(model.dim));
  }
  if (test_sample_ids.size() != features.rows())
  {
    throw std::invalid_argument("classify: " + std::to_string(test_sample_ids.size()) +
                                " sample ids for " + std::to_string(features.rows()) + " rows");
  }
  const std::size_t width = std::min(top, model.n_classes());
  std::vector<std::uint32_t> ranked(features.rows() * width);
  rank_centroids(exec, features, model.centroids, model.n_classes(), width, ranked);

  std::vector<TopXPrediction> out(features.rows());
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i].test_sample_id = test_sample_ids[i];
    out[i].ranked_classes.assign(ranked.begin() + static_cast<std::ptrdiff_t>(i * width),
                                 ranked.begin() + static_cast<std::ptrdiff_t>((i + 1) * width));
  }
  return out;
}

RateResult success_rate(std::span<const TopXPrediction> preds,
                        std::span<const GroundTruthLabel> gts)
{
  require_aligned(preds, gts);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gts.size(); ++i)
  {
    if (gts[i].valid() && contains(preds[i].ranked_classes, *gts[i].label))
    {
      ++hits;
    }
  }
  return finish(Rational(hits), count_valid(gts));
}

RateResult normalized_success_rate(std::span<const TopXPrediction> preds,
                                   std::span<const GroundTruthLabel> gts,
                                   const CentroidModel& model)
{
  require_aligned(preds, gts);
  Rational sum(0);
  for (std::size_t i = 0; i < gts.size(); ++i)
  {
    const auto& ranked = preds[i].ranked_classes;
    if (ranked.size() > 1)
    {
      throw std::invalid_argument("normalized_success_rate: defined for top-1 predictions only");
    }
    if (!gts[i].valid() || ranked.empty() || ranked.front() != *gts[i].label)
    {
      continue;
    }
    const ClassId c = ranked.front();
    if (c >= model.n_classes() || model.counts[c] == 0)
    {
      throw std::invalid_argument("normalized_success_rate: class " + std::to_string(c) +
                                  " has no training samples");
    }
    sum += Rational(1, model.counts[c]);
  }
  return finish(std::move(sum), count_valid(gts));
}

EvaluationReport evaluate(const Trajectory& train, const FeatureMatrix& train_features,
                          const Partition& train_partition, const Trajectory& test,
                          const FeatureMatrix& test_features, const EvaluationOptions& options)
{
  if (test_features.rows() != test.size())
  {
    throw std::invalid_argument("evaluate: " + std::to_string(test_features.rows()) +
                                " test feature rows for " + std::to_string(test.size()) +
                                " test samples");
  }
  const Partition aligned = train_partition.aligned_to(train);
  const auto gts = assign_ground_truth(test, train, aligned, options.thresholds, options.exec);
  const CentroidModel model = train_centroid_model(train_features, aligned);
  const auto test_ids = test.sample_ids();
  const auto preds = classify_batch(model, test_features, test_ids, options.top, options.exec);

  std::vector<TopXPrediction> top1 = preds;
  for (auto& p : top1)
  {
    p.ranked_classes.resize(1);
  }

  EvaluationReport report;
  report.config["top"] = options.top;
  report.config["orient_thresh_deg"] = options.thresholds.orientation_deg;
  report.config["dist_thresh_m"] = options.thresholds.distance_m;
  report.n_classes = aligned.n_classes();
  report.n_valid_tests = count_valid(gts);
  report.n_invalid_tests = gts.size() - report.n_valid_tests;
  report.sr_top1 = success_rate(top1, gts).value;
  report.sr_top5 = success_rate(preds, gts).value;
  report.nsr_top1 = normalized_success_rate(top1, gts, model).value;
  report.mean_class_size =
      static_cast<double>(aligned.size()) / static_cast<double>(aligned.n_classes());
  std::map<std::size_t, std::size_t> histogram;
  for (const std::size_t size : model.counts)
  {
    ++histogram[size];
  }
  report.class_size_histogram.assign(histogram.begin(), histogram.end());
  return report;
}

}  // namespace vpc
