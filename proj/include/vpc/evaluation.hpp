#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "vpc/core.hpp"
#include "vpc/kernels.hpp"

namespace vpc
{
using Rational = boost::multiprecision::cpp_rational;

struct GroundTruthLabel
{
  SampleId test_sample_id = 0;
  /// Empty when the test sample is invalid (no usable training match).
  std::optional<ClassId> label;
  std::optional<SampleId> matched_train_id;
  std::optional<double> match_distance;

  bool valid() const { return label.has_value(); }
};

struct GroundTruthThresholds
{
  double orientation_deg = 20.0;
  double distance_m = 18.0;
};

/// Labels each test sample with the class of the nearest training sample
/// among those whose heading is within the orientation threshold. A test
/// sample without such a candidate, or whose nearest candidate lies beyond the
/// distance threshold, is invalid. Both thresholds are inclusive.
std::vector<GroundTruthLabel> assign_ground_truth(const Trajectory& test, const Trajectory& train,
                                                  const Partition& train_partition,
                                                  const GroundTruthThresholds& thresholds = {},
                                                  Exec exec = Exec::Parallel);

/// Nearest-centroid stand-in for a trained place classifier.
struct CentroidModel
{
  std::size_t dim = 0;
  /// Row-major n_classes x dim.
  std::vector<double> centroids;
  /// Training samples per class, |C(c)|.
  std::vector<std::size_t> counts;

  std::size_t n_classes() const { return counts.size(); }
  std::span<const double> centroid(std::size_t c) const
  {
    return std::span<const double>(centroids).subspan(c * dim, dim);
  }
};

/// Row i of `train_features` belongs to entry i of `train_partition`.
CentroidModel train_centroid_model(const FeatureMatrix& train_features,
                                   const Partition& train_partition);

struct TopXPrediction
{
  SampleId test_sample_id = 0;
  /// min(X, n_classes) distinct classes, best first.
  std::vector<ClassId> ranked_classes;
};

/// Classes ranked by ascending distance to their centroid, ties to the lower
/// class id.
TopXPrediction classify_top_x(const CentroidModel& model, std::span<const float> feature,
                              std::size_t top, SampleId test_sample_id = 0);

/// classify_top_x for every row; row i carries test_sample_ids[i].
std::vector<TopXPrediction> classify_batch(const CentroidModel& model,
                                           const FeatureMatrix& features,
                                           std::span<const SampleId> test_sample_ids,
                                           std::size_t top, Exec exec = Exec::Parallel);

struct RateResult
{
  Rational exact;
  double value = 0.0;
  std::size_t n_valid = 0;
  /// Set when there was no valid test sample; value is then 0.
  bool no_valid_tests = false;
};

/// Fraction of valid test samples whose ground-truth class appears in the
/// ranked prediction. `preds` and `gts` must be aligned by test_sample_id.
RateResult success_rate(std::span<const TopXPrediction> preds,
                        std::span<const GroundTruthLabel> gts);

/// Success rate with each hit weighted by 1 / |C| of the predicted class.
/// Defined for top-1 predictions only.
RateResult normalized_success_rate(std::span<const TopXPrediction> preds,
                                   std::span<const GroundTruthLabel> gts,
                                   const CentroidModel& model);

struct EvaluationReport
{
  std::string strategy;
  /// Echo of the settings that produced the report.
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::size_t n_classes = 0;
  std::size_t n_valid_tests = 0;
  std::size_t n_invalid_tests = 0;
  double sr_top1 = 0.0;
  /// Success rate at the configured top-X (5 unless overridden).
  double sr_top5 = 0.0;
  double nsr_top1 = 0.0;
  double mean_class_size = 0.0;
  /// (class size, number of classes of that size), ascending by size.
  std::vector<std::pair<std::size_t, std::size_t>> class_size_histogram;
};

struct EvaluationOptions
{
  GroundTruthThresholds thresholds;
  std::size_t top = 5;
  Exec exec = Exec::Parallel;
};

/// Ground truth, centroid model, top-X classification and metrics in one go.
/// Feature rows follow the sample order of their trajectories; the partition
/// may be in any order but must cover exactly the training samples.
EvaluationReport evaluate(const Trajectory& train, const FeatureMatrix& train_features,
                          const Partition& train_partition, const Trajectory& test,
                          const FeatureMatrix& test_features,
                          const EvaluationOptions& options = {});

}  // namespace vpc
