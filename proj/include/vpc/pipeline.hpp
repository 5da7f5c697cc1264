#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vpc/evaluation.hpp"
#include "vpc/partitioning.hpp"
#include "vpc/synthworld.hpp"

namespace vpc
{
/// Training and test sessions with their features in trajectory order.
struct Dataset
{
  Trajectory train;
  FeatureMatrix train_features;
  Trajectory test;
  FeatureMatrix test_features;
};

Dataset dataset_from_world(World world);

/// Partitions the training session with `config` and evaluates it.
EvaluationReport run_strategy(const Dataset& data, const PartitionConfig& config,
                              const EvaluationOptions& options);

struct MeanStd
{
  double mean = 0.0;
  double stddev = 0.0;
};

/// Sample mean and (n - 1) standard deviation; stddev is 0 for one value.
MeanStd mean_std(const std::vector<double>& values);

struct ComparisonRow
{
  Strategy strategy = Strategy::Time;
  MeanStd n_classes;
  MeanStd sr_top5;
  MeanStd nsr_top1;
  MeanStd sr_top1;
};

struct ComparisonSettings
{
  std::vector<Strategy> strategies;
  std::size_t n_classes = 1;
  std::optional<std::size_t> k_appearance;
  std::vector<std::uint64_t> seeds;
  bool normalize_features = false;
  EvaluationOptions evaluation;
};

struct Comparison
{
  ComparisonSettings settings;
  /// reports[s][r]: strategy s, seed r.
  std::vector<std::vector<EvaluationReport>> reports;
  std::vector<ComparisonRow> rows;
};

/// Produces the dataset for one seed.
using DatasetSource = std::function<Dataset(std::uint64_t seed)>;

/// Runs every (strategy, seed) cell. The seed drives both the dataset source
/// and k-means. Cells may run concurrently; results are ordered by input.
Comparison compare_strategies(const DatasetSource& source, const ComparisonSettings& settings);

/// Column order of the comparison table.
inline const std::vector<std::string>& comparison_columns()
{
  static const std::vector<std::string> columns{"strategy", "n_classes", "sr_top5", "nsr_top1",
                                                "sr_top1"};
  return columns;
}

std::string comparison_table(const Comparison& comparison);
nlohmann::ordered_json comparison_to_json(const Comparison& comparison);

}  // namespace vpc
