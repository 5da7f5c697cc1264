#include "vpc/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "vpc/io_formats.hpp"

namespace vpc
{
Dataset dataset_from_world(World world)
{
  return Dataset{std::move(world.train), std::move(world.train_features), std::move(world.test),
                 std::move(world.test_features)};
}

EvaluationReport run_strategy(const Dataset& data, const PartitionConfig& config,
                              const EvaluationOptions& options)
{
  const Partition partition = partition_workspace(data.train, &data.train_features, config);
  EvaluationReport report = evaluate(data.train, data.train_features, partition, data.test,
                                     data.test_features, options);
  report.strategy = std::string(to_string(config.strategy));
  report.config["classes"] = config.n_classes_target;
  if (is_hybrid(config.strategy))
  {
    report.config["k_appearance"] = config.k_appearance.value_or(config.n_classes_target);
  }
  report.config["seed"] = config.seed;
  return report;
}

MeanStd mean_std(const std::vector<double>& values)
{
  MeanStd out;
  if (values.empty())
  {
    return out;
  }
  for (const double v : values)
  {
    out.mean += v;
  }
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1)
  {
    double ss = 0.0;
    for (const double v : values)
    {
      ss += (v - out.mean) * (v - out.mean);
    }
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

Comparison compare_strategies(const DatasetSource& source, const ComparisonSettings& settings)
{
  if (settings.strategies.empty())
  {
    throw std::invalid_argument("compare: no strategies given");
  }
  if (settings.seeds.empty())
  {
    throw std::invalid_argument("compare: no seeds given");
  }
  const std::size_t n_strategies = settings.strategies.size();
  const std::size_t n_seeds = settings.seeds.size();

  std::vector<Dataset> datasets;
  datasets.reserve(n_seeds);
  for (const std::uint64_t seed : settings.seeds)
  {
    datasets.push_back(source(seed));
  }

  Comparison out;
  out.settings = settings;
  out.reports.assign(n_strategies, std::vector<EvaluationReport>(n_seeds));
  const auto cells = static_cast<std::int64_t>(n_strategies * n_seeds);
  std::vector<std::string> errors(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t cell = 0; cell < cells; ++cell)
  {
    const auto s = static_cast<std::size_t>(cell) / n_seeds;
    const auto r = static_cast<std::size_t>(cell) % n_seeds;
    try
    {
      PartitionConfig config;
      config.strategy = settings.strategies[s];
      config.n_classes_target = settings.n_classes;
      config.k_appearance = settings.k_appearance;
      config.seed = settings.seeds[r];
      config.normalize_features = settings.normalize_features;
      out.reports[s][r] = run_strategy(datasets[r], config, settings.evaluation);
    }
    catch (const std::exception& e)
    {
      errors[static_cast<std::size_t>(cell)] = e.what();
    }
  }
  for (const auto& e : errors)
  {
    if (!e.empty())
    {
      throw std::runtime_error("compare: " + e);
    }
  }

  for (std::size_t s = 0; s < n_strategies; ++s)
  {
    std::vector<double> classes, sr5, nsr1, sr1;
    for (const auto& report : out.reports[s])
    {
      classes.push_back(static_cast<double>(report.n_classes));
      sr5.push_back(report.sr_top5);
      nsr1.push_back(report.nsr_top1);
      sr1.push_back(report.sr_top1);
    }
    out.rows.push_back({settings.strategies[s], mean_std(classes), mean_std(sr5), mean_std(nsr1),
                        mean_std(sr1)});
  }
  return out;
}

std::string comparison_table(const Comparison& comparison)
{
  const auto& cols = comparison_columns();
  std::string text = fmt::format("{:<20} {:>18} {:>18} {:>18} {:>18}\n", cols[0], cols[1],
                                 cols[2], cols[3], cols[4]);
  const auto cell = [](const MeanStd& m, int precision) {
    return fmt::format("{:.{}f} +/- {:.{}f}", m.mean, precision, m.stddev, precision);
  };
  for (const auto& row : comparison.rows)
  {
    text += fmt::format("{:<20} {:>18} {:>18} {:>18} {:>18}\n", to_string(row.strategy),
                        cell(row.n_classes, 1), cell(row.sr_top5, 4), cell(row.nsr_top1, 4),
                        cell(row.sr_top1, 4));
  }
  return text;
}

nlohmann::ordered_json comparison_to_json(const Comparison& comparison)
{
  const auto stat = [](const MeanStd& m) {
    return nlohmann::ordered_json{{"mean", round_significant(m.mean)},
                                  {"std", round_significant(m.stddev)}};
  };
  const auto& settings = comparison.settings;
  nlohmann::ordered_json j;
  j["columns"] = comparison_columns();
  j["classes"] = settings.n_classes;
  if (settings.k_appearance)
  {
    j["k_appearance"] = *settings.k_appearance;
  }
  j["seeds"] = settings.seeds;
  j["top"] = settings.evaluation.top;
  j["orient_thresh_deg"] = settings.evaluation.thresholds.orientation_deg;
  j["dist_thresh_m"] = settings.evaluation.thresholds.distance_m;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : comparison.rows)
  {
    rows.push_back({{"strategy", to_string(row.strategy)},
                    {"n_classes", stat(row.n_classes)},
                    {"sr_top5", stat(row.sr_top5)},
                    {"nsr_top1", stat(row.nsr_top1)},
                    {"sr_top1", stat(row.sr_top1)}});
  }
  j["rows"] = std::move(rows);
  auto per_seed = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < comparison.reports.size(); ++s)
  {
    for (std::size_t r = 0; r < comparison.reports[s].size(); ++r)
    {
      const auto& report = comparison.reports[s][r];
      per_seed.push_back({{"strategy", report.strategy},
                          {"seed", settings.seeds[r]},
                          {"n_classes", report.n_classes},
                          {"sr_top5", round_significant(report.sr_top5)},
                          {"nsr_top1", round_significant(report.nsr_top1)},
                          {"sr_top1", round_significant(report.sr_top1)}});
    }
  }
  j["per_seed"] = std::move(per_seed);
  return j;
}

}  // namespace vpc
