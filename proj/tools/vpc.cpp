// vpc: workspace partitioning and place-classification evaluation.
//
// Exit codes: 0 success, 1 runtime or data failure, 2 usage error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "vpc/digest.hpp"
#include "vpc/evaluation.hpp"
#include "vpc/io_formats.hpp"
#include "vpc/partitioning.hpp"
#include "vpc/pipeline.hpp"
#include "vpc/synthworld.hpp"

namespace fs = std::filesystem;

namespace
{
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

void write_manifest(const fs::path& path, const std::string& subcommand, Json flags,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs)
{
  const auto digests = [](const std::vector<fs::path>& files) {
    Json list = Json::array();
    for (const auto& f : files)
    {
      list.push_back({{"path", f.string()}, {"sha256", vpc::sha256_file(f)}});
    }
    return list;
  };
  Json manifest;
  manifest["tool"] = "vpc";
  manifest["version"] = VPC_VERSION;
  manifest["subcommand"] = subcommand;
  manifest["flags"] = std::move(flags);
  manifest["inputs"] = digests(inputs);
  manifest["outputs"] = digests(outputs);
  vpc::write_text_file(path, manifest.dump(2) + "\n");
}

fs::path manifest_path_for(const fs::path& output)
{
  return fs::path(output.string() + ".manifest.json");
}

/// Trajectory plus feature rows re-ordered from file order to sample order.
struct Session
{
  vpc::Trajectory trajectory;
  std::optional<vpc::FeatureMatrix> features;
};

Session load_session(const fs::path& trajectory_path, const std::optional<fs::path>& features_path)
{
  auto file = vpc::read_trajectory_csv(trajectory_path);
  Session session{std::move(file.trajectory), std::nullopt};
  if (features_path)
  {
    const auto features = vpc::load_features(*features_path);
    if (features.rows() != session.trajectory.size())
    {
      throw std::runtime_error(fmt::format("{}: {} feature rows but {} has {} samples",
                                           features_path->string(), features.rows(),
                                           trajectory_path.string(),
                                           session.trajectory.size()));
    }
    session.features = features.select_rows(file.file_row);
  }
  return session;
}

std::uint64_t palette_seed_from_env()
{
  const char* value = std::getenv("VPC_PALETTE_SEED");
  if (value == nullptr || *value == '\0')
  {
    return 0;
  }
  try
  {
    std::size_t used = 0;
    const auto seed = std::stoull(value, &used);
    if (used != std::string(value).size())
    {
      throw std::invalid_argument(value);
    }
    return seed;
  }
  catch (const std::exception&)
  {
    throw UsageError(fmt::format("VPC_PALETTE_SEED must be a non-negative integer, got \"{}\"",
                                 value));
  }
}

vpc::Strategy strategy_from_flag(const std::string& name, const std::string& flag)
{
  const auto strategy = vpc::parse_strategy(name);
  if (!strategy)
  {
    throw UsageError(fmt::format("{}: unknown strategy \"{}\" (expected time, location, "
                                 "time-appearance or location-appearance)",
                                 flag, name));
  }
  return *strategy;
}

// ---------------------------------------------------------------------------
// partition

struct PartitionArgs
{
  std::string trajectory;
  std::string strategy;
  std::size_t classes = 0;
  std::string features;
  std::size_t k_appearance = 0;
  std::uint64_t seed = 0;
  std::string svg;
  bool normalize = false;
  std::string out;
};

void add_partition(CLI::App& app, PartitionArgs& args)
{
  auto* cmd = app.add_subcommand("partition", "Partition a training trajectory into place classes");
  cmd->add_option("--trajectory", args.trajectory, "Trajectory CSV")->required();
  cmd->add_option("--strategy", args.strategy,
                  "time | location | time-appearance | location-appearance")
      ->required();
  cmd->add_option("--classes", args.classes, "Target number of classes K")->required();
  cmd->add_option("--features", args.features, "Feature file (VPCF, or .csv)");
  cmd->add_option("--k-appearance", args.k_appearance,
                  "Appearance clusters for hybrid strategies (default: K)");
  cmd->add_option("--seed", args.seed, "k-means seed");
  cmd->add_option("--svg", args.svg, "Also render the partition as SVG");
  cmd->add_flag("--normalize-features", args.normalize, "L2-normalize features before k-means");
  cmd->add_option("--out", args.out, "Output partition CSV")->required();
}

int run_partition(const PartitionArgs& args)
{
  const vpc::Strategy strategy = strategy_from_flag(args.strategy, "--strategy");
  if (args.classes == 0)
  {
    throw UsageError("--classes must be >= 1");
  }
  if (vpc::is_hybrid(strategy) && args.features.empty())
  {
    throw UsageError(fmt::format("--features is required for strategy {}", args.strategy));
  }
  const std::uint64_t palette_seed = args.svg.empty() ? 0 : palette_seed_from_env();

  std::vector<fs::path> inputs{args.trajectory};
  std::optional<fs::path> features_path;
  if (!args.features.empty())
  {
    features_path = args.features;
    inputs.push_back(*features_path);
  }
  const Session session = load_session(args.trajectory, features_path);

  vpc::PartitionConfig config;
  config.strategy = strategy;
  config.n_classes_target = args.classes;
  if (args.k_appearance > 0)
  {
    config.k_appearance = args.k_appearance;
  }
  config.seed = args.seed;
  config.normalize_features = args.normalize;

  const vpc::Partition partition = vpc::partition_workspace(
      session.trajectory, session.features ? &*session.features : nullptr, config);
  vpc::write_partition_csv(partition, args.out);
  std::vector<fs::path> outputs{args.out};
  if (!args.svg.empty())
  {
    vpc::SvgOptions svg;
    svg.palette_seed = palette_seed;
    vpc::render_partition_svg(session.trajectory, partition, args.svg, svg);
    outputs.emplace_back(args.svg);
  }

  Json flags;
  flags["trajectory"] = args.trajectory;
  flags["strategy"] = args.strategy;
  flags["classes"] = args.classes;
  flags["features"] = args.features;
  flags["k_appearance"] = config.k_appearance.value_or(args.classes);
  flags["seed"] = args.seed;
  flags["normalize_features"] = args.normalize;
  flags["svg"] = args.svg;
  flags["palette_seed"] = palette_seed;
  flags["out"] = args.out;
  write_manifest(manifest_path_for(args.out), "partition", flags, inputs, outputs);

  std::cout << fmt::format("{}: {} samples -> {} classes ({})\n", args.out, partition.size(),
                           partition.n_classes(), args.strategy);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs
{
  std::string train_trajectory;
  std::string train_features;
  std::string train_partition;
  std::string test_trajectory;
  std::string test_features;
  double orient_thresh = 20.0;
  double dist_thresh = 18.0;
  std::size_t top = 5;
  std::string strategy_name = "unspecified";
  std::string out;
};

void add_evaluate(CLI::App& app, EvaluateArgs& args)
{
  auto* cmd = app.add_subcommand("evaluate", "Score a training partition on a test session");
  cmd->add_option("--train-trajectory", args.train_trajectory)->required();
  cmd->add_option("--train-features", args.train_features)->required();
  cmd->add_option("--train-partition", args.train_partition)->required();
  cmd->add_option("--test-trajectory", args.test_trajectory)->required();
  cmd->add_option("--test-features", args.test_features)->required();
  cmd->add_option("--orient-thresh", args.orient_thresh, "Ground-truth heading threshold, degrees")
      ->capture_default_str();
  cmd->add_option("--dist-thresh", args.dist_thresh, "Ground-truth distance threshold, meters")
      ->capture_default_str();
  cmd->add_option("--top", args.top, "X for the top-X success rate")->capture_default_str();
  cmd->add_option("--strategy-name", args.strategy_name, "Label stored in the report");
  cmd->add_option("--out", args.out, "Output report JSON")->required();
}

int run_evaluate(const EvaluateArgs& args)
{
  if (args.top == 0)
  {
    throw UsageError("--top must be >= 1");
  }
  if (!(args.orient_thresh >= 0.0) || !(args.dist_thresh >= 0.0))
  {
    throw UsageError("--orient-thresh and --dist-thresh must be non-negative");
  }
  const Session train = load_session(args.train_trajectory, fs::path(args.train_features));
  const Session test = load_session(args.test_trajectory, fs::path(args.test_features));
  const vpc::Partition partition = vpc::load_partition_csv(args.train_partition);

  vpc::EvaluationOptions options;
  options.thresholds.orientation_deg = args.orient_thresh;
  options.thresholds.distance_m = args.dist_thresh;
  options.top = args.top;
  vpc::EvaluationReport report = vpc::evaluate(train.trajectory, *train.features, partition,
                                               test.trajectory, *test.features, options);
  report.strategy = args.strategy_name;
  vpc::write_report_json(report, args.out);

  Json flags;
  flags["train_trajectory"] = args.train_trajectory;
  flags["train_features"] = args.train_features;
  flags["train_partition"] = args.train_partition;
  flags["test_trajectory"] = args.test_trajectory;
  flags["test_features"] = args.test_features;
  flags["orient_thresh"] = args.orient_thresh;
  flags["dist_thresh"] = args.dist_thresh;
  flags["top"] = args.top;
  flags["strategy_name"] = args.strategy_name;
  flags["out"] = args.out;
  write_manifest(manifest_path_for(args.out), "evaluate", flags,
                 {args.train_trajectory, args.train_features, args.train_partition,
                  args.test_trajectory, args.test_features},
                 {args.out});

  if (report.n_valid_tests == 0)
  {
    std::cerr << "warning: no valid test samples; success rates reported as 0\n";
  }
  std::cout << fmt::format("{}: classes={} valid={} invalid={} sr_top1={:.4f} sr_top{}={:.4f} "
                           "nsr_top1={:.6f}\n",
                           args.out, report.n_classes, report.n_valid_tests,
                           report.n_invalid_tests, report.sr_top1, args.top, report.sr_top5,
                           report.nsr_top1);
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct WorldArgs
{
  std::size_t n_places = 8;
  std::size_t n_samples = 400;
  std::size_t dim = 16;
  std::string speed = "constant";
  double min_speed = 0.2;
  double max_speed = 5.0;
  double noise = 0.5;
  bool revisit = false;
  double radius = 100.0;
};

void add_world_flags(CLI::App* cmd, WorldArgs& args)
{
  cmd->add_option("--n-places", args.n_places)->capture_default_str();
  cmd->add_option("--n-samples", args.n_samples)->capture_default_str();
  cmd->add_option("--dim", args.dim, "Feature dimension")->capture_default_str();
  cmd->add_option("--speed", args.speed, "constant | variable")->capture_default_str();
  cmd->add_option("--min-speed", args.min_speed)->capture_default_str();
  cmd->add_option("--max-speed", args.max_speed)->capture_default_str();
  cmd->add_option("--noise", args.noise, "Feature noise sigma")->capture_default_str();
  cmd->add_flag("--revisit", args.revisit, "Drive the loop twice");
  cmd->add_option("--radius", args.radius, "Loop radius, meters")->capture_default_str();
}

vpc::WorldSpec world_spec(const WorldArgs& args, std::uint64_t seed)
{
  vpc::WorldSpec spec;
  spec.n_places = args.n_places;
  spec.n_samples = args.n_samples;
  spec.feature_dim = args.dim;
  if (args.speed == "constant")
  {
    spec.speed = vpc::SpeedProfile::constant();
  }
  else if (args.speed == "variable")
  {
    spec.speed = vpc::SpeedProfile::variable(args.min_speed, args.max_speed);
  }
  else
  {
    throw UsageError(fmt::format("--speed: expected constant or variable, got \"{}\"", args.speed));
  }
  spec.feature_noise_sigma = args.noise;
  spec.revisit = args.revisit;
  spec.loop_radius_m = args.radius;
  spec.seed = seed;
  try
  {
    spec.validate();
  }
  catch (const std::invalid_argument& e)
  {
    throw UsageError(e.what());
  }
  return spec;
}

Json world_flags(const WorldArgs& args)
{
  return Json{{"n_places", args.n_places}, {"n_samples", args.n_samples},
              {"dim", args.dim},           {"speed", args.speed},
              {"min_speed", args.min_speed}, {"max_speed", args.max_speed},
              {"noise", args.noise},       {"revisit", args.revisit},
              {"radius", args.radius}};
}

struct SynthArgs
{
  WorldArgs world;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void add_synth(CLI::App& app, SynthArgs& args)
{
  auto* cmd = app.add_subcommand("synth", "Generate a synthetic train/test session pair");
  add_world_flags(cmd, args.world);
  cmd->add_option("--seed", args.seed)->capture_default_str();
  cmd->add_option("--out-dir", args.out_dir)->required();
}

void write_places(const vpc::Trajectory& traj, const std::vector<std::uint32_t>& places,
                  const fs::path& path)
{
  std::string text = "sample_id,place_id\n";
  for (std::size_t i = 0; i < traj.size(); ++i)
  {
    text += fmt::format("{},{}\n", traj[i].sample_id, places[i]);
  }
  vpc::write_text_file(path, text);
}

int run_synth(const SynthArgs& args)
{
  const vpc::WorldSpec spec = world_spec(args.world, args.seed);
  const vpc::World world = vpc::generate_world(spec);
  const fs::path dir(args.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
  {
    throw vpc::FormatError(vpc::FormatErrorKind::Io,
                           fmt::format("{}: cannot create directory: {}", dir.string(),
                                       ec.message()));
  }
  const std::vector<fs::path> outputs{
      dir / "train_trajectory.csv", dir / "train_features.vpcf", dir / "test_trajectory.csv",
      dir / "test_features.vpcf",   dir / "train_places.csv",    dir / "test_places.csv",
      dir / "train_true_partition.csv"};
  vpc::write_trajectory_csv(world.train, outputs[0]);
  vpc::write_features(world.train_features, outputs[1]);
  vpc::write_trajectory_csv(world.test, outputs[2]);
  vpc::write_features(world.test_features, outputs[3]);
  write_places(world.train, world.train_place, outputs[4]);
  write_places(world.test, world.test_place, outputs[5]);
  vpc::write_partition_csv(vpc::true_place_partition(world), outputs[6]);

  Json flags = world_flags(args.world);
  flags["seed"] = args.seed;
  flags["out_dir"] = args.out_dir;
  write_manifest(dir / "manifest.json", "synth", flags, {}, outputs);
  std::cout << fmt::format("{}: {} train / {} test samples, {} places\n", dir.string(),
                           world.train.size(), world.test.size(), spec.n_places);
  return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs
{
  WorldArgs world;
  std::vector<std::string> strategies{"time", "location", "time-appearance",
                                      "location-appearance"};
  std::size_t classes = 0;
  std::size_t k_appearance = 0;
  std::vector<std::uint64_t> seeds{0};
  std::size_t top = 5;
  double orient_thresh = 20.0;
  double dist_thresh = 18.0;
  bool normalize = false;
  std::string train_trajectory;
  std::string train_features;
  std::string test_trajectory;
  std::string test_features;
  std::string out;
};

void add_compare(CLI::App& app, CompareArgs& args)
{
  auto* cmd = app.add_subcommand(
      "compare", "Run several strategies end to end over several seeds and tabulate them");
  cmd->add_option("--strategies", args.strategies, "Comma-separated strategy list")
      ->delimiter(',');
  cmd->add_option("--classes", args.classes, "Target number of classes K")->required();
  cmd->add_option("--k-appearance", args.k_appearance, "Appearance clusters (default: K)");
  cmd->add_option("--seeds", args.seeds, "Comma-separated seeds")->delimiter(',');
  cmd->add_option("--top", args.top)->capture_default_str();
  cmd->add_option("--orient-thresh", args.orient_thresh)->capture_default_str();
  cmd->add_option("--dist-thresh", args.dist_thresh)->capture_default_str();
  cmd->add_flag("--normalize-features", args.normalize);
  add_world_flags(cmd, args.world);
  cmd->add_option("--train-trajectory", args.train_trajectory, "Use files instead of synthworld");
  cmd->add_option("--train-features", args.train_features);
  cmd->add_option("--test-trajectory", args.test_trajectory);
  cmd->add_option("--test-features", args.test_features);
  cmd->add_option("--out", args.out, "Output JSON")->required();
}

int run_compare(const CompareArgs& args)
{
  if (args.classes == 0)
  {
    throw UsageError("--classes must be >= 1");
  }
  if (args.top == 0)
  {
    throw UsageError("--top must be >= 1");
  }
  vpc::ComparisonSettings settings;
  for (const auto& name : args.strategies)
  {
    settings.strategies.push_back(strategy_from_flag(name, "--strategies"));
  }
  settings.n_classes = args.classes;
  if (args.k_appearance > 0)
  {
    settings.k_appearance = args.k_appearance;
  }
  settings.seeds = args.seeds;
  settings.normalize_features = args.normalize;
  settings.evaluation.top = args.top;
  settings.evaluation.thresholds.orientation_deg = args.orient_thresh;
  settings.evaluation.thresholds.distance_m = args.dist_thresh;

  const std::vector<std::string> file_flags{args.train_trajectory, args.train_features,
                                            args.test_trajectory, args.test_features};
  const auto given = std::count_if(file_flags.begin(), file_flags.end(),
                                   [](const std::string& s) { return !s.empty(); });
  if (given != 0 && given != 4)
  {
    throw UsageError("file mode needs all of --train-trajectory, --train-features, "
                     "--test-trajectory and --test-features");
  }

  Json flags;
  std::vector<fs::path> inputs;
  vpc::Comparison comparison;
  if (given == 4)
  {
    const Session train = load_session(args.train_trajectory, fs::path(args.train_features));
    const Session test = load_session(args.test_trajectory, fs::path(args.test_features));
    const vpc::Dataset data{train.trajectory, *train.features, test.trajectory, *test.features};
    comparison = vpc::compare_strategies([&data](std::uint64_t) { return data; }, settings);
    inputs.assign(file_flags.begin(), file_flags.end());
    flags["train_trajectory"] = args.train_trajectory;
    flags["train_features"] = args.train_features;
    flags["test_trajectory"] = args.test_trajectory;
    flags["test_features"] = args.test_features;
  }
  else
  {
    world_spec(args.world, 0);  // validate once up front
    comparison = vpc::compare_strategies(
        [&args](std::uint64_t seed) {
          return vpc::dataset_from_world(vpc::generate_world(world_spec(args.world, seed)));
        },
        settings);
    flags["world"] = world_flags(args.world);
  }
  vpc::write_text_file(args.out, vpc::comparison_to_json(comparison).dump(2) + "\n");

  flags["strategies"] = args.strategies;
  flags["classes"] = args.classes;
  flags["k_appearance"] = settings.k_appearance.value_or(args.classes);
  flags["seeds"] = args.seeds;
  flags["top"] = args.top;
  flags["orient_thresh"] = args.orient_thresh;
  flags["dist_thresh"] = args.dist_thresh;
  flags["normalize_features"] = args.normalize;
  flags["out"] = args.out;
  write_manifest(manifest_path_for(args.out), "compare", flags, inputs, {args.out});

  std::cout << vpc::comparison_table(comparison);
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Workspace partitioning for visual place classification"};
  app.set_version_flag("--version", VPC_VERSION);
  app.require_subcommand(1);

  PartitionArgs partition_args;
  EvaluateArgs evaluate_args;
  SynthArgs synth_args;
  CompareArgs compare_args;
  add_partition(app, partition_args);
  add_evaluate(app, evaluate_args);
  add_synth(app, synth_args);
  add_compare(app, compare_args);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try
  {
    if (app.got_subcommand("partition"))
    {
      return run_partition(partition_args);
    }
    if (app.got_subcommand("evaluate"))
    {
      return run_evaluate(evaluate_args);
    }
    if (app.got_subcommand("synth"))
    {
      return run_synth(synth_args);
    }
    return run_compare(compare_args);
  }
  catch (const UsageError& e)
  {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
