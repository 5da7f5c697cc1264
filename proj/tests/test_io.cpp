#include <doctest.h>

#include <bit>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <regex>
#include <set>

#include "helpers.hpp"
#include "vpc/io_formats.hpp"
#include "vpc/partitioning.hpp"
#include "vpc/pipeline.hpp"
#include "vpc/synthworld.hpp"

using namespace vpc;

namespace
{
void write_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream(path, std::ios::binary) << text;
}

std::string read_file(const std::filesystem::path& path)
{
  const auto bytes = read_binary_file(path);
  return {bytes.begin(), bytes.end()};
}

FormatErrorKind kind_of(const std::function<void()>& f)
{
  try
  {
    f();
  }
  catch (const FormatError& e)
  {
    return e.kind();
  }
  FAIL("no FormatError thrown");
  return FormatErrorKind::Io;
}

std::string error_text(const std::function<void()>& f)
{
  try
  {
    f();
  }
  catch (const std::exception& e)
  {
    return e.what();
  }
  return {};
}

constexpr const char* kHeader = "sample_id,timestamp_s,x_m,y_m,heading_rad\n";
}  // namespace

TEST_SUITE("io")
{
  TEST_CASE("minimal trajectory file")
  {
    const auto dir = testutil::scratch_dir("io_traj");
    write_file(dir / "t.csv", std::string(kHeader) + "0,0.0,0,0,0\n1,1.0,3,4,0\n");
    const Trajectory t = load_trajectory_csv(dir / "t.csv");
    REQUIRE(t.size() == 2);
    CHECK(cumulative_travel_distance(t).back() == 5.0);
  }

  TEST_CASE("trajectory rows are sorted and headings normalized")
  {
    const auto dir = testutil::scratch_dir("io_sort");
    write_file(dir / "t.csv", std::string(kHeader) + "7,5.0,0,0,7.0\n3,1.0,1,0,0\n4,3.0,2,0,0\n");
    const TrajectoryFile f = read_trajectory_csv(dir / "t.csv");
    CHECK(f.trajectory.sample_ids() == std::vector<SampleId>{3, 4, 7});
    CHECK(f.file_row == std::vector<std::size_t>{1, 2, 0});
    CHECK(f.trajectory[2].pose.heading() == 7.0 - kTwoPi);
    CHECK(f.trajectory[2].pose.heading() == doctest::Approx(0.7168).epsilon(1e-4));
  }

  TEST_CASE("trajectory loader errors")
  {
    const auto dir = testutil::scratch_dir("io_traj_err");
    write_file(dir / "empty.csv", "");
    CHECK(kind_of([&] { load_trajectory_csv(dir / "empty.csv"); }) == FormatErrorKind::Empty);
    write_file(dir / "header_only.csv", kHeader);
    CHECK(kind_of([&] { load_trajectory_csv(dir / "header_only.csv"); }) ==
          FormatErrorKind::Empty);
    write_file(dir / "bad.csv", std::string(kHeader) + "0,0,0,0,0\n1,abc,0,0,0\n");
    CHECK(kind_of([&] { load_trajectory_csv(dir / "bad.csv"); }) == FormatErrorKind::Malformed);
    CHECK(error_text([&] { load_trajectory_csv(dir / "bad.csv"); }).find("bad.csv:3:") !=
          std::string::npos);
    write_file(dir / "short.csv", std::string(kHeader) + "0,0,0,0\n");
    CHECK(kind_of([&] { load_trajectory_csv(dir / "short.csv"); }) == FormatErrorKind::Malformed);
    write_file(dir / "dup.csv", std::string(kHeader) + "0,0,0,0,0\n0,1,0,0,0\n");
    CHECK(kind_of([&] { load_trajectory_csv(dir / "dup.csv"); }) == FormatErrorKind::DuplicateId);
    write_file(dir / "nan.csv", std::string(kHeader) + "0,nan,0,0,0\n");
    CHECK_THROWS_AS(load_trajectory_csv(dir / "nan.csv"), FormatError);
    CHECK(kind_of([&] { load_trajectory_csv(dir / "missing.csv"); }) == FormatErrorKind::Io);
  }

  TEST_CASE("trajectory round trip is exact")
  {
    const auto dir = testutil::scratch_dir("io_traj_rt");
    WorldSpec spec;
    spec.n_samples = 300;
    spec.speed = SpeedProfile::variable(0.2, 5.0);
    const World w = generate_world(spec);
    write_trajectory_csv(w.train, dir / "t.csv");
    CHECK(load_trajectory_csv(dir / "t.csv").samples().size() == w.train.size());
    const Trajectory back = load_trajectory_csv(dir / "t.csv");
    for (std::size_t i = 0; i < back.size(); ++i)
    {
      CHECK(back[i] == w.train[i]);
    }
  }

  TEST_CASE("feature round trip is bit exact, including signed zeros and subnormals")
  {
    const auto dir = testutil::scratch_dir("io_feat");
    const FeatureMatrix small(2, 3, {1.5f, -2.25f, 0.0f, 3e-5f, 1e30f, -7.0f});
    write_features(small, dir / "f.vpcf");
    CHECK(load_features(dir / "f.vpcf") == small);

    const std::vector<float> specials{0.0f,
                                      -0.0f,
                                      std::numeric_limits<float>::denorm_min(),
                                      -std::numeric_limits<float>::denorm_min(),
                                      std::numeric_limits<float>::min() / 3.0f,
                                      std::numeric_limits<float>::max(),
                                      std::numeric_limits<float>::lowest(),
                                      1.0f / 3.0f};
    const FeatureMatrix edge(2, 4, specials);
    for (const char* name : {"e.vpcf", "e.csv"})
    {
      write_features(edge, dir / name);
      const FeatureMatrix back = load_features(dir / name);
      REQUIRE(back.values().size() == specials.size());
      for (std::size_t i = 0; i < specials.size(); ++i)
      {
        CHECK(std::bit_cast<std::uint32_t>(back.values()[i]) ==
              std::bit_cast<std::uint32_t>(specials[i]));
      }
    }

    std::mt19937 rng(5);
    std::vector<float> random_bits;
    while (random_bits.size() < 4096)
    {
      const float f = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
      if (std::isfinite(f))
      {
        random_bits.push_back(f);
      }
    }
    const FeatureMatrix big(64, 64, random_bits);
    CHECK(decode_features(encode_features(big)) == big);
  }

  TEST_CASE("feature header layout is little-endian")
  {
    const auto bytes = encode_features(FeatureMatrix(2, 3, std::vector<float>(6, 1.0f)));
    REQUIRE(bytes.size() == 16 + 6 * 4);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "VPCF");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 2);
    CHECK(bytes[12] == 3);
    CHECK(static_cast<unsigned char>(bytes[16 + 3]) == 0x3f);
  }

  TEST_CASE("feature loader errors have distinct kinds")
  {
    const auto good = encode_features(FeatureMatrix(10, 2, std::vector<float>(20, 1.0f)));

    auto truncated = good;
    truncated.resize(truncated.size() - 8);
    CHECK(kind_of([&] { decode_features(truncated); }) == FormatErrorKind::TruncatedPayload);

    const std::vector<char> magic_only{'V', 'P', 'C', 'F'};
    CHECK(kind_of([&] { decode_features(magic_only); }) == FormatErrorKind::TruncatedHeader);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    CHECK(kind_of([&] { decode_features(bad_magic); }) == FormatErrorKind::BadMagic);

    auto bad_version = good;
    bad_version[4] = 2;
    CHECK(kind_of([&] { decode_features(bad_version); }) == FormatErrorKind::UnsupportedVersion);

    auto trailing = good;
    trailing.push_back(0);
    CHECK(kind_of([&] { decode_features(trailing); }) == FormatErrorKind::TrailingBytes);

    auto nan = good;
    const auto nan_bits = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
    for (int b = 0; b < 4; ++b)
    {
      nan[16 + b] = static_cast<char>((nan_bits >> (8 * b)) & 0xffu);
    }
    CHECK(kind_of([&] { decode_features(nan); }) == FormatErrorKind::NonFinite);

    const auto dir = testutil::scratch_dir("io_feat_err");
    write_file(dir / "bad.csv", "1,2\n3\n");
    CHECK(kind_of([&] { load_features(dir / "bad.csv"); }) == FormatErrorKind::Malformed);
    write_file(dir / "inf.csv", "1,inf\n");
    CHECK(kind_of([&] { load_features(dir / "inf.csv"); }) == FormatErrorKind::NonFinite);
  }

  TEST_CASE("partition CSV round trips and validates density")
  {
    const auto dir = testutil::scratch_dir("io_part");
    const Partition two({0, 1}, {0, 1});
    write_partition_csv(two, dir / "p.csv");
    CHECK(load_partition_csv(dir / "p.csv") == two);
    CHECK(read_file(dir / "p.csv") == "sample_id,class_id\n0,0\n1,1\n");

    write_file(dir / "gap.csv", "sample_id,class_id\n0,0\n1,2\n");
    CHECK(kind_of([&] { load_partition_csv(dir / "gap.csv"); }) ==
          FormatErrorKind::NonDenseClasses);
    write_file(dir / "dup.csv", "sample_id,class_id\n0,0\n0,0\n");
    CHECK(kind_of([&] { load_partition_csv(dir / "dup.csv"); }) == FormatErrorKind::DuplicateId);

    std::mt19937_64 rng(1000);
    std::vector<SampleId> ids(1000);
    std::vector<std::uint64_t> raw(1000);
    for (std::size_t i = 0; i < 1000; ++i)
    {
      ids[i] = i * 7 + rng() % 7;
      raw[i] = rng() % 60;
    }
    const Partition big = Partition::from_raw_labels(ids, raw);
    write_partition_csv(big, dir / "big.csv");
    CHECK(load_partition_csv(dir / "big.csv") == big);
  }

  TEST_CASE("SVG rendering")
  {
    const auto traj = testutil::line({0, 1});
    const std::string two = partition_svg(traj, Partition({0, 1}, {0, 1}));
    const std::regex circle("<circle [^>]*fill=\"(#[0-9a-f]{6})\"");
    std::set<std::string> fills;
    std::size_t circles = 0;
    for (auto it = std::sregex_iterator(two.begin(), two.end(), circle);
         it != std::sregex_iterator(); ++it)
    {
      ++circles;
      fills.insert((*it)[1]);
    }
    CHECK(circles == 2);
    CHECK(fills.size() == 2);

    const auto five = testutil::line({0, 1, 2, 3, 4});
    const std::string one = partition_svg(five, Partition({0, 1, 2, 3, 4}, {0, 0, 0, 0, 0}));
    fills.clear();
    for (auto it = std::sregex_iterator(one.begin(), one.end(), circle);
         it != std::sregex_iterator(); ++it)
    {
      fills.insert((*it)[1]);
    }
    CHECK(fills.size() == 1);

    const auto dir = testutil::scratch_dir("io_svg");
    render_partition_svg(five, partition_by_location(five, 3), dir / "a.svg");
    render_partition_svg(five, partition_by_location(five, 3), dir / "b.svg");
    CHECK(read_file(dir / "a.svg") == read_file(dir / "b.svg"));

    CHECK(class_color(0) == class_color(0, 0));
    CHECK(class_color(0, 1) == class_color(1, 0));
    std::set<std::string> palette;
    for (ClassId c = 0; c < 32; ++c)
    {
      palette.insert(class_color(c));
    }
    CHECK(palette.size() == 32);
  }

  TEST_CASE("report JSON")
  {
    EvaluationReport r;
    r.strategy = "time";
    r.n_classes = 3;
    r.n_valid_tests = 4;
    r.sr_top1 = 1.0 / 3.0;
    r.sr_top5 = 0.5;
    r.nsr_top1 = 0.0123456789;
    r.mean_class_size = 2.5;
    r.class_size_histogram = {{2, 1}, {3, 1}};
    const auto dir = testutil::scratch_dir("io_report");
    write_report_json(r, dir / "r.json");
    const std::string text = read_file(dir / "r.json");
    CHECK(text.find("\"sr_top5\": 0.5") != std::string::npos);
    CHECK(text.find("\"sr_top1\": 0.333333") != std::string::npos);
    CHECK(text.find("\"nsr_top1\": 0.0123457") != std::string::npos);
    CHECK(text.find("\"strategy\"") < text.find("\"config\""));
    CHECK(text.find("\"nsr_top1\"") < text.find("\"class_size_histogram\""));

    const EvaluationReport back = load_report_json(dir / "r.json");
    CHECK(back.strategy == r.strategy);
    CHECK(back.n_classes == r.n_classes);
    CHECK(back.n_valid_tests == r.n_valid_tests);
    CHECK(back.sr_top1 == round_significant(r.sr_top1));
    CHECK(back.sr_top5 == r.sr_top5);
    CHECK(back.nsr_top1 == round_significant(r.nsr_top1));
    CHECK(back.class_size_histogram == r.class_size_histogram);

    write_file(dir / "bad.json", "{\"strategy\": 3}");
    CHECK(kind_of([&] { load_report_json(dir / "bad.json"); }) == FormatErrorKind::Malformed);
  }

  TEST_CASE("report for synthworld seed 7 matches the golden file")
  {
    WorldSpec spec;
    spec.seed = 7;
    spec.speed = SpeedProfile::variable(0.2, 5.0);
    const Dataset data = dataset_from_world(generate_world(spec));
    PartitionConfig cfg;
    cfg.strategy = Strategy::LocationAppearance;
    cfg.n_classes_target = 8;
    cfg.seed = 7;
    const EvaluationReport report = run_strategy(data, cfg, EvaluationOptions{});
    const std::string text = report_to_json(report).dump(2) + "\n";
    const std::filesystem::path golden = std::filesystem::path(VPC_GOLDEN_DIR) / "report_seed7.json";
    if (std::getenv("VPC_UPDATE_GOLDEN") != nullptr)
    {
      write_text_file(golden, text);
    }
    CHECK(text == read_file(golden));
  }
}
