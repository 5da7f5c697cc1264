#include "vpc/io_formats.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string_view>

#include <fmt/core.h>

namespace vpc
{
namespace
{
constexpr std::string_view kTrajectoryHeader = "sample_id,timestamp_s,x_m,y_m,heading_rad";
constexpr std::string_view kPartitionHeader = "sample_id,class_id";

[[noreturn]] void fail(FormatErrorKind kind, const std::filesystem::path& path,
                       const std::string& detail)
{
  throw FormatError(kind, path.string() + ": " + detail);
}

[[noreturn]] void fail_line(FormatErrorKind kind, const std::filesystem::path& path,
                            std::size_t line, const std::string& detail)
{
  throw FormatError(kind, path.string() + ":" + std::to_string(line) + ": " + detail);
}

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
  {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true)
  {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos)
    {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out)
{
  if (text.empty())
  {
    return false;
  }
  if (text.front() == '+')
  {
    text.remove_prefix(1);
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

struct CsvLine
{
  std::size_t number = 0;
  std::string text;
};

/// Non-blank lines with their 1-based line numbers.
std::vector<CsvLine> read_lines(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    fail(FormatErrorKind::Io, path, "cannot open file");
  }
  std::vector<CsvLine> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text))
  {
    ++number;
    if (!trim(text).empty())
    {
      lines.push_back({number, text});
    }
  }
  return lines;
}

void expect_header(const std::filesystem::path& path, const std::vector<CsvLine>& lines,
                   std::string_view header)
{
  if (lines.empty())
  {
    fail(FormatErrorKind::Empty, path, "empty file");
  }
  const auto fields = split_fields(lines.front().text);
  const auto expected = split_fields(header);
  if (fields != expected)
  {
    fail_line(FormatErrorKind::Malformed, path, lines.front().number,
              "expected header \"" + std::string(header) + "\"");
  }
  if (lines.size() == 1)
  {
    fail(FormatErrorKind::Empty, path, "no data rows");
  }
}

void put_u32(std::vector<char>& out, std::uint32_t v)
{
  for (int shift = 0; shift < 32; shift += 8)
  {
    out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  }
}

std::uint32_t get_u32(const std::vector<char>& in, std::size_t offset)
{
  std::uint32_t v = 0;
  for (std::size_t b = 0; b < 4; ++b)
  {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + b])) << (8 * b);
  }
  return v;
}

bool has_csv_extension(const std::filesystem::path& path)
{
  return path.extension() == ".csv";
}

FeatureMatrix load_features_csv(const std::filesystem::path& path)
{
  const auto lines = read_lines(path);
  if (lines.empty())
  {
    fail(FormatErrorKind::Empty, path, "empty feature file");
  }
  std::size_t dim = 0;
  std::vector<float> values;
  for (const auto& line : lines)
  {
    const auto fields = split_fields(line.text);
    if (dim == 0)
    {
      dim = fields.size();
    }
    else if (fields.size() != dim)
    {
      fail_line(FormatErrorKind::Malformed, path, line.number,
                "expected " + std::to_string(dim) + " values, found " +
                    std::to_string(fields.size()));
    }
    for (const auto field : fields)
    {
      float v = 0.0f;
      if (!parse_number(field, v))
      {
        fail_line(FormatErrorKind::Malformed, path, line.number,
                  "not a number: \"" + std::string(field) + "\"");
      }
      if (!std::isfinite(v))
      {
        fail_line(FormatErrorKind::NonFinite, path, line.number, "non-finite feature value");
      }
      values.push_back(v);
    }
  }
  return FeatureMatrix(lines.size(), dim, std::move(values));
}

void write_features_csv(const FeatureMatrix& features, const std::filesystem::path& path)
{
  std::string text;
  for (std::size_t r = 0; r < features.rows(); ++r)
  {
    const auto row = features.row(r);
    for (std::size_t c = 0; c < row.size(); ++c)
    {
      if (c > 0)
      {
        text += ',';
      }
      text += fmt::format("{}", row[c]);
    }
    text += '\n';
  }
  write_text_file(path, text);
}

// HSL with fixed saturation/lightness to an sRGB hex triple.
std::string hue_to_hex(double hue_deg)
{
  constexpr double saturation = 0.65;
  constexpr double lightness = 0.50;
  const double chroma = (1.0 - std::fabs(2.0 * lightness - 1.0)) * saturation;
  const double h = hue_deg / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  switch (static_cast<int>(h) % 6)
  {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = lightness - chroma / 2.0;
  const auto channel = [m](double v) {
    return static_cast<unsigned>(std::lround(std::clamp(v + m, 0.0, 1.0) * 255.0));
  };
  return fmt::format("#{:02x}{:02x}{:02x}", channel(r), channel(g), channel(b));
}

}  // namespace

std::string_view to_string(FormatErrorKind kind)
{
  switch (kind)
  {
    case FormatErrorKind::Io: return "io";
    case FormatErrorKind::Empty: return "empty";
    case FormatErrorKind::Malformed: return "malformed";
    case FormatErrorKind::DuplicateId: return "duplicate-id";
    case FormatErrorKind::NonDenseClasses: return "non-dense-classes";
    case FormatErrorKind::BadMagic: return "bad-magic";
    case FormatErrorKind::UnsupportedVersion: return "unsupported-version";
    case FormatErrorKind::TruncatedHeader: return "truncated-header";
    case FormatErrorKind::TruncatedPayload: return "truncated-payload";
    case FormatErrorKind::TrailingBytes: return "trailing-bytes";
    case FormatErrorKind::NonFinite: return "non-finite";
  }
  return "unknown";
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    fail(FormatErrorKind::Io, path, "cannot open for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
  {
    fail(FormatErrorKind::Io, path, "write failed");
  }
}

std::vector<char> read_binary_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    fail(FormatErrorKind::Io, path, "cannot open file");
  }
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path)
{
  const auto lines = read_lines(path);
  expect_header(path, lines, kTrajectoryHeader);

  std::vector<TrajectorySample> samples;
  samples.reserve(lines.size() - 1);
  std::unordered_map<SampleId, std::size_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i)
  {
    const auto& line = lines[i];
    const auto fields = split_fields(line.text);
    if (fields.size() != 5)
    {
      fail_line(FormatErrorKind::Malformed, path, line.number,
                "expected 5 columns, found " + std::to_string(fields.size()));
    }
    SampleId id = 0;
    if (!parse_number(fields[0], id))
    {
      fail_line(FormatErrorKind::Malformed, path, line.number,
                "bad sample_id \"" + std::string(fields[0]) + "\"");
    }
    double values[4] = {};
    for (std::size_t f = 0; f < 4; ++f)
    {
      if (!parse_number(fields[f + 1], values[f]) || !std::isfinite(values[f]))
      {
        fail_line(FormatErrorKind::Malformed, path, line.number,
                  "bad value \"" + std::string(fields[f + 1]) + "\" in column " +
                      std::to_string(f + 2));
      }
    }
    if (const auto [it, inserted] = seen.emplace(id, line.number); !inserted)
    {
      fail_line(FormatErrorKind::DuplicateId, path, line.number,
                "duplicate sample_id " + std::to_string(id) + " (first on line " +
                    std::to_string(it->second) + ")");
    }
    samples.push_back({id, values[0], Pose(values[1], values[2], values[3])});
  }

  std::unordered_map<SampleId, std::size_t> row_of;
  for (std::size_t r = 0; r < samples.size(); ++r)
  {
    row_of.emplace(samples[r].sample_id, r);
  }
  TrajectoryFile file{Trajectory(std::move(samples)), {}};
  file.file_row.reserve(file.trajectory.size());
  for (const auto& s : file.trajectory.samples())
  {
    file.file_row.push_back(row_of.at(s.sample_id));
  }
  return file;
}

Trajectory load_trajectory_csv(const std::filesystem::path& path)
{
  return read_trajectory_csv(path).trajectory;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path)
{
  std::string text(kTrajectoryHeader);
  text += '\n';
  for (const auto& s : traj.samples())
  {
    text += fmt::format("{},{},{},{},{}\n", s.sample_id, s.timestamp, s.pose.x(), s.pose.y(),
                        s.pose.heading());
  }
  write_text_file(path, text);
}

std::vector<char> encode_features(const FeatureMatrix& features)
{
  if (features.rows() > UINT32_MAX || features.dim() > UINT32_MAX)
  {
    throw std::invalid_argument("encode_features: matrix too large for VPCF");
  }
  std::vector<char> out;
  out.reserve(kFeatureHeaderBytes + features.values().size() * 4);
  for (const char c : kFeatureMagic)
  {
    out.push_back(c);
  }
  put_u32(out, kFeatureVersion);
  put_u32(out, static_cast<std::uint32_t>(features.rows()));
  put_u32(out, static_cast<std::uint32_t>(features.dim()));
  for (const float v : features.values())
  {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

FeatureMatrix decode_features(const std::vector<char>& bytes)
{
  if (bytes.size() < sizeof(kFeatureMagic))
  {
    throw FormatError(FormatErrorKind::TruncatedHeader, "VPCF: file shorter than magic");
  }
  if (!std::equal(std::begin(kFeatureMagic), std::end(kFeatureMagic), bytes.begin()))
  {
    throw FormatError(FormatErrorKind::BadMagic, "VPCF: bad magic");
  }
  if (bytes.size() < kFeatureHeaderBytes)
  {
    throw FormatError(FormatErrorKind::TruncatedHeader,
                      "VPCF: header truncated at " + std::to_string(bytes.size()) + " bytes");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kFeatureVersion)
  {
    throw FormatError(FormatErrorKind::UnsupportedVersion,
                      "VPCF: unsupported version " + std::to_string(version));
  }
  const std::uint64_t rows = get_u32(bytes, 8);
  const std::uint64_t dim = get_u32(bytes, 12);
  if (rows == 0 || dim == 0)
  {
    throw FormatError(FormatErrorKind::Malformed, "VPCF: n_rows and dim must be >= 1");
  }
  const std::uint64_t payload = bytes.size() - kFeatureHeaderBytes;
  const std::uint64_t count = rows * dim;
  if (payload / 4 < count)
  {
    throw FormatError(FormatErrorKind::TruncatedPayload,
                      "VPCF: header declares " + std::to_string(rows) + " x " +
                          std::to_string(dim) + " values but payload holds " +
                          std::to_string(payload) + " bytes");
  }
  if (payload != count * 4)
  {
    throw FormatError(FormatErrorKind::TrailingBytes,
                      "VPCF: " + std::to_string(payload - count * 4) +
                          " bytes after the declared payload");
  }
  std::vector<float> values(count);
  for (std::uint64_t i = 0; i < count; ++i)
  {
    values[i] = std::bit_cast<float>(get_u32(bytes, kFeatureHeaderBytes + 4 * i));
    if (!std::isfinite(values[i]))
    {
      throw FormatError(FormatErrorKind::NonFinite,
                        "VPCF: non-finite value at row " + std::to_string(i / dim) +
                            ", column " + std::to_string(i % dim));
    }
  }
  return FeatureMatrix(rows, dim, std::move(values));
}

FeatureMatrix load_features(const std::filesystem::path& path)
{
  if (has_csv_extension(path))
  {
    return load_features_csv(path);
  }
  try
  {
    return decode_features(read_binary_file(path));
  }
  catch (const FormatError& e)
  {
    if (e.kind() == FormatErrorKind::Io)
    {
      throw;
    }
    fail(e.kind(), path, e.what());
  }
}

void write_features(const FeatureMatrix& features, const std::filesystem::path& path)
{
  if (has_csv_extension(path))
  {
    write_features_csv(features, path);
    return;
  }
  const auto bytes = encode_features(features);
  write_text_file(path, std::string(bytes.begin(), bytes.end()));
}

void write_partition_csv(const Partition& partition, const std::filesystem::path& path)
{
  std::string text(kPartitionHeader);
  text += '\n';
  for (std::size_t i = 0; i < partition.size(); ++i)
  {
    text += fmt::format("{},{}\n", partition.sample_id(i), partition.class_at(i));
  }
  write_text_file(path, text);
}

Partition load_partition_csv(const std::filesystem::path& path)
{
  const auto lines = read_lines(path);
  expect_header(path, lines, kPartitionHeader);
  std::vector<SampleId> ids;
  std::vector<ClassId> classes;
  std::unordered_map<SampleId, std::size_t> seen;
  ClassId max_class = 0;
  for (std::size_t i = 1; i < lines.size(); ++i)
  {
    const auto& line = lines[i];
    const auto fields = split_fields(line.text);
    SampleId id = 0;
    ClassId cls = 0;
    if (fields.size() != 2 || !parse_number(fields[0], id) || !parse_number(fields[1], cls))
    {
      fail_line(FormatErrorKind::Malformed, path, line.number,
                "expected \"sample_id,class_id\" with non-negative integers");
    }
    if (const auto [it, inserted] = seen.emplace(id, line.number); !inserted)
    {
      fail_line(FormatErrorKind::DuplicateId, path, line.number,
                "duplicate sample_id " + std::to_string(id) + " (first on line " +
                    std::to_string(it->second) + ")");
    }
    ids.push_back(id);
    classes.push_back(cls);
    max_class = std::max(max_class, cls);
  }
  std::vector<bool> used(static_cast<std::size_t>(max_class) + 1, false);
  for (const ClassId c : classes)
  {
    used[c] = true;
  }
  if (const auto gap = std::find(used.begin(), used.end(), false); gap != used.end())
  {
    fail(FormatErrorKind::NonDenseClasses, path,
         "class ids are not dense: id " + std::to_string(gap - used.begin()) +
             " has no members");
  }
  return Partition(std::move(ids), std::move(classes));
}

std::string class_color(ClassId class_id, std::uint64_t palette_seed)
{
  constexpr double golden_angle_deg = 137.50776405003785;
  const double step = static_cast<double>(class_id) + static_cast<double>(palette_seed % 360u);
  return hue_to_hex(std::fmod(step * golden_angle_deg, 360.0));
}

std::string partition_svg(const Trajectory& traj, const Partition& partition,
                          const SvgOptions& options)
{
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  if (!traj.empty())
  {
    min_x = max_x = traj[0].pose.x();
    min_y = max_y = traj[0].pose.y();
  }
  for (const auto& s : traj.samples())
  {
    min_x = std::min(min_x, s.pose.x());
    max_x = std::max(max_x, s.pose.x());
    min_y = std::min(min_y, s.pose.y());
    max_y = std::max(max_y, s.pose.y());
  }
  const double drawable = options.canvas_px - 2.0 * options.margin_px;
  const double extent = std::max(max_x - min_x, max_y - min_y);
  const double scale = extent > 0.0 ? drawable / extent : 1.0;
  // Centre the scaled bounding box on the canvas.
  const double off_x = options.margin_px + (drawable - (max_x - min_x) * scale) / 2.0;
  const double off_y = options.margin_px + (drawable - (max_y - min_y) * scale) / 2.0;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{0:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {0:.0f}\">\n",
      options.canvas_px);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (const auto& s : traj.samples())
  {
    const double cx = off_x + (s.pose.x() - min_x) * scale;
    const double cy = options.canvas_px - (off_y + (s.pose.y() - min_y) * scale);
    svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\"/>\n", cx, cy,
                       options.point_radius_px,
                       class_color(partition.class_of(s.sample_id), options.palette_seed));
  }
  svg += "</svg>\n";
  return svg;
}

void render_partition_svg(const Trajectory& traj, const Partition& partition,
                          const std::filesystem::path& path, const SvgOptions& options)
{
  write_text_file(path, partition_svg(traj, partition, options));
}

double round_significant(double value, int digits)
{
  if (!std::isfinite(value) || value == 0.0)
  {
    return value;
  }
  const std::string text = fmt::format("{:.{}g}", value, digits);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report)
{
  nlohmann::ordered_json j;
  j["strategy"] = report.strategy;
  j["config"] = report.config;
  j["n_classes"] = report.n_classes;
  j["n_valid_tests"] = report.n_valid_tests;
  j["n_invalid_tests"] = report.n_invalid_tests;
  j["sr_top1"] = round_significant(report.sr_top1);
  j["sr_top5"] = round_significant(report.sr_top5);
  j["nsr_top1"] = round_significant(report.nsr_top1);
  j["mean_class_size"] = round_significant(report.mean_class_size);
  auto histogram = nlohmann::ordered_json::array();
  for (const auto& [size, count] : report.class_size_histogram)
  {
    histogram.push_back({{"size", size}, {"count", count}});
  }
  j["class_size_histogram"] = std::move(histogram);
  return j;
}

EvaluationReport report_from_json(const nlohmann::ordered_json& j)
{
  EvaluationReport report;
  try
  {
    report.strategy = j.at("strategy").get<std::string>();
    report.config = j.at("config");
    report.n_classes = j.at("n_classes").get<std::size_t>();
    report.n_valid_tests = j.at("n_valid_tests").get<std::size_t>();
    report.n_invalid_tests = j.at("n_invalid_tests").get<std::size_t>();
    report.sr_top1 = j.at("sr_top1").get<double>();
    report.sr_top5 = j.at("sr_top5").get<double>();
    report.nsr_top1 = j.at("nsr_top1").get<double>();
    report.mean_class_size = j.at("mean_class_size").get<double>();
    for (const auto& entry : j.at("class_size_histogram"))
    {
      report.class_size_histogram.emplace_back(entry.at("size").get<std::size_t>(),
                                               entry.at("count").get<std::size_t>());
    }
  }
  catch (const nlohmann::json::exception& e)
  {
    throw FormatError(FormatErrorKind::Malformed, std::string("report JSON: ") + e.what());
  }
  return report;
}

void write_report_json(const EvaluationReport& report, const std::filesystem::path& path)
{
  write_text_file(path, report_to_json(report).dump(2) + "\n");
}

EvaluationReport load_report_json(const std::filesystem::path& path)
{
  const auto bytes = read_binary_file(path);
  nlohmann::ordered_json j;
  try
  {
    j = nlohmann::ordered_json::parse(bytes.begin(), bytes.end());
  }
  catch (const nlohmann::json::parse_error& e)
  {
    fail(FormatErrorKind::Malformed, path, e.what());
  }
  return report_from_json(j);
}

}  // namespace vpc
