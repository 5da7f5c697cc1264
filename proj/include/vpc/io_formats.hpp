#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpc/core.hpp"
#include "vpc/evaluation.hpp"

namespace vpc
{
enum class FormatErrorKind
{
  Io,
  Empty,
  Malformed,
  DuplicateId,
  NonDenseClasses,
  BadMagic,
  UnsupportedVersion,
  TruncatedHeader,
  TruncatedPayload,
  TrailingBytes,
  NonFinite,
};

std::string_view to_string(FormatErrorKind kind);

class FormatError : public std::runtime_error
{
public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind)
  {
  }

  FormatErrorKind kind() const { return kind_; }

private:
  FormatErrorKind kind_;
};

// Trajectory CSV: header "sample_id,timestamp_s,x_m,y_m,heading_rad", one
// sample per row.

struct TrajectoryFile
{
  Trajectory trajectory;
  /// file_row[i] is the data-row index (0-based, header excluded) that
  /// trajectory sample i was read from.
  std::vector<std::size_t> file_row;
};

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path);
Trajectory load_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

// VPCF feature file, all little-endian:
//   "VPCF" | u32 version = 1 | u32 n_rows | u32 dim | n_rows*dim f32, row-major
// A path ending in ".csv" is read/written as plain comma-separated rows.

inline constexpr char kFeatureMagic[4] = {'V', 'P', 'C', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

FeatureMatrix load_features(const std::filesystem::path& path);
void write_features(const FeatureMatrix& features, const std::filesystem::path& path);

/// Parses an in-memory VPCF image.
FeatureMatrix decode_features(const std::vector<char>& bytes);
std::vector<char> encode_features(const FeatureMatrix& features);

// Partition CSV: header "sample_id,class_id".

void write_partition_csv(const Partition& partition, const std::filesystem::path& path);
Partition load_partition_csv(const std::filesystem::path& path);

struct SvgOptions
{
  double point_radius_px = 2.0;
  /// Shifts the palette; 0 gives the default colours.
  std::uint64_t palette_seed = 0;
  double canvas_px = 800.0;
  double margin_px = 20.0;
};

/// Golden-angle hue stepping over class ids, "#rrggbb".
std::string class_color(ClassId class_id, std::uint64_t palette_seed = 0);

std::string partition_svg(const Trajectory& traj, const Partition& partition,
                          const SvgOptions& options = {});
void render_partition_svg(const Trajectory& traj, const Partition& partition,
                          const std::filesystem::path& path, const SvgOptions& options = {});

/// Rounds to 6 significant digits, the precision reports are written with.
double round_significant(double value, int digits = 6);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::ordered_json& json);
void write_report_json(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport load_report_json(const std::filesystem::path& path);

/// Writes `text` to `path`, replacing any existing file. Throws FormatError(Io).
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::vector<char> read_binary_file(const std::filesystem::path& path);

}  // namespace vpc
