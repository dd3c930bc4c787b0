#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gpseg {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Ordered point list. Indices into `points` identify a point for the rest of
/// the pipeline, so loaders keep file order.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<std::string> frame_id;
  std::size_t dropped_non_finite = 0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

enum class Label : std::int8_t { Obstacle = 0, Ground = 1, Unassigned = -1 };

struct PointVerdict {
  Label label = Label::Unassigned;
  double z_bar = 0.0;
  double variance = 0.0;
  double d_stat = 0.0;
};

struct LabeledCloud {
  std::vector<PointVerdict> verdicts;

  std::size_t size() const noexcept { return verdicts.size(); }
};

int label_code(Label label) noexcept;
Label label_from_code(int code);

PointCloud load_pcd(const std::filesystem::path& path);
PointCloud load_csv(const std::filesystem::path& path, bool has_header);

/// Writes x,y,z,label,z_bar,variance,d_stat with 9 significant digits.
void write_labeled(const std::filesystem::path& path, const LabeledCloud& cloud,
                   const PointCloud& original);

/// Writes x,y,z and, when labels are given, a label column.
void write_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud,
                     std::span<const Label> labels = {});

/// Reads the column named "label" from a CSV written by this module.
std::vector<Label> read_label_column(const std::filesystem::path& path);

namespace detail {
std::optional<double> parse_double(std::string_view text) noexcept;
std::string format_double(double value);
}  // namespace detail

}  // namespace gpseg
