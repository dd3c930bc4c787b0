#include "gpseg/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gpseg/errors.hpp"

namespace gpseg {

namespace {

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  return out;
}

void push_if_finite(PointCloud& cloud, const Point3& p) {
  if (std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z)) {
    cloud.points.push_back(p);
  } else {
    ++cloud.dropped_non_finite;
  }
}

}  // namespace

namespace detail {

std::optional<double> parse_double(std::string_view text) noexcept {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                       std::chars_format::general, 9);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), ptr);
}

}  // namespace detail

int label_code(Label label) noexcept { return static_cast<int>(label); }

Label label_from_code(int code) {
  switch (code) {
    case 0: return Label::Obstacle;
    case 1: return Label::Ground;
    case -1: return Label::Unassigned;
    default: throw Error(ErrorCode::ParseError, "invalid label code " + std::to_string(code));
  }
}

PointCloud load_pcd(const std::filesystem::path& path) {
  auto in = open_input(path);
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  std::optional<std::size_t> declared_points;
  bool data_seen = false;

  while (!data_seen && std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    const std::string_view key = tokens.front();
    if (key == "FIELDS") {
      fields.assign(tokens.begin() + 1, tokens.end());
    } else if (key == "POINTS") {
      std::size_t n = 0;
      if (tokens.size() < 2 ||
          std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), n).ec != std::errc{}) {
        throw ParseError(line_no, "malformed POINTS header");
      }
      declared_points = n;
    } else if (key == "DATA") {
      if (tokens.size() < 2) throw ParseError(line_no, "DATA header without a format");
      if (tokens[1] != "ascii") {
        throw Error(ErrorCode::BinaryUnsupported,
                    "DATA " + std::string(tokens[1]) + " in '" + path.string() + "'");
      }
      data_seen = true;
    }
    // VERSION, SIZE, TYPE, COUNT, WIDTH, HEIGHT, VIEWPOINT are ignored.
  }
  if (!data_seen) throw ParseError(line_no, "missing DATA header");

  std::array<std::size_t, 3> column{};
  constexpr std::array<std::string_view, 3> names{"x", "y", "z"};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto it = std::find(fields.begin(), fields.end(), names[k]);
    if (it == fields.end()) {
      throw Error(ErrorCode::MissingField, "PCD FIELDS lacks '" + std::string(names[k]) + "'");
    }
    column[k] = static_cast<std::size_t>(it - fields.begin());
  }
  const std::size_t needed = *std::max_element(column.begin(), column.end()) + 1;

  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (declared_points && rows == *declared_points) {
      throw ParseError(line_no, "more rows than POINTS declares");
    }
    if (tokens.size() < needed) throw ParseError(line_no, "expected at least " + std::to_string(needed) + " values");
    Point3 p;
    double* coords[3] = {&p.x, &p.y, &p.z};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto v = detail::parse_double(tokens[column[k]]);
      if (!v) throw ParseError(line_no, "not a number: '" + std::string(tokens[column[k]]) + "'");
      *coords[k] = *v;
    }
    push_if_finite(cloud, p);
    ++rows;
  }
  if (declared_points && rows != *declared_points) {
    throw ParseError(line_no, "POINTS declares " + std::to_string(*declared_points) + " rows, found " +
                                  std::to_string(rows));
  }
  return cloud;
}

PointCloud load_csv(const std::filesystem::path& path, bool has_header) {
  auto in = open_input(path);
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    if (trim(line).empty()) continue;
    const auto cols = split_commas(line);
    if (cols.size() < 3) throw ParseError(line_no, "expected at least 3 columns, found " + std::to_string(cols.size()));
    Point3 p;
    double* coords[3] = {&p.x, &p.y, &p.z};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto v = detail::parse_double(cols[k]);
      if (!v) throw ParseError(line_no, "not a number: '" + std::string(cols[k]) + "'");
      *coords[k] = *v;
    }
    push_if_finite(cloud, p);
  }
  return cloud;
}

void write_labeled(const std::filesystem::path& path, const LabeledCloud& cloud, const PointCloud& original) {
  if (cloud.size() != original.size()) {
    throw Error(ErrorCode::PreconditionViolation,
                "labeled cloud has " + std::to_string(cloud.size()) + " entries, original has " +
                    std::to_string(original.size()));
  }
  std::string text = "x,y,z,label,z_bar,variance,d_stat\n";
  text.reserve(text.size() + cloud.size() * 80);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = original.points[i];
    const auto& v = cloud.verdicts[i];
    text += detail::format_double(p.x);
    text += ',';
    text += detail::format_double(p.y);
    text += ',';
    text += detail::format_double(p.z);
    text += ',';
    text += std::to_string(label_code(v.label));
    text += ',';
    text += detail::format_double(v.z_bar);
    text += ',';
    text += detail::format_double(v.variance);
    text += ',';
    text += detail::format_double(v.d_stat);
    text += '\n';
  }
  auto out = open_output(path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

void write_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud, std::span<const Label> labels) {
  if (!labels.empty() && labels.size() != cloud.size()) {
    throw Error(ErrorCode::PreconditionViolation, "label count does not match cloud size");
  }
  std::string text = labels.empty() ? "x,y,z\n" : "x,y,z,label\n";
  text.reserve(text.size() + cloud.size() * 40);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    text += detail::format_double(p.x);
    text += ',';
    text += detail::format_double(p.y);
    text += ',';
    text += detail::format_double(p.z);
    if (!labels.empty()) {
      text += ',';
      text += std::to_string(label_code(labels[i]));
    }
    text += '\n';
  }
  auto out = open_output(path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

std::vector<Label> read_label_column(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty file '" + path.string() + "'");
  const auto header = split_commas(line);
  const auto it = std::find(header.begin(), header.end(), std::string_view("label"));
  if (it == header.end()) throw Error(ErrorCode::MissingField, "no 'label' column in '" + path.string() + "'");
  const auto column = static_cast<std::size_t>(it - header.begin());

  std::vector<Label> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split_commas(line);
    if (cols.size() <= column) throw ParseError(line_no, "missing label column");
    int code = 0;
    const auto field = cols[column];
    if (std::from_chars(field.data(), field.data() + field.size(), code).ec != std::errc{}) {
      throw ParseError(line_no, "label is not an integer: '" + std::string(field) + "'");
    }
    try {
      labels.push_back(label_from_code(code));
    } catch (const Error&) {
      throw ParseError(line_no, "invalid label code " + std::to_string(code));
    }
  }
  return labels;
}

}  // namespace gpseg
