#include "gpseg/lines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>

#include "gpseg/errors.hpp"

namespace gpseg {

namespace {

struct Fit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

Fit fit_line(const GroundCandidates& c, std::size_t start, std::size_t end) {
  const auto k = static_cast<double>(end - start + 1);
  double mr = 0.0;
  double mz = 0.0;
  for (std::size_t i = start; i <= end; ++i) {
    mr += c[i].r;
    mz += c[i].z;
  }
  mr /= k;
  mz /= k;
  double srr = 0.0;
  double srz = 0.0;
  for (std::size_t i = start; i <= end; ++i) {
    srr += (c[i].r - mr) * (c[i].r - mr);
    srz += (c[i].r - mr) * (c[i].z - mz);
  }
  Fit fit;
  fit.slope = srr > 0.0 ? srz / srr : 0.0;
  fit.intercept = mz - fit.slope * mr;
  double ssr = 0.0;
  for (std::size_t i = start; i <= end; ++i) {
    const double e = c[i].z - (fit.intercept + fit.slope * c[i].r);
    ssr += e * e;
  }
  fit.rms = std::sqrt(ssr / k);
  return fit;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

LineSegment make_line(const GroundCandidates& c, std::size_t start, std::size_t end) {
  const Fit fit = fit_line(c, start, end);
  LineSegment line{start, end, fit.slope, fit.intercept, fit.rms, 0.0};
  line.mean_vector_angle = mean_of(vector_angles(c, line));
  return line;
}

}  // namespace

void LineParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(fit_tolerance) || !positive(slope_tolerance) || !positive(gap_tolerance) ||
      !positive(angle_tolerance)) {
    throw Error(ErrorCode::InvalidConfig, "line thresholds must be positive");
  }
  if (!positive(min_length_scale) || !(max_length_scale > min_length_scale) || !std::isfinite(max_length_scale)) {
    throw Error(ErrorCode::InvalidConfig, "length-scale bounds must satisfy 0 < l_min < l_max");
  }
}

std::vector<double> vector_angles(const GroundCandidates& candidates, const LineSegment& line) {
  std::vector<double> angles;
  const auto& origin = candidates.at(line.start);
  for (std::size_t i = line.start + 1; i <= line.end; ++i) {
    angles.push_back(std::atan2(candidates[i].z - origin.z, candidates[i].r - origin.r));
  }
  return angles;
}

LineExtraction extract_lines(const GroundCandidates& candidates, const LineParams& params) {
  const std::size_t n = candidates.size();
  if (n < 2) throw Error(ErrorCode::TooFewCandidates, "line extraction needs >= 2 candidates, got " + std::to_string(n));

  LineExtraction out;
  std::size_t start = 0;
  std::size_t end = 1;
  Fit current = fit_line(candidates, start, end);
  for (std::size_t next = end + 1; next < n; ++next) {
    const auto& a = candidates[end];
    const auto& b = candidates[next];
    const double dr = b.r - a.r;
    std::optional<CriticalReason> reason;
    if (dr > params.gap_tolerance) {
      reason = CriticalReason::GapInRange;
    } else if (std::abs((b.z - a.z) / dr - current.slope) > params.slope_tolerance) {
      reason = CriticalReason::SlopeChange;
    } else {
      const Fit extended = fit_line(candidates, start, next);
      if (extended.rms > params.fit_tolerance) {
        reason = CriticalReason::ResidualJump;
      } else {
        current = extended;
        end = next;
        continue;
      }
    }
    out.lines.push_back(make_line(candidates, start, end));
    out.critical_points.push_back(CriticalPoint{end, *reason});
    start = end;
    end = next;
    current = fit_line(candidates, start, end);
  }
  out.lines.push_back(make_line(candidates, start, end));
  return out;
}

SupportSet select_pseudo_inputs(const GroundCandidates& candidates, const std::vector<LineSegment>& lines,
                                const LineParams& params) {
  SupportSet support;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto& line = lines[li];
    const auto angles = vector_angles(candidates, line);
    const double mean = mean_of(angles);
    const double span = candidates[line.end].r - candidates[line.start].r;
    const double target = std::log(std::clamp(span, params.min_length_scale, params.max_length_scale));
    for (std::size_t i = line.start; i <= line.end; ++i) {
      const bool endpoint = i == line.start || i == line.end;
      if (!endpoint && std::abs(angles[i - line.start - 1] - mean) > params.angle_tolerance) continue;
      // A shared boundary candidate stays with the earlier line.
      if (!support.locations.empty() && candidates[i].r <= support.locations.back()) continue;
      support.locations.push_back(candidates[i].r);
      support.targets.push_back(target);
      support.owner.push_back(li);
    }
  }
  return support;
}

void write_lines_csv(const std::filesystem::path& path, const GroundCandidates& candidates,
                     const LineExtraction& extraction) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << "index,r,z,line,critical,reason\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::size_t line_id = 0;
    for (std::size_t l = 0; l < extraction.lines.size(); ++l) {
      if (extraction.lines[l].start <= i && i <= extraction.lines[l].end) {
        line_id = l;
        break;
      }
    }
    const auto cp = std::find_if(extraction.critical_points.begin(), extraction.critical_points.end(),
                                 [i](const CriticalPoint& c) { return c.index == i; });
    const char* reason = "";
    if (cp != extraction.critical_points.end()) {
      switch (cp->reason) {
        case CriticalReason::SlopeChange: reason = "slope"; break;
        case CriticalReason::ResidualJump: reason = "residual"; break;
        case CriticalReason::GapInRange: reason = "gap"; break;
      }
    }
    out << i << ',' << detail::format_double(candidates[i].r) << ',' << detail::format_double(candidates[i].z)
        << ',' << line_id << ',' << (cp != extraction.critical_points.end() ? 1 : 0) << ',' << reason << '\n';
  }
}

}  // namespace gpseg
