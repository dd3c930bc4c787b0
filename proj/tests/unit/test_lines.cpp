#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gpseg/errors.hpp"
#include "gpseg/lines.hpp"

using namespace gpseg;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

GroundCandidates make(const std::vector<double>& r, const std::vector<double>& z) {
  GroundCandidates c;
  for (std::size_t i = 0; i < r.size(); ++i) c.push_back({r[i], z[i], i});
  return c;
}

// Sum of squared residuals of the least-squares line through c[a..b].
double sse(const GroundCandidates& c, std::size_t a, std::size_t b) {
  const double k = static_cast<double>(b - a + 1);
  double mr = 0, mz = 0;
  for (std::size_t i = a; i <= b; ++i) mr += c[i].r / k, mz += c[i].z / k;
  double srr = 0, srz = 0;
  for (std::size_t i = a; i <= b; ++i) srr += (c[i].r - mr) * (c[i].r - mr), srz += (c[i].r - mr) * (c[i].z - mz);
  const double slope = srz / srr;
  double s = 0;
  for (std::size_t i = a; i <= b; ++i) {
    const double e = c[i].z - (mz + slope * (c[i].r - mr));
    s += e * e;
  }
  return s;
}

}  // namespace

TEST_CASE("collinear candidates give one exact line") {
  std::vector<double> r, z;
  for (int i = 0; i < 20; ++i) {
    r.push_back(1.0 + 1.5 * i);
    z.push_back(0.1 * r.back());
  }
  const auto out = extract_lines(make(r, z), LineParams{});
  REQUIRE(out.lines.size() == 1);
  CHECK(out.critical_points.empty());
  CHECK(out.lines[0].slope == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(out.lines[0].rms_residual == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out.lines[0].start == 0);
  CHECK(out.lines[0].end == 19);
}

TEST_CASE("slope break is found where an exhaustive two-line scan puts it") {
  std::vector<double> r, z;
  for (double x = 2.0; x <= 20.0; x += 1.0) {
    r.push_back(x);
    z.push_back(x <= 10.0 ? 0.0 : 0.5 * (x - 10.0));
  }
  const auto cands = make(r, z);
  std::size_t best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < cands.size(); ++k) {
    const double s = sse(cands, 0, k) + sse(cands, k, cands.size() - 1);
    if (s < best_sse) best_sse = s, best = k;
  }
  REQUIRE(cands[best].r == 10.0);

  LineParams params;
  params.slope_tolerance = 0.2;
  const auto out = extract_lines(cands, params);
  REQUIRE(out.lines.size() == 2);
  REQUIRE(out.critical_points.size() == 1);
  CHECK(out.critical_points[0].index == best);
  CHECK(out.critical_points[0].reason == CriticalReason::SlopeChange);
  CHECK(out.lines[0].end == out.lines[1].start);
  CHECK(out.lines[0].slope == doctest::Approx(0.0));
  CHECK(out.lines[1].slope == doctest::Approx(0.5));
}

TEST_CASE("a radial gap beyond tolerance is a critical point") {
  const auto out = extract_lines(make({1, 2, 3, 4, 16, 17, 18}, {0, 0, 0, 0, 0, 0, 0}), LineParams{});
  REQUIRE(out.critical_points.size() == 1);
  CHECK(out.critical_points[0].index == 3);
  CHECK(out.critical_points[0].reason == CriticalReason::GapInRange);
  CHECK(out.lines.size() == 2);
}

TEST_CASE("a residual jump closes the line") {
  LineParams params;
  params.slope_tolerance = 10.0;  // only the residual trigger can fire
  params.fit_tolerance = 0.05;
  const auto out = extract_lines(make({1, 2, 3, 4, 5, 6}, {0, 0, 0, 0, 0.5, 0.5}), params);
  REQUIRE_FALSE(out.critical_points.empty());
  CHECK(out.critical_points[0].reason == CriticalReason::ResidualJump);
  CHECK(out.critical_points[0].index == 3);
}

TEST_CASE("extract_lines needs two candidates") {
  try {
    extract_lines(make({1.0}, {0.0}), LineParams{});
    FAIL("expected TooFewCandidates");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewCandidates);
  }
}

TEST_CASE("coverage: line spans tile the candidates and overlap only at critical points") {
  std::vector<double> r, z;
  for (int i = 0; i < 40; ++i) {
    const double x = 1.0 + 1.3 * i + (i > 25 ? 7.0 : 0.0);
    r.push_back(x);
    z.push_back(i < 12 ? 0.02 * x : 0.24 + 0.4 * (x - 15.3) + 0.03 * std::sin(3.0 * x));
  }
  const auto out = extract_lines(make(r, z), LineParams{});
  REQUIRE(out.lines.size() == out.critical_points.size() + 1);
  CHECK(out.lines.front().start == 0);
  CHECK(out.lines.back().end == r.size() - 1);
  for (std::size_t l = 0; l + 1 < out.lines.size(); ++l) {
    CHECK(out.lines[l].end == out.lines[l + 1].start);
    CHECK(out.lines[l].end == out.critical_points[l].index);
    CHECK(out.lines[l].end > out.lines[l].start);
  }
}

TEST_CASE("support targets are the log of the clamped line span") {
  std::vector<double> r, z;
  for (double x = 2.0; x <= 22.0; x += 2.0) r.push_back(x), z.push_back(0.0);
  const auto cands = make(r, z);
  const auto lines = extract_lines(cands, LineParams{}).lines;
  REQUIRE(lines.size() == 1);
  const auto support = select_pseudo_inputs(cands, lines, LineParams{});
  REQUIRE(support.size() == r.size());
  for (double t : support.targets) CHECK(t == doctest::Approx(std::log(20.0)));

  // Short and long spans hit the clamp.
  LineParams narrow;
  narrow.min_length_scale = 30.0;
  narrow.max_length_scale = 40.0;
  for (double t : select_pseudo_inputs(cands, lines, narrow).targets) CHECK(t == doctest::Approx(std::log(30.0)));
}

TEST_CASE("a three-candidate line keeps all three") {
  const auto cands = make({1.0, 2.0, 3.0}, {0.02, 0.04, 0.06});
  const auto lines = extract_lines(cands, LineParams{}).lines;
  REQUIRE(lines.size() == 1);
  LineParams tight;
  tight.angle_tolerance = 1e-3;
  const auto support = select_pseudo_inputs(cands, lines, tight);
  CHECK(support.size() == 3);
}

TEST_CASE("angular outlier is excluded from the support set") {
  // Five candidates; the middle one sits 41 degrees above the first, the rest are level.
  const double lift = 4.0 * std::tan(41.0 * kDeg);
  const auto cands = make({2.0, 4.0, 6.0, 8.0, 10.0}, {0.0, 0.0, lift, 0.0, 0.0});
  LineSegment line{0, 4, 0.0, 0.0, 0.0, 0.0};
  LineParams params;
  params.angle_tolerance = 10.0 * kDeg;

  // Direct evaluation of the rule.
  std::vector<double> angles;
  for (std::size_t i = 1; i < 5; ++i) angles.push_back(std::atan2(cands[i].z - cands[0].z, cands[i].r - cands[0].r));
  const double mean = (angles[0] + angles[1] + angles[2] + angles[3]) / 4.0;
  CHECK(std::abs(angles[1] - mean) > 30.0 * kDeg);

  const auto got = vector_angles(cands, line);
  REQUIRE(got.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(angles[i]));

  const auto support = select_pseudo_inputs(cands, {line}, params);
  for (std::size_t i = 0; i < 5; ++i) {
    const bool endpoint = i == 0 || i == 4;
    const bool expected = endpoint || std::abs(angles[i - 1] - mean) <= params.angle_tolerance;
    const bool present =
        std::find(support.locations.begin(), support.locations.end(), cands[i].r) != support.locations.end();
    CHECK(present == expected);
  }
  CHECK(std::find(support.locations.begin(), support.locations.end(), 6.0) == support.locations.end());
}

TEST_CASE("support locations strictly increase and targets stay in bounds") {
  std::vector<double> r, z;
  for (int i = 0; i < 30; ++i) {
    r.push_back(0.8 + 1.1 * i + (i == 15 ? 0.0 : 0.0) + (i > 15 ? 9.0 : 0.0));
    z.push_back(i < 10 ? 0.0 : 0.3 * (r.back() - r[9]));
  }
  const auto cands = make(r, z);
  const LineParams params;
  const auto lines = extract_lines(cands, params).lines;
  const auto support = select_pseudo_inputs(cands, lines, params);
  REQUIRE_FALSE(support.empty());
  CHECK(support.locations.size() == support.targets.size());
  CHECK(support.owner.size() == support.targets.size());
  for (std::size_t i = 1; i < support.size(); ++i) CHECK(support.locations[i] > support.locations[i - 1]);
  for (double t : support.targets) {
    CHECK(t >= std::log(params.min_length_scale));
    CHECK(t <= std::log(params.max_length_scale));
  }
}

TEST_CASE("scaling r and z scales spans and shifts targets by log c") {
  std::vector<double> r, z;
  for (double x = 1.0; x <= 21.0; x += 1.0) {
    r.push_back(x);
    z.push_back(x <= 9.0 ? 0.0 : 0.5 * (x - 9.0));
  }
  const double c = 1.7;
  std::vector<double> rs, zs;
  for (std::size_t i = 0; i < r.size(); ++i) rs.push_back(c * r[i]), zs.push_back(c * z[i]);
  const LineParams params;
  const auto a = make(r, z);
  const auto b = make(rs, zs);
  const auto la = extract_lines(a, params).lines;
  const auto lb = extract_lines(b, params).lines;
  REQUIRE(la.size() == lb.size());
  for (std::size_t l = 0; l < la.size(); ++l) {
    CHECK(b[lb[l].end].r - b[lb[l].start].r == doctest::Approx(c * (a[la[l].end].r - a[la[l].start].r)));
  }
  const auto sa = select_pseudo_inputs(a, la, params);
  const auto sb = select_pseudo_inputs(b, lb, params);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sb.targets[i] == doctest::Approx(sa.targets[i] + std::log(c)));
}

TEST_CASE("determinism and validation") {
  const auto cands = make({1, 2, 3, 7, 8, 9}, {0, 0.1, 0.1, 0.4, 0.5, 0.5});
  const auto a = extract_lines(cands, LineParams{});
  const auto b = extract_lines(cands, LineParams{});
  REQUIRE(a.lines.size() == b.lines.size());
  for (std::size_t i = 0; i < a.lines.size(); ++i) CHECK(a.lines[i].slope == b.lines[i].slope);

  LineParams bad;
  bad.fit_tolerance = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = LineParams{};
  bad.max_length_scale = bad.min_length_scale;
  CHECK_THROWS_AS(bad.validate(), Error);
}
