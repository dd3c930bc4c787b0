#include "gpseg/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gpseg/errors.hpp"

namespace gpseg {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); }

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

double piecewise_height(const terrain::Piecewise& p, double r) {
  double z = 0.0;
  double from = 0.0;
  for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
    const double to = p.breakpoints[k];
    if (r <= to) return z + p.grades[k] * (r - from);
    z += p.grades[k] * (to - from);
    from = to;
  }
  return z + p.grades.back() * (r - from);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

bool Box::covers(double x, double y) const noexcept {
  return std::abs(x - center_x) <= 0.5 * extent_x && std::abs(y - center_y) <= 0.5 * extent_y;
}

void TerrainSpec::validate() const {
  std::visit(overloaded{
                 [](const terrain::Flat&) {},
                 [](const terrain::Sloped& s) {
                   if (!std::isfinite(s.grade)) invalid("grade must be finite");
                 },
                 [](const terrain::Bumpy& b) {
                   if (!std::isfinite(b.amplitude)) invalid("amplitude must be finite");
                   if (!finite_positive(b.wavelength)) invalid("wavelength must be > 0");
                   if (!std::isfinite(b.angular_modulation)) invalid("angular_modulation must be finite");
                 },
                 [](const terrain::Piecewise& p) {
                   if (p.grades.size() != p.breakpoints.size() + 1) {
                     invalid("piecewise terrain needs one more grade than breakpoints");
                   }
                   for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
                     if (!finite_positive(p.breakpoints[k]) || (k > 0 && p.breakpoints[k] <= p.breakpoints[k - 1])) {
                       invalid("breakpoints must be positive and strictly increasing");
                     }
                   }
                   for (const double g : p.grades) {
                     if (!std::isfinite(g)) invalid("grades must be finite");
                   }
                 },
             },
             kind);
  for (const auto& b : obstacles) {
    if (!finite_positive(b.extent_x) || !finite_positive(b.extent_y)) invalid("box extents must be positive");
    if (!finite_positive(b.height)) invalid("box height must be positive");
    if (!std::isfinite(b.center_x) || !std::isfinite(b.center_y)) invalid("box center must be finite");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) invalid("noise_sigma must be >= 0");
  if (rings < 1) invalid("rings must be >= 1");
  if (points_per_ring < 1) invalid("points_per_ring must be >= 1");
  if (!finite_positive(min_range)) invalid("min_range must be > 0");
  if (!(max_range >= min_range) || !std::isfinite(max_range)) invalid("max_range must be >= min_range");
}

double TerrainSpec::ground_height(double r, double phi) const {
  return std::visit(overloaded{
                        [](const terrain::Flat&) { return 0.0; },
                        [r](const terrain::Sloped& s) { return s.grade * r; },
                        [r, phi](const terrain::Bumpy& b) {
                          return b.amplitude * std::sin(2.0 * std::numbers::pi * r / b.wavelength) *
                                 (1.0 + b.angular_modulation * std::cos(phi));
                        },
                        [r](const terrain::Piecewise& p) { return piecewise_height(p, r); },
                    },
                    kind);
}

double TerrainSpec::ring_radius(std::size_t ring) const {
  if (rings == 1) return min_range;
  const double growth = std::pow(max_range / min_range, 1.0 / static_cast<double>(rings - 1));
  return min_range * std::pow(growth, static_cast<double>(ring));
}

SyntheticFrame generate(const TerrainSpec& spec) {
  spec.validate();
  SyntheticFrame frame;
  frame.cloud.points.reserve(spec.rings * spec.points_per_ring);
  frame.truth.reserve(spec.rings * spec.points_per_ring);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(spec.points_per_ring);

  for (std::size_t ring = 0; ring < spec.rings; ++ring) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(ring)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> offset_dist(0.0, step);
    std::normal_distribution<double> noise_dist(0.0, 1.0);
    auto noise = [&] {
      if (spec.noise_sigma == 0.0) return 0.0;
      double n = noise_dist(rng);
      while (std::abs(n) > 5.0) n = noise_dist(rng);
      return n * spec.noise_sigma;
    };

    const double r = spec.ring_radius(ring);
    const double offset = offset_dist(rng);
    for (std::size_t j = 0; j < spec.points_per_ring; ++j) {
      const double phi = offset + step * static_cast<double>(j);
      const double x = r * std::cos(phi);
      const double y = r * std::sin(phi);
      double z = spec.ground_height(r, phi);
      Label label = Label::Ground;
      for (const auto& box : spec.obstacles) {
        if (box.covers(x, y)) {
          z += box.height;
          label = Label::Obstacle;
          break;
        }
      }
      frame.cloud.points.push_back(Point3{x, y, z + noise()});
      frame.truth.push_back(label);
    }
  }
  return frame;
}

TerrainSpec parse_terrain_spec(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("terrain spec must be a JSON object");

  static const std::set<std::string> known{"kind",        "grade",     "amplitude",       "wavelength",
                                           "angular_modulation", "breakpoints", "grades", "obstacles",
                                           "noise_sigma", "rings",     "points_per_ring", "min_range",
                                           "max_range",   "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) invalid("unknown key '" + key + "'");
  }

  TerrainSpec spec;
  try {
    const std::string kind = j.value("kind", std::string("flat"));
    if (kind == "flat") {
      spec.kind = terrain::Flat{};
    } else if (kind == "sloped") {
      spec.kind = terrain::Sloped{j.at("grade").get<double>()};
    } else if (kind == "bumpy") {
      spec.kind = terrain::Bumpy{j.at("amplitude").get<double>(), j.at("wavelength").get<double>(),
                                 j.value("angular_modulation", 0.0)};
    } else if (kind == "piecewise") {
      spec.kind = terrain::Piecewise{j.at("breakpoints").get<std::vector<double>>(),
                                     j.at("grades").get<std::vector<double>>()};
    } else {
      invalid("unknown terrain kind '" + kind + "'");
    }
    if (j.contains("obstacles")) {
      for (const auto& o : j.at("obstacles")) {
        const auto center = o.at("center").get<std::vector<double>>();
        const auto extent = o.at("extent").get<std::vector<double>>();
        if (center.size() != 2 || extent.size() != 2) invalid("box center and extent need two values");
        spec.obstacles.push_back(Box{center[0], center[1], extent[0], extent[1], o.at("height").get<double>()});
      }
    }
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.rings = j.value("rings", spec.rings);
    spec.points_per_ring = j.value("points_per_ring", spec.points_per_ring);
    spec.min_range = j.value("min_range", spec.min_range);
    spec.max_range = j.value("max_range", spec.max_range);
    spec.seed = j.value("seed", spec.seed);
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("bad field: ") + e.what());
  }
  spec.validate();
  return spec;
}

TerrainSpec load_terrain_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_terrain_spec(text.str());
}

}  // namespace gpseg
