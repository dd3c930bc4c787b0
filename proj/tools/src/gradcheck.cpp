#include "gpseg_cli/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gpseg/errors.hpp"
#include "gpseg/io.hpp"

namespace gpseg::cli {

RandomSegment random_segment(std::mt19937_64& rng, std::size_t max_candidates, std::size_t max_support) {
  if (max_candidates < 4 || max_support < 1) {
    throw Error(ErrorCode::PreconditionViolation, "gradcheck needs max_candidates >= 4 and max_support >= 1");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_n(4, max_candidates);
  std::uniform_int_distribution<std::size_t> pick_m(1, max_support);
  const auto n = static_cast<Eigen::Index>(pick_n(rng));
  const auto m = static_cast<Eigen::Index>(pick_m(rng));

  RandomSegment seg;
  auto& d = seg.data;
  d.r.resize(n);
  d.z.resize(n);
  double r = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    r += 0.5 + 2.0 * unit(rng);
    d.r[i] = r;
    d.z[i] = 0.3 * std::sin(r / 3.0) + 0.05 * (unit(rng) - 0.5);
  }
  d.support_r.resize(m);
  double s = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    s += 1.0 + 3.0 * unit(rng);
    d.support_r[i] = s;
  }

  auto& th = seg.theta;
  th.log_sigma_f = std::log(0.2 + unit(rng));
  th.log_sigma_n = std::log(0.02 + 0.1 * unit(rng));
  th.log_sigma_f_bar = std::log(0.5 + unit(rng));
  th.log_sigma_l_bar = std::log(2.0 + 5.0 * unit(rng));
  th.log_sigma_n_bar = std::log(0.1 + 0.3 * unit(rng));
  th.l_bar.resize(m);
  // Length-scales well inside [0.5, 50] so the clamp never engages and the objective is smooth.
  for (Eigen::Index i = 0; i < m; ++i) th.l_bar[i] = std::log(1.5 + 8.0 * unit(rng));
  return seg;
}

double relative_error(double analytic, double numeric) noexcept {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

std::string coordinate_name(std::size_t index) {
  static const char* scalars[] = {"log_sigma_f", "log_sigma_n", "log_sigma_f_bar", "log_sigma_l_bar",
                                  "log_sigma_n_bar"};
  if (index < static_cast<std::size_t>(Theta::kScalarCount)) return scalars[index];
  return "l_bar[" + std::to_string(index - Theta::kScalarCount) + "]";
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  if (!(options.step > 0.0)) throw Error(ErrorCode::PreconditionViolation, "step must be positive");
  std::mt19937_64 rng(options.seed);
  GradcheckReport report;
  for (std::size_t t = 0; t < options.trials; ++t) {
    const auto seg = random_segment(rng, options.max_candidates, options.max_support);
    Eigen::VectorXd analytic = gradient(seg.theta, seg.data);
    if (options.corrupt) analytic[1] *= 1.01;
    const Eigen::VectorXd numeric = fd_gradient(seg.theta, seg.data, options.step);
    for (Eigen::Index k = 0; k < analytic.size(); ++k) {
      GradcheckRow row;
      row.trial = t;
      row.coordinate = static_cast<std::size_t>(k);
      row.name = coordinate_name(row.coordinate);
      row.analytic = analytic[k];
      row.numeric = numeric[k];
      row.relative_error = relative_error(analytic[k], numeric[k]);
      report.worst = std::max(report.worst, row.relative_error);
      report.rows.push_back(std::move(row));
    }
  }
  report.passed = report.worst < options.tolerance;
  return report;
}

void write_gradcheck_csv(std::ostream& out, const GradcheckReport& report) {
  out << "trial,coordinate,name,analytic,numeric,relative_error\n";
  for (const auto& row : report.rows) {
    out << row.trial << ',' << row.coordinate << ',' << row.name << ',' << detail::format_double(row.analytic) << ','
        << detail::format_double(row.numeric) << ',' << detail::format_double(row.relative_error) << '\n';
  }
}

}  // namespace gpseg::cli
