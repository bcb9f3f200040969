#include "cqr/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cqr/errors.hpp"

namespace cqr {

GradCheckReport grad_check(const std::function<double(const ParamBlock&)>& f, ParamBlock& params,
                           std::span<const double> analytic, double h, double tol,
                           double denom_floor) {
  if (analytic.size() != params.size()) {
    throw ShapeError("grad_check: analytic gradient has " + std::to_string(analytic.size()) +
                     " entries, parameters have " + std::to_string(params.size()));
  }
  if (h <= 0.0) throw ConfigError("grad_check: h must be positive");

  GradCheckReport report;
  auto flat = params.flat();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + h;
    const double f_plus = f(params);
    flat[i] = saved - h;
    const double f_minus = f(params);
    flat[i] = saved;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      throw Error("grad_check: f is non-finite at coordinate " + std::to_string(i));
    }
    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double denom = std::max(std::abs(analytic[i]) + std::abs(numeric), denom_floor);
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_coord = i;
      report.analytic_at_worst = analytic[i];
      report.numeric_at_worst = numeric;
    }
  }
  report.pass = report.max_rel_err <= tol;
  return report;
}

}  // namespace cqr
