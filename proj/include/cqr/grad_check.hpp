#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "cqr/param_block.hpp"

namespace cqr {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_coord = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  bool pass = false;
};

// Central-difference check of an analytic gradient. For every coordinate i,
// the numeric derivative (f(p + h e_i) - f(p - h e_i)) / 2h is compared with
// analytic[i] using
//   rel_err = |analytic - numeric| / max(|analytic| + |numeric|, denom_floor)
// The floor keeps finite-difference noise on near-zero coordinates from
// registering as error. Parameters are perturbed in place and restored.
// Throws Error when f evaluates to a non-finite value, naming the coordinate.
GradCheckReport grad_check(const std::function<double(const ParamBlock&)>& f, ParamBlock& params,
                           std::span<const double> analytic, double h = 1e-5, double tol = 1e-4,
                           double denom_floor = 1e-6);

}  // namespace cqr
