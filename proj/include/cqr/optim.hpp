#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cqr {

// First/second moment estimates plus the bias-correction step counter.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lr = 1e-4;

  static AdamState create(std::size_t n_params, double lr);
};

// Bias-corrected Adam update; increments state.t by one.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

// params -= lr * grads
void sgd_step(std::span<double> params, std::span<const double> grads, double lr);

}  // namespace cqr
