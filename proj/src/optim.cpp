#include "cqr/optim.hpp"

#include <cmath>
#include <string>

#include "cqr/errors.hpp"

namespace cqr {

AdamState AdamState::create(std::size_t n_params, double lr) {
  AdamState state;
  state.m.assign(n_params, 0.0);
  state.v.assign(n_params, 0.0);
  state.lr = lr;
  return state;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw ShapeError("adam_step: parameter count " + std::to_string(params.size()) +
                     " does not match gradients (" + std::to_string(grads.size()) +
                     ") or state (" + std::to_string(state.m.size()) + ")");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) {
    throw ShapeError("sgd_step: parameter count " + std::to_string(params.size()) +
                     " != gradient count " + std::to_string(grads.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

}  // namespace cqr
