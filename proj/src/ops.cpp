#include "cqr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cqr {

void affine_forward(CVecRef x, CMatRef W, CVecRef b, VecRef out) {
  require_shape(W.cols == x.n, "affine_forward: W.cols (" + std::to_string(W.cols) +
                                   ") != x.length (" + std::to_string(x.n) + ")");
  require_shape(b.n == W.rows, "affine_forward: b.length (" + std::to_string(b.n) +
                                   ") != W.rows (" + std::to_string(W.rows) + ")");
  require_shape(out.n == W.rows, "affine_forward: out.length (" + std::to_string(out.n) +
                                     ") != W.rows (" + std::to_string(W.rows) + ")");
  for (int r = 0; r < W.rows; ++r) {
    double acc = b[r];
    const double* row = W.p + static_cast<std::size_t>(r) * W.cols;
    for (int c = 0; c < W.cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

Vector affine_forward(const Vector& x, const Matrix& W, const Vector& b) {
  Vector out(W.rows);
  affine_forward(x, W, b, out);
  return out;
}

void affine_backward(CVecRef x, CMatRef W, CVecRef grad_out, VecRef grad_x, MatRef grad_W,
                     VecRef grad_b) {
  require_shape(W.cols == x.n, "affine_backward: W.cols (" + std::to_string(W.cols) +
                                   ") != x.length (" + std::to_string(x.n) + ")");
  require_shape(grad_out.n == W.rows, "affine_backward: grad_out.length (" +
                                          std::to_string(grad_out.n) + ") != W.rows (" +
                                          std::to_string(W.rows) + ")");
  require_shape(grad_x.n == W.cols && grad_W.rows == W.rows && grad_W.cols == W.cols &&
                    grad_b.n == W.rows,
                "affine_backward: gradient buffers do not match operand shapes");
  for (int c = 0; c < W.cols; ++c) grad_x[c] = 0.0;
  for (int r = 0; r < W.rows; ++r) {
    const double g = grad_out[r];
    grad_b[r] += g;
    const double* row = W.p + static_cast<std::size_t>(r) * W.cols;
    double* grow = grad_W.p + static_cast<std::size_t>(r) * W.cols;
    for (int c = 0; c < W.cols; ++c) {
      grow[c] += g * x[c];
      grad_x[c] += row[c] * g;
    }
  }
}

void relu_forward(CVecRef x, VecRef out) {
  for (int i = 0; i < x.n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(CVecRef x, CVecRef grad_out, VecRef grad_x) {
  for (int i = 0; i < x.n; ++i) grad_x[i] = x[i] > 0.0 ? grad_out[i] : 0.0;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void sigmoid_forward(CVecRef x, VecRef out) {
  for (int i = 0; i < x.n; ++i) out[i] = sigmoid(x[i]);
}

void sigmoid_backward(CVecRef y, CVecRef grad_out, VecRef grad_x) {
  for (int i = 0; i < y.n; ++i) grad_x[i] = grad_out[i] * y[i] * (1.0 - y[i]);
}

void softmax_forward(CVecRef x, VecRef out) {
  require_shape(x.n >= 1, "softmax_forward: input must have length >= 1");
  double mx = x[0];
  for (int i = 1; i < x.n; ++i) mx = std::max(mx, x[i]);
  double sum = 0.0;
  for (int i = 0; i < x.n; ++i) {
    out[i] = std::exp(x[i] - mx);
    sum += out[i];
  }
  for (int i = 0; i < x.n; ++i) out[i] /= sum;
}

void softmax_backward(CVecRef y, CVecRef grad_out, VecRef grad_x) {
  double dot = 0.0;
  for (int i = 0; i < y.n; ++i) dot += grad_out[i] * y[i];
  for (int i = 0; i < y.n; ++i) grad_x[i] = y[i] * (grad_out[i] - dot);
}

Vector relu(const Vector& x) {
  Vector out(x.size());
  relu_forward(x, out);
  return out;
}

Vector sigmoid(const Vector& x) {
  Vector out(x.size());
  sigmoid_forward(x, out);
  return out;
}

Vector softmax(const Vector& x) {
  Vector out(x.size());
  softmax_forward(x, out);
  return out;
}

}  // namespace cqr
