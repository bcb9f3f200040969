#pragma once

#include "cqr/vec.hpp"

namespace cqr {

// out = W x + b
void affine_forward(CVecRef x, CMatRef W, CVecRef b, VecRef out);
Vector affine_forward(const Vector& x, const Matrix& W, const Vector& b);

// grad_x is overwritten; grad_W and grad_b accumulate so a batch can sum
// parameter gradients in place.
//   grad_W += grad_out (outer) x,  grad_b += grad_out,  grad_x = W^T grad_out
void affine_backward(CVecRef x, CMatRef W, CVecRef grad_out, VecRef grad_x, MatRef grad_W,
                     VecRef grad_b);

void relu_forward(CVecRef x, VecRef out);
// x is the forward input
void relu_backward(CVecRef x, CVecRef grad_out, VecRef grad_x);

double sigmoid(double x);
void sigmoid_forward(CVecRef x, VecRef out);
// y is the forward output
void sigmoid_backward(CVecRef y, CVecRef grad_out, VecRef grad_x);

// Max-subtracted softmax.
void softmax_forward(CVecRef x, VecRef out);
// y is the forward output
void softmax_backward(CVecRef y, CVecRef grad_out, VecRef grad_x);

Vector relu(const Vector& x);
Vector sigmoid(const Vector& x);
Vector softmax(const Vector& x);

}  // namespace cqr
