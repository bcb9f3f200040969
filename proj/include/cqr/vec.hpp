#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "cqr/errors.hpp"

namespace cqr {

struct Vector {
  std::vector<double> v;

  Vector() = default;
  explicit Vector(int n, double fill = 0.0) : v(static_cast<std::size_t>(n), fill) {}
  Vector(std::initializer_list<double> init) : v(init) {}

  int size() const { return static_cast<int>(v.size()); }
  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
};

// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

  static Matrix identity(int n);
};

// Non-owning views. Math routines take views so that both owning types and
// ParamBlock slots flow through the same code.
struct VecRef {
  double* p = nullptr;
  int n = 0;

  VecRef() = default;
  VecRef(double* ptr, int len) : p(ptr), n(len) {}
  VecRef(Vector& x) : p(x.data()), n(x.size()) {}

  double& operator[](int i) const { return p[i]; }
};

struct CVecRef {
  const double* p = nullptr;
  int n = 0;

  CVecRef() = default;
  CVecRef(const double* ptr, int len) : p(ptr), n(len) {}
  CVecRef(const Vector& x) : p(x.data()), n(x.size()) {}
  CVecRef(VecRef x) : p(x.p), n(x.n) {}

  double operator[](int i) const { return p[i]; }
};

struct MatRef {
  double* p = nullptr;
  int rows = 0;
  int cols = 0;

  MatRef() = default;
  MatRef(double* ptr, int r, int c) : p(ptr), rows(r), cols(c) {}
  MatRef(Matrix& m) : p(m.v.data()), rows(m.rows), cols(m.cols) {}

  double& at(int r, int c) const { return p[static_cast<std::size_t>(r) * cols + c]; }
};

struct CMatRef {
  const double* p = nullptr;
  int rows = 0;
  int cols = 0;

  CMatRef() = default;
  CMatRef(const double* ptr, int r, int c) : p(ptr), rows(r), cols(c) {}
  CMatRef(const Matrix& m) : p(m.v.data()), rows(m.rows), cols(m.cols) {}
  CMatRef(MatRef m) : p(m.p), rows(m.rows), cols(m.cols) {}

  double at(int r, int c) const { return p[static_cast<std::size_t>(r) * cols + c]; }
};

bool all_finite(CVecRef x);

// Throws ShapeError with the given message when ok is false.
void require_shape(bool ok, const std::string& message);

}  // namespace cqr
