#include "cqr/vec.hpp"

#include <cmath>

namespace cqr {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

bool all_finite(CVecRef x) {
  for (int i = 0; i < x.n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

void require_shape(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

}  // namespace cqr
