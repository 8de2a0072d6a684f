#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pspin/errors.hpp"

namespace pspin {

/// Lower-triangular field on a uniform time mesh: values f(s_i, t_j) for
/// 0 <= j <= i <= n with s_i = i * delta. Row-major flat storage.
class TriangularField {
 public:
  TriangularField() = default;
  TriangularField(int n, double delta, double fill = 0.0)
      : n_(n), delta_(delta), v_(static_cast<std::size_t>(n + 1) * (n + 2) / 2, fill) {
    require(n >= 0, errc::invalid_argument, "triangular field: n must be >= 0");
    require(delta > 0.0, errc::invalid_argument, "triangular field: delta must be positive");
  }

  int n() const noexcept { return n_; }                 // last row index
  double delta() const noexcept { return delta_; }
  double horizon() const noexcept { return n_ * delta_; }

  static std::size_t row_offset(int i) noexcept {
    return static_cast<std::size_t>(i) * (i + 1) / 2;
  }

  double at(int i, int j) const noexcept { return v_[row_offset(i) + j]; }
  double& at(int i, int j) noexcept { return v_[row_offset(i) + j]; }

  /// Symmetric read: f(i,j) = f(j,i); the triangle is stored once.
  double sym(int i, int j) const noexcept { return i >= j ? at(i, j) : at(j, i); }

  const double* row(int i) const noexcept { return v_.data() + row_offset(i); }
  double* row(int i) noexcept { return v_.data() + row_offset(i); }

  const std::vector<double>& data() const noexcept { return v_; }
  std::vector<double>& data() noexcept { return v_; }

 private:
  int n_ = 0;
  double delta_ = 1.0;
  std::vector<double> v_;
};

/// Trapezoid weight helper: integral over mesh indices [j0, j1] of samples f.
inline double trapezoid(const double* f, int j0, int j1, double delta) noexcept {
  if (j1 <= j0) return 0.0;
  double s = 0.5 * (f[j0] + f[j1]);
  for (int j = j0 + 1; j < j1; ++j) s += f[j];
  return s * delta;
}

}  // namespace pspin
