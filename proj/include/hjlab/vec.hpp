#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace hjlab {

// Points, momenta and velocities live in R^n with n in {1, 2}. The fixed
// maximum size keeps these on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2, 2>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

inline bool all_finite(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

inline Vec make_vec(double a) {
  Vec v(1);
  v[0] = a;
  return v;
}

inline Vec make_vec(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Smallest eigenvalue of a symmetric 1x1 or 2x2 matrix.
inline double min_eigenvalue(const Mat& m) {
  if (m.rows() == 1) return m(0, 0);
  const double tr = m(0, 0) + m(1, 1);
  const double diff = m(0, 0) - m(1, 1);
  const double disc = std::sqrt(diff * diff + 4.0 * m(0, 1) * m(1, 0));
  return 0.5 * (tr - disc);
}

// Max column sum of absolute values.
inline double norm1(const Mat& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace hjlab
