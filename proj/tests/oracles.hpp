#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library beyond its plain data types.

#include <cmath>
#include <functional>
#include <random>

#include "kcosym/chart.hpp"

namespace oracle {

using kcosym::ChartPoint;
using kcosym::Dimensions;
using kcosym::Mat;
using kcosym::TangentVector;
using kcosym::Vec;

inline int closed_form_nullity(int k, int n) { return (k - 1) * (k * n + n); }

/// omega^A(v, w) = sum_i (v^i w^A_i - w^i v^A_i), written out by hand.
inline double omega(int a, const TangentVector& v, const TangentVector& w) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.vq.size(); ++i) s += v.vq(i) * w.vp(a, i) - w.vq(i) * v.vp(a, i);
  return s;
}

/// d'Alembert solution for sin initial data travelling right at speed c.
inline double plane_wave(double t, double x, double c, double kappa = 1.0) {
  return std::sin(kappa * (x - c * t));
}

inline double standing_wave(double t, double x, double c) { return std::sin(x) * std::cos(c * t); }

/// Plain central difference with a fixed step.
inline double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline Vec random_vector(std::mt19937_64& rng, Eigen::Index size, double half_width = 1.0) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Vec v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = u(rng);
  return v;
}

inline ChartPoint random_point(std::mt19937_64& rng, const Dimensions& d, double half_width = 2.0) {
  return ChartPoint::from_flat(d, random_vector(rng, d.phase(), half_width));
}

inline TangentVector random_tangent(std::mt19937_64& rng, const Dimensions& d) {
  return TangentVector::from_flat(d, random_vector(rng, d.phase()));
}

/// Symmetric positive definite with eigenvalues in [1, 3].
inline Mat random_spd(std::mt19937_64& rng, int n) {
  const Mat a = Mat::NullaryExpr(n, n, [&] { return std::uniform_real_distribution<double>(-1, 1)(rng); });
  const Eigen::HouseholderQR<Mat> qr(a);
  const Mat q = qr.householderQ();
  const Vec eig = (random_vector(rng, n).array() + 2.0).matrix();
  return q * eig.asDiagonal() * q.transpose();
}

}  // namespace oracle
