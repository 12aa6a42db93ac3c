#pragma once

// Central finite differences with a per-axis step h_j = base * (1 + |x_j|).

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace kcosym {

/// cbrt(machine epsilon): balances O(h^2) truncation against O(eps/h) rounding.
inline double default_fd_step() { return std::cbrt(std::numeric_limits<double>::epsilon()); }

inline double fd_axis_step(double base, double coordinate) {
  return base * (1.0 + std::abs(coordinate));
}

/// Gradient of a scalar function.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double base_step);

/// Jacobian J(r, c) = d f_r / d x_c.
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double base_step);

}  // namespace kcosym
