#include "kcosym/numdiff.hpp"

namespace kcosym {

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double base_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = fd_axis_step(base_step, x(j));
    y(j) = x(j) + h;
    const double fp = f(y);
    y(j) = x(j) - h;
    const double fm = f(y);
    y(j) = x(j);
    g(j) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double base_step) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd y = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = fd_axis_step(base_step, x(j));
    y(j) = x(j) + h;
    const Eigen::VectorXd fp = f(y);
    y(j) = x(j) - h;
    const Eigen::VectorXd fm = f(y);
    y(j) = x(j);
    if (j == 0) jac.resize(fp.size(), x.size());
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

}  // namespace kcosym
