#include "kcosym/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace kcosym {

namespace {

double max_abs(const Mat& m) { return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0; }

void require_constant_metrics(const QuadraticHamiltonian& h, const char* what) {
  if (!h.metrics().constant()) {
    throw std::invalid_argument(std::string(what) + ": q-dependent metrics are not supported");
  }
}

Vec spatial_coordinates(const BaseGrid& grid, std::size_t spatial_node) {
  const Vec t = grid.coordinates(spatial_node);
  return t.tail(grid.k() - 1);
}

double spatial_cfl(const std::vector<Mat>& g, const BaseGrid& grid) {
  if (grid.k() == 1) return 0.0;
  const int n = static_cast<int>(g.front().rows());
  Mat op = Mat::Zero(n, n);
  for (int a = 1; a < grid.k(); ++a) {
    const double h = grid.axis(a).spacing();
    op -= g[static_cast<std::size_t>(a)] * (4.0 / (h * h));
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(op, g.front(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::invalid_argument("leapfrog: g_1 must be positive definite");
  }
  const double lambda = std::max(0.0, es.eigenvalues().maxCoeff());
  return grid.axis(0).spacing() * std::sqrt(lambda) / 2.0;
}

}  // namespace

LeapfrogStepper::LeapfrogStepper(const QuadraticHamiltonian& h, const BaseGrid& grid)
    : potential_(h.potential()), grid_(grid), n_(h.dims().n()) {
  require_constant_metrics(h, "leapfrog");
  if (grid_.k() != h.dims().k()) {
    throw std::invalid_argument("leapfrog: grid has " + std::to_string(grid_.k()) +
                                " axes but the system has k = " + std::to_string(h.dims().k()));
  }
  if (grid_.axis(0).boundary == Boundary::periodic) {
    throw std::invalid_argument("leapfrog: unsupported boundary mix (the evolution axis cannot be periodic)");
  }
  const auto g = h.metrics().metrics(Vec::Zero(n_));
  Eigen::LLT<Mat> llt(g.front());
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("leapfrog: g_1 must be positive definite");
  }
  for (int a = 1; a < grid_.k(); ++a) {
    const Mat& ga = g[static_cast<std::size_t>(a)];
    Eigen::SelfAdjointEigenSolver<Mat> es(ga, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, ga.cwiseAbs().maxCoeff());
    if (es.eigenvalues().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("leapfrog: g_" + std::to_string(a + 1) +
                                  " must be negative semidefinite (hyperbolic configuration)");
    }
    spatial_metrics_.push_back(ga);
  }
  g1_inv_ = dual_metric(g.front());
  dt_ = grid_.axis(0).spacing();
  cfl_ = spatial_cfl(g, grid_);
  if (cfl_ > 1.0) {
    throw std::invalid_argument("leapfrog: CFL condition violated (CFL number " + format_double(cfl_) +
                                " > 1)");
  }
  spatial_nodes_ = grid_.stride(0);
  fixed_.assign(spatial_nodes_, 0);
  for (std::size_t s = 0; s < spatial_nodes_; ++s) {
    for (int a = 1; a < grid_.k(); ++a) {
      if (!grid_.shifted(s, a, 1) || !grid_.shifted(s, a, -1)) fixed_[s] = 1;
    }
  }
}

Mat LeapfrogStepper::acceleration(const Mat& slice, double t) const {
  const auto rows = static_cast<Eigen::Index>(spatial_nodes_);
  Mat rhs = Mat::Zero(rows, n_);
  for (std::size_t s = 0; s < spatial_nodes_; ++s) {
    if (fixed_[s]) continue;
    const auto e = static_cast<Eigen::Index>(s);
    Vec base = grid_.coordinates(s);
    base(0) = t;
    rhs.row(e) = -potential_.dq(base, slice.row(e).transpose()).transpose();
    for (int a = 1; a < grid_.k(); ++a) {
      const double h = grid_.axis(a).spacing();
      const auto f = static_cast<Eigen::Index>(*grid_.shifted(s, a, 1));
      const auto b = static_cast<Eigen::Index>(*grid_.shifted(s, a, -1));
      const Eigen::RowVectorXd d2 = (slice.row(f) - 2.0 * slice.row(e) + slice.row(b)) / (h * h);
      rhs.row(e) -= d2 * spatial_metrics_[static_cast<std::size_t>(a - 1)];
    }
  }
  return rhs * g1_inv_;
}

Mat LeapfrogStepper::step(const Mat& previous, const Mat& current, double t) const {
  Mat next = 2.0 * current - previous + (dt_ * dt_) * acceleration(current, t);
  for (std::size_t s = 0; s < spatial_nodes_; ++s) {
    if (fixed_[s]) next.row(static_cast<Eigen::Index>(s)) = current.row(static_cast<Eigen::Index>(s));
  }
  return next;
}

Mat LeapfrogStepper::first_step(const Mat& psi0, const Mat& velocity0, double t0) const {
  Mat next = psi0 + dt_ * velocity0 + (0.5 * dt_ * dt_) * acceleration(psi0, t0);
  for (std::size_t s = 0; s < spatial_nodes_; ++s) {
    if (fixed_[s]) next.row(static_cast<Eigen::Index>(s)) = psi0.row(static_cast<Eigen::Index>(s));
  }
  return next;
}

Mat LeapfrogStepper::sample_slice(const std::function<Vec(const Vec& x)>& f) const {
  Mat out(static_cast<Eigen::Index>(spatial_nodes_), n_);
  for (std::size_t s = 0; s < spatial_nodes_; ++s) {
    const Vec v = f(spatial_coordinates(grid_, s));
    if (v.size() != n_) throw std::invalid_argument("initial data: wrong number of components");
    out.row(static_cast<Eigen::Index>(s)) = v.transpose();
  }
  return out;
}

double cfl_number(const QuadraticHamiltonian& h, const BaseGrid& grid) {
  require_constant_metrics(h, "cfl_number");
  return spatial_cfl(h.metrics().metrics(Vec::Zero(h.dims().n())), grid);
}

SectionGrid integrate_quadratic(const QuadraticHamiltonian& h, const BaseGrid& grid,
                                const InitialData& initial) {
  if (!initial.displacement || !initial.velocity) {
    throw std::invalid_argument("integrate_quadratic: initial displacement and velocity required");
  }
  const LeapfrogStepper stepper(h, grid);
  const int n = h.dims().n();
  const auto spatial = static_cast<Eigen::Index>(stepper.spatial_nodes());
  const Axis& time = grid.axis(0);

  Mat psi(static_cast<Eigen::Index>(grid.node_count()), n);
  Mat previous = stepper.sample_slice(initial.displacement);
  Mat current = stepper.first_step(previous, stepper.sample_slice(initial.velocity), time.coordinate(0));
  psi.topRows(spatial) = previous;
  psi.middleRows(spatial, spatial) = current;
  for (int i = 2; i < time.nodes; ++i) {
    Mat next = stepper.step(previous, current, time.coordinate(i - 1));
    psi.middleRows(i * spatial, spatial) = next;
    previous = std::move(current);
    current = std::move(next);
  }
  SectionGrid section(grid, std::move(psi), Mat::Zero(static_cast<Eigen::Index>(grid.node_count()), grid.k() * n));
  return momenta_from_section(section, h);
}

double WaveParams::speed() const { return std::sqrt(tau / sigma); }

void WaveParams::validate() const {
  if (!(sigma > 0.0) || !(tau > 0.0)) throw std::invalid_argument("wave: sigma and tau must be positive");
  if (spatial_dims < 1 || spatial_dims > 3) throw std::invalid_argument("wave: spatial_dims must be 1, 2 or 3");
  if (!initial_displacement || !initial_velocity) {
    throw std::invalid_argument("wave: initial displacement and velocity required");
  }
}

SectionGrid integrate_wave(const WaveParams& params, const BaseGrid& grid) {
  params.validate();
  if (grid.k() != params.spatial_dims + 1) {
    throw std::invalid_argument("wave: grid must have spatial_dims + 1 axes");
  }
  const QuadraticHamiltonian h = wave_hamiltonian(params.sigma, params.tau, params.spatial_dims);
  InitialData initial{
      [f = params.initial_displacement](const Vec& x) { return Vec::Constant(1, f(x)); },
      [f = params.initial_velocity](const Vec& x) { return Vec::Constant(1, f(x)); }};
  return integrate_quadratic(h, grid, initial);
}

SectionGrid momenta_from_section(const SectionGrid& section, const QuadraticHamiltonian& h) {
  const BaseGrid& grid = section.grid();
  const int n = section.n();
  if (!(h.dims() == section.dims())) throw std::invalid_argument("momenta_from_section: dimension mismatch");
  SectionGrid out(grid, section.psi(), Mat::Zero(section.psi().rows(), grid.k() * n));
  const bool constant = h.metrics().constant();
  const auto g0 = constant ? h.metrics().metrics(Vec::Zero(n)) : std::vector<Mat>{};
  for (int a = 0; a < grid.k(); ++a) {
    const Mat d = axis_derivative(grid, section.psi(), a);
    if (constant) {
      out.momenta().middleCols(a * n, n) = d * g0[static_cast<std::size_t>(a)];
      continue;
    }
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      const auto g = h.metrics().metrics(section.psi().row(r).transpose());
      out.momenta().block(r, a * n, 1, n) = d.row(r) * g[static_cast<std::size_t>(a)];
    }
  }
  return out;
}

double NodalField::max_abs() const { return kcosym::max_abs(values); }

NodalField divergence(const ConservedCurrent& f, const SectionGrid& section) {
  const BaseGrid& grid = section.grid();
  const int k = grid.k();
  if (f.dims.k() != k) throw std::invalid_argument("divergence: current length differs from k");
  Mat values(static_cast<Eigen::Index>(grid.node_count()), k);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const Vec fv = f(section.point(node));
    if (fv.size() != k) throw std::invalid_argument("divergence: current returned wrong length");
    values.row(static_cast<Eigen::Index>(node)) = fv.transpose();
  }
  NodalField out;
  std::vector<double> acc;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    if (!grid.interior(node)) continue;
    double div = 0.0;
    for (int a = 0; a < k; ++a) {
      const auto fwd = static_cast<Eigen::Index>(*grid.shifted(node, a, 1));
      const auto bwd = static_cast<Eigen::Index>(*grid.shifted(node, a, -1));
      div += (values(fwd, a) - values(bwd, a)) / (2.0 * grid.axis(a).spacing());
    }
    out.nodes.push_back(node);
    acc.push_back(div);
  }
  out.values = Eigen::Map<Mat>(acc.data(), static_cast<Eigen::Index>(acc.size()), 1);
  return out;
}

NodalField field_equation_residual(const QuadraticHamiltonian& h, const SectionGrid& section) {
  require_constant_metrics(h, "field_equation_residual");
  const BaseGrid& grid = section.grid();
  const int n = section.n();
  const auto g = h.metrics().metrics(Vec::Zero(n));
  const Mat& psi = section.psi();
  NodalField out;
  std::vector<Eigen::RowVectorXd> rows;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    if (grid.boundary_distance(node) < 2) continue;
    const auto e = static_cast<Eigen::Index>(node);
    Eigen::RowVectorXd r =
        h.potential().dq(grid.coordinates(node), psi.row(e).transpose()).transpose();
    for (int a = 0; a < grid.k(); ++a) {
      const double hh = grid.axis(a).spacing();
      const auto f = static_cast<Eigen::Index>(*grid.shifted(node, a, 2));
      const auto b = static_cast<Eigen::Index>(*grid.shifted(node, a, -2));
      const Eigen::RowVectorXd d2 = (psi.row(f) - 2.0 * psi.row(e) + psi.row(b)) / (4.0 * hh * hh);
      r += d2 * g[static_cast<std::size_t>(a)];
    }
    out.nodes.push_back(node);
    rows.push_back(std::move(r));
  }
  out.values.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = rows[i];
  return out;
}

double SectionResidual::max_abs() const {
  return std::max(kcosym::max_abs(q_equation), kcosym::max_abs(p_equation));
}

SectionResidual hdw_residual_on_section(const Hamiltonian& h, const SectionGrid& section) {
  const BaseGrid& grid = section.grid();
  const Dimensions d = section.dims();
  if (!(h.dims() == d)) throw std::invalid_argument("hdw_residual_on_section: dimension mismatch");
  std::vector<Mat> dpsi;
  std::vector<Mat> dmom;
  for (int a = 0; a < d.k(); ++a) {
    dpsi.push_back(axis_derivative(grid, section.psi(), a));
    dmom.push_back(axis_derivative(grid, section.momenta(), a));
  }
  const auto nodes = static_cast<Eigen::Index>(grid.node_count());
  SectionResidual r{Vec::Zero(nodes), Vec::Zero(nodes)};
  for (Eigen::Index e = 0; e < nodes; ++e) {
    const Covector dh = h.gradient(section.point(static_cast<std::size_t>(e)));
    Vec trace = dh.aq;
    for (int a = 0; a < d.k(); ++a) {
      trace += dmom[static_cast<std::size_t>(a)].block(e, a * d.n(), 1, d.n()).transpose();
      const double p_defect =
          (dh.ap.row(a) - dpsi[static_cast<std::size_t>(a)].row(e)).cwiseAbs().maxCoeff();
      r.p_equation(e) = std::max(r.p_equation(e), p_defect);
    }
    r.q_equation(e) = trace.cwiseAbs().maxCoeff();
  }
  return r;
}

SectionGrid sample_section(const BaseGrid& grid, int n, const std::function<Vec(const Vec& t)>& psi,
                           const std::function<Mat(const Vec& t)>& momenta) {
  SectionGrid out(grid, n);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto e = static_cast<Eigen::Index>(node);
    const Vec t = grid.coordinates(node);
    out.psi().row(e) = psi(t).transpose();
    const Mat p = momenta(t);
    for (int a = 0; a < grid.k(); ++a) out.momenta().block(e, a * n, 1, n) = p.row(a);
  }
  return out;
}

WaveProfile plane_wave_profile(double speed, double amplitude, double wavenumber) {
  WaveProfile p;
  p.name = "plane_wave";
  p.displacement = [=](const Vec& x) { return amplitude * std::sin(wavenumber * x(0)); };
  p.velocity = [=](const Vec& x) { return -amplitude * speed * wavenumber * std::cos(wavenumber * x(0)); };
  p.exact = [=](double t, const Vec& x) { return amplitude * std::sin(wavenumber * (x(0) - speed * t)); };
  return p;
}

WaveProfile standing_wave_profile(double speed, double amplitude, double wavenumber) {
  WaveProfile p;
  p.name = "standing_wave";
  p.displacement = [=](const Vec& x) { return amplitude * std::sin(wavenumber * x(0)); };
  p.velocity = [](const Vec&) { return 0.0; };
  p.exact = [=](double t, const Vec& x) {
    return amplitude * std::sin(wavenumber * x(0)) * std::cos(speed * wavenumber * t);
  };
  return p;
}

WaveProfile gaussian_profile(const Vec& center, double width, double amplitude) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_profile: width must be positive");
  WaveProfile p;
  p.name = "gaussian";
  p.displacement = [=](const Vec& x) {
    return amplitude * std::exp(-(x - center).squaredNorm() / (2.0 * width * width));
  };
  p.velocity = [](const Vec&) { return 0.0; };
  return p;
}

double max_error(const SectionGrid& section, const std::function<double(double t, const Vec& x)>& exact) {
  const BaseGrid& grid = section.grid();
  double worst = 0.0;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const Vec t = grid.coordinates(node);
    const double e = std::abs(section.psi()(static_cast<Eigen::Index>(node), 0) - exact(t(0), t.tail(grid.k() - 1)));
    worst = std::max(worst, e);
  }
  return worst;
}

}  // namespace kcosym
