#include "kcosym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace kcosym {

namespace {

double max_abs(const Mat& m) { return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const Vec& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

// --- base fields -------------------------------------------------------------

BaseVectorField::BaseVectorField(Dimensions dims, ComponentFn zt, ComponentFn zq,
                                 std::optional<DerivativeFn> derivatives, double fd_step)
    : dims_(dims),
      zt_(std::move(zt)),
      zq_(std::move(zq)),
      derivatives_(std::move(derivatives)),
      fd_step_(fd_step) {
  if (!zt_ || !zq_) throw std::invalid_argument("BaseVectorField: component functions required");
  if (!(fd_step_ > 0.0)) throw std::invalid_argument("BaseVectorField: fd_step must be positive");
}

BaseVectorField BaseVectorField::on_configuration(int k, int n, std::function<Vec(const Vec& q)> xq,
                                                  std::optional<std::function<Mat(const Vec& q)>> jacobian,
                                                  double fd_step) {
  if (!xq) throw std::invalid_argument("BaseVectorField::on_configuration: component function required");
  const Dimensions dims(k, n);
  std::function<Mat(const Vec&)> jac;
  if (jacobian) {
    jac = *jacobian;
  } else {
    jac = [xq, fd_step](const Vec& q) { return fd_jacobian(xq, q, fd_step); };
  }
  auto derivs = [k, n, jac](const Vec&, const Vec& q) {
    return BaseFieldDerivatives{Mat::Zero(k, k), Mat::Zero(k, n), Mat::Zero(n, k), jac(q)};
  };
  BaseVectorField f(
      dims, [k](const Vec&, const Vec&) { return Vec::Zero(k).eval(); },
      [xq](const Vec&, const Vec& q) { return xq(q); }, DerivativeFn(derivs), fd_step);
  f.has_base_components_ = false;
  return f;
}

BaseVectorField BaseVectorField::translation(int k, const Vec& direction) {
  const auto n = static_cast<int>(direction.size());
  return on_configuration(
      k, n, [direction](const Vec&) { return direction; },
      std::function<Mat(const Vec&)>([n](const Vec&) { return Mat::Zero(n, n).eval(); }));
}

BaseVectorField BaseVectorField::linear(int k, const Mat& generator) {
  if (generator.rows() != generator.cols()) {
    throw std::invalid_argument("BaseVectorField::linear: generator must be square");
  }
  const auto n = static_cast<int>(generator.rows());
  return on_configuration(
      k, n, [generator](const Vec& q) { return (generator * q).eval(); },
      std::function<Mat(const Vec&)>([generator](const Vec&) { return generator; }));
}

BaseVectorField BaseVectorField::zero(Dimensions dims) {
  return translation(dims.k(), Vec::Zero(dims.n()));
}

BaseFieldDerivatives BaseVectorField::derivatives(const Vec& t, const Vec& q) const {
  if (derivatives_) return (*derivatives_)(t, q);
  const auto zt_of_t = [&](const Vec& s) { return zt_(s, q); };
  const auto zt_of_q = [&](const Vec& s) { return zt_(t, s); };
  const auto zq_of_t = [&](const Vec& s) { return zq_(s, q); };
  const auto zq_of_q = [&](const Vec& s) { return zq_(t, s); };
  return {fd_jacobian(zt_of_t, t, fd_step_), fd_jacobian(zt_of_q, q, fd_step_),
          fd_jacobian(zq_of_t, t, fd_step_), fd_jacobian(zq_of_q, q, fd_step_)};
}

// --- phase fields ------------------------------------------------------------

PhaseVectorField::PhaseVectorField(Dimensions dims, EvalFn eval, std::optional<JacobianFn> jacobian,
                                   double fd_step)
    : dims_(dims), eval_(std::move(eval)), jacobian_(std::move(jacobian)), fd_step_(fd_step) {
  if (!eval_) throw std::invalid_argument("PhaseVectorField: eval function required");
  if (!(fd_step_ > 0.0)) throw std::invalid_argument("PhaseVectorField: fd_step must be positive");
}

PhaseVectorField PhaseVectorField::constant(const TangentVector& v) {
  const Dimensions d = v.dims();
  return PhaseVectorField(
      d, [v](const ChartPoint&) { return v; },
      JacobianFn([n = d.phase()](const ChartPoint&) { return Mat::Zero(n, n).eval(); }));
}

PhaseVectorField PhaseVectorField::component(const HamiltonianKVectorField& x_field, int a) {
  const Dimensions d = x_field.source().dims();
  if (a < 0 || a >= d.k()) throw std::out_of_range("PhaseVectorField::component: index outside [0, k)");
  return PhaseVectorField(d, [x_field, a](const ChartPoint& x) {
    return x_field(x)[static_cast<std::size_t>(a)];
  });
}

Mat PhaseVectorField::jacobian(const ChartPoint& x) const {
  if (jacobian_) return (*jacobian_)(x);
  const Dimensions d = dims_;
  const auto f = [&](const Vec& flat) { return eval_(ChartPoint::from_flat(d, flat)).flat(); };
  return fd_jacobian(f, x.flat(), fd_step_);
}

// --- complete lift -----------------------------------------------------------

namespace {

// Momentum components of Z^{1*}:
//   dZ^A/dq^i + p^B_i dZ^A/dt^B - p^A_j (dZ^j/dq^i + p^B_i dZ^j/dt^B)
Mat lift_momenta(const BaseFieldDerivatives& dz, const Mat& p) {
  return dz.zt_q + dz.zt_t * p - p * dz.zq_q - p * dz.zq_t * p;
}

}  // namespace

PhaseVectorField complete_lift(const BaseVectorField& z) {
  const Dimensions d = z.dims();
  auto eval = [z](const ChartPoint& x) {
    const BaseFieldDerivatives dz = z.derivatives(x.t, x.q);
    return TangentVector{z.zt(x.t, x.q), z.zq(x.t, x.q), lift_momenta(dz, x.p)};
  };

  auto jacobian = [z, d](const ChartPoint& x) {
    const int k = d.k();
    const int n = d.n();
    const int base = k + n;
    Mat jac = Mat::Zero(d.phase(), d.phase());
    const BaseFieldDerivatives dz = z.derivatives(x.t, x.q);
    // Base rows depend on (t, q) only.
    jac.block(0, 0, k, k) = dz.zt_t;
    jac.block(0, k, k, n) = dz.zt_q;
    jac.block(k, 0, n, k) = dz.zq_t;
    jac.block(k, k, n, n) = dz.zq_q;

    // Momentum rows w.r.t. (t, q): second derivatives of Z, by differencing
    // the first-derivative data at fixed p.
    Vec tq(base);
    tq << x.t, x.q;
    const auto momenta_of = [&](const Vec& s) {
      const Mat m = lift_momenta(z.derivatives(s.head(k), s.tail(n)), x.p);
      Vec out(k * n);
      for (int a = 0; a < k; ++a) out.segment(a * n, n) = m.row(a).transpose();
      return out;
    };
    jac.block(base, 0, k * n, base) = fd_jacobian(momenta_of, tq, z.fd_step());

    // Momentum rows w.r.t. p: exact.
    const Mat zq_t_p = dz.zq_t * x.p;  // n x n
    const Mat p_zq_t = x.p * dz.zq_t;  // k x k
    for (int a = 0; a < k; ++a) {
      for (int i = 0; i < n; ++i) {
        const int row = d.p_offset(a, i);
        for (int c = 0; c < k; ++c) {
          for (int m = 0; m < n; ++m) {
            double v = 0.0;
            if (i == m) v += dz.zt_t(a, c) - p_zq_t(a, c);
            if (a == c) v -= dz.zq_q(m, i) + zq_t_p(m, i);
            jac(row, d.p_offset(c, m)) = v;
          }
        }
      }
    }
    return jac;
  };

  return PhaseVectorField(d, std::move(eval), PhaseVectorField::JacobianFn(std::move(jacobian)),
                          z.fd_step());
}

// --- prolongation ------------------------------------------------------------

BundleMap BundleMap::identity(Dimensions dims) {
  const int n = dims.n();
  return affine_fiber(dims.k(), Mat::Identity(n, n), Vec::Zero(n));
}

BundleMap BundleMap::affine_fiber(int k, const Mat& r, const Vec& c) {
  const auto n = static_cast<int>(r.rows());
  if (r.cols() != n || c.size() != n) throw std::invalid_argument("BundleMap::affine_fiber: shape mismatch");
  Eigen::FullPivLU<Mat> lu(r);
  if (!lu.isInvertible()) throw std::invalid_argument("BundleMap::affine_fiber: singular linear part");
  const Mat r_inv = lu.inverse();
  BundleMap m;
  m.base = [](const Vec& t, const Vec&) { return t; };
  m.base_dt = [k](const Vec&, const Vec&) { return Mat::Identity(k, k).eval(); };
  m.base_dq = [k, n](const Vec&, const Vec&) { return Mat::Zero(k, n).eval(); };
  m.fiber = [r, c](const Vec& q) { return (r * q + c).eval(); };
  m.fiber_inverse_jacobian = [r_inv](const Vec&) { return r_inv; };
  m.fiber_jacobian = [r](const Vec&) { return r; };
  return m;
}

ChartPoint canonical_prolongation(const BundleMap& phi, const ChartPoint& x) {
  if (!phi.base || !phi.base_dt || !phi.base_dq || !phi.fiber) {
    throw std::invalid_argument("canonical_prolongation: incomplete bundle map");
  }
  Mat j_inv;
  if (phi.fiber_inverse_jacobian) {
    j_inv = phi.fiber_inverse_jacobian(x.q);
  } else if (phi.fiber_jacobian) {
    Eigen::FullPivLU<Mat> lu(phi.fiber_jacobian(x.q));
    if (!lu.isInvertible()) throw std::invalid_argument("canonical_prolongation: singular fiber Jacobian");
    j_inv = lu.inverse();
  } else {
    throw std::invalid_argument("canonical_prolongation: fiber Jacobian data required");
  }
  if (!j_inv.allFinite()) throw std::invalid_argument("canonical_prolongation: singular fiber Jacobian");
  ChartPoint out;
  out.t = phi.base(x.t, x.q);
  out.q = phi.fiber(x.q);
  out.p = (phi.base_dq(x.t, x.q) + phi.base_dt(x.t, x.q) * x.p) * j_inv;
  return out;
}

// --- Lie derivatives ---------------------------------------------------------

double lie_derivative_scalar(const PhaseVectorField& y, const std::function<double(const ChartPoint&)>& f,
                             const ChartPoint& x) {
  const TangentVector v = y(x);
  const Vec xf = x.flat();
  const double scale = 1.0 + (xf.size() > 0 ? xf.cwiseAbs().maxCoeff() : 0.0);
  const double vnorm = max_abs(v.flat());
  if (vnorm == 0.0) return 0.0;
  const double s = y.fd_step() * scale / vnorm;
  return (f(displace(x, v, s)) - f(displace(x, v, -s))) / (2.0 * s);
}

double lie_derivative_scalar(const PhaseVectorField& y, const Hamiltonian& h, const ChartPoint& x) {
  return h.gradient(x)(y(x));
}

namespace {

Mat omega_derivative_from_jacobian(const Dimensions& d, int a, const Mat& jac) {
  const Mat oj = omega_matrix(d, a) * jac;
  return oj.transpose() - oj;
}

Covector theta_derivative_from_jacobian(const Dimensions& d, int a, const ChartPoint& x,
                                        const TangentVector& yx, const Mat& jac) {
  // d(p^A_i Y^i) - i(Y) omega^A
  Vec grad = Vec::Zero(d.phase());
  for (int i = 0; i < d.n(); ++i) {
    grad += x.p(a, i) * jac.row(d.q_offset(i)).transpose();
    grad(d.p_offset(a, i)) += yx.vq(i);
  }
  return Covector::from_flat(d, grad - contract_omega(a, yx).flat());
}

}  // namespace

Mat lie_derivative_omega(const PhaseVectorField& y, int a, const ChartPoint& x) {
  const Dimensions d = y.dims();
  if (a < 0 || a >= d.k()) throw std::out_of_range("lie_derivative_omega: index outside [0, k)");
  return omega_derivative_from_jacobian(d, a, y.jacobian(x));
}

Covector lie_derivative_theta(const PhaseVectorField& y, int a, const ChartPoint& x) {
  const Dimensions d = y.dims();
  if (a < 0 || a >= d.k()) throw std::out_of_range("lie_derivative_theta: index outside [0, k)");
  return theta_derivative_from_jacobian(d, a, x, y(x), y.jacobian(x));
}

TangentVector lie_bracket(const PhaseVectorField& y1, const PhaseVectorField& y2, const ChartPoint& x) {
  const Dimensions d = y1.dims();
  const Vec v1 = y1(x).flat();
  const Vec v2 = y2(x).flat();
  return TangentVector::from_flat(d, y2.jacobian(x) * v1 - y1.jacobian(x) * v2);
}

PhaseVectorField bracket_field(PhaseVectorField y1, PhaseVectorField y2) {
  const Dimensions d = y1.dims();
  const double step = std::max(y1.fd_step(), y2.fd_step());
  return PhaseVectorField(
      d, [y1 = std::move(y1), y2 = std::move(y2)](const ChartPoint& x) { return lie_bracket(y1, y2, x); },
      std::nullopt, step);
}

// --- checks ------------------------------------------------------------------

NoetherReport noether_check(const PhaseVectorField& y, const Hamiltonian& h,
                            const std::vector<ChartPoint>& samples, double tol) {
  if (samples.empty()) throw std::invalid_argument("noether_check: empty sample set");
  if (!(tol > 0.0)) throw std::invalid_argument("noether_check: tolerance must be positive");
  const Dimensions d = y.dims();
  if (!(h.dims() == d)) throw std::invalid_argument("noether_check: field and Hamiltonian dimensions differ");

  NoetherReport r;
  r.tol = tol;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const ChartPoint& x = samples[s];
    const TangentVector yx = y(x);
    const Mat jac = y.jacobian(x);
    for (int a = 0; a < d.k(); ++a) {
      r.residual_omega = std::max(r.residual_omega, max_abs(omega_derivative_from_jacobian(d, a, jac)));
      r.residual_eta = std::max(r.residual_eta, std::abs(contract_eta(a, yx)));
      r.exact_residual =
          std::max(r.exact_residual, theta_derivative_from_jacobian(d, a, x, yx, jac).max_abs());
      const PhaseVectorField ra = PhaseVectorField::constant(reeb(d, a));
      r.residual_reeb = std::max(r.residual_reeb, max_abs(lie_bracket(y, ra, x).flat()));
    }
    const double lh = std::abs(h.gradient(x)(yx));
    if (lh > r.residual_H) {
      r.residual_H = lh;
      r.worst_H_sample = s;
    }
  }
  return r;
}

double killing_check(const BaseVectorField& x, const MetricFamily& metrics,
                     const std::vector<Vec>& sample_qs) {
  if (x.has_base_components()) {
    throw std::invalid_argument("killing_check: field has components along the base R^k");
  }
  if (x.dims().n() != metrics.n()) throw std::invalid_argument("killing_check: dimension mismatch");
  const Vec t0 = Vec::Zero(x.dims().k());
  double worst = 0.0;
  for (const Vec& q : sample_qs) {
    const Vec xq = x.zq(t0, q);
    const Mat jx = x.derivatives(t0, q).zq_q;  // jx(l, j) = dX^l/dq^j
    const auto g = metrics.metrics(q);
    const auto dg = metrics.derivative(q);
    for (int a = 0; a < metrics.k(); ++a) {
      const Mat& ga = g[static_cast<std::size_t>(a)];
      Mat along = Mat::Zero(ga.rows(), ga.cols());
      for (int l = 0; l < metrics.n(); ++l) {
        along += xq(l) * dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(l)];
      }
      worst = std::max(worst, max_abs(Mat(along + jx.transpose() * ga + ga * jx)));
    }
  }
  return worst;
}

// --- currents ----------------------------------------------------------------

ConservedCurrent conserved_from_killing(const BaseVectorField& x) {
  if (x.has_base_components()) {
    throw std::invalid_argument("conserved_from_killing: field has components along the base R^k");
  }
  return {x.dims(),
          [x](const ChartPoint& pt) { return (pt.p * x.zq(pt.t, pt.q)).eval(); },
          CurrentSource::killing};
}

Vec noether_zeta(const PhaseVectorField& y, const ChartPoint& base_point, const ChartPoint& x,
                 const QuadratureOptions& options) {
  const Dimensions d = y.dims();
  const Vec x0 = base_point.flat();
  const Vec dx = x.flat() - x0;
  const auto integrand = [&](double s) {
    const ChartPoint g = ChartPoint::from_flat(d, x0 + s * dx);
    const TangentVector yg = y(g);
    const Mat jac = y.jacobian(g);
    Vec out(d.k());
    for (int a = 0; a < d.k(); ++a) out(a) = theta_derivative_from_jacobian(d, a, g, yg, jac).flat().dot(dx);
    return out;
  };
  const auto composite = [&](int panels) {
    Vec total = Vec::Zero(d.k());
    const double w = 1.0 / panels;
    for (int a = 0; a < d.k(); ++a) {
      for (int m = 0; m < panels; ++m) {
        total(a) += boost::math::quadrature::gauss<double, 7>::integrate(
            [&](double s) { return integrand(s)(a); }, m * w, (m + 1) * w);
      }
    }
    return total;
  };

  int panels = std::max(1, options.initial_panels);
  Vec coarse = composite(panels);
  while (panels * 2 <= options.max_panels) {
    panels *= 2;
    const Vec fine = composite(panels);
    const double diff = max_abs(Vec(fine - coarse));
    if (diff <= options.tol * (1.0 + max_abs(fine))) return fine;
    coarse = fine;
  }
  throw std::runtime_error("noether_zeta: quadrature did not converge");
}

ConservedCurrent conserved_from_noether(const PhaseVectorField& y, const NoetherReport& report,
                                        const ChartPoint& base_point, const QuadratureOptions& options) {
  if (!report.passed()) {
    throw std::invalid_argument("conserved_from_noether: field fails the Noether symmetry check");
  }
  const Dimensions d = y.dims();
  const auto theta_part = [y, d](const ChartPoint& x) {
    const TangentVector yx = y(x);
    Vec f(d.k());
    for (int a = 0; a < d.k(); ++a) f(a) = contract_theta(a, yx, x);
    return f;
  };
  if (report.exact()) return {d, theta_part, CurrentSource::noether_exact};
  return {d,
          [theta_part, y, base_point, options](const ChartPoint& x) {
            return (theta_part(x) - noether_zeta(y, base_point, x, options)).eval();
          },
          CurrentSource::noether_line_integral};
}

double conservation_defect(const ConservedCurrent& f, const KTangent& x_field, const ChartPoint& x,
                           double fd_step) {
  const Dimensions d = f.dims;
  const auto fn = [&](const Vec& flat) { return f(ChartPoint::from_flat(d, flat)); };
  const Mat df = fd_jacobian(fn, x.flat(), fd_step);  // k x N
  double sum = 0.0;
  for (int a = 0; a < d.k(); ++a) sum += df.row(a).dot(x_field[static_cast<std::size_t>(a)].flat());
  return sum;
}

ConservedCurrent pullback(const ConservedCurrent& f, std::function<ChartPoint(const ChartPoint&)> phi) {
  return {f.dims, [f, phi = std::move(phi)](const ChartPoint& x) { return f(phi(x)); }, CurrentSource::user};
}

}  // namespace kcosym
