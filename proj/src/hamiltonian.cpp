#include "kcosym/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kcosym {

HamiltonianFunction::HamiltonianFunction(Dimensions dims, ValueFn value,
                                         std::optional<GradientFn> gradient, double fd_step)
    : dims_(dims), value_(std::move(value)), gradient_(std::move(gradient)), fd_step_(fd_step) {
  if (!value_) throw std::invalid_argument("HamiltonianFunction: value function required");
  if (!(fd_step_ > 0.0)) throw std::invalid_argument("HamiltonianFunction: fd_step must be positive");
}

Covector HamiltonianFunction::gradient(const ChartPoint& x) const {
  if (gradient_) return (*gradient_)(x);
  const Dimensions d = dims_;
  const auto f = [&](const Vec& flat) { return value_(ChartPoint::from_flat(d, flat)); };
  return Covector::from_flat(d, fd_gradient(f, x.flat(), fd_step_));
}

Mat dual_metric(const Mat& g) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw std::invalid_argument("dual_metric: metric must be a non-empty square matrix");
  }
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("dual_metric: metric is not symmetric (asymmetry " +
                                std::to_string(asym) + ")");
  }
  Eigen::FullPivLU<Mat> lu(g);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw std::invalid_argument("dual_metric: metric is singular");
  Mat inv = lu.inverse();
  inv = (0.5 * (inv + inv.transpose())).eval();
  const double defect =
      (g * inv - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
  if (!(defect <= 1e-10)) {
    throw std::invalid_argument("dual_metric: metric is too ill-conditioned (g g^* - I = " +
                                std::to_string(defect) + ")");
  }
  return inv;
}

MetricFamily::MetricFamily(std::vector<Mat> metrics)
    : k_(static_cast<int>(metrics.size())),
      n_(metrics.empty() ? 0 : static_cast<int>(metrics.front().rows())),
      constant_(std::move(metrics)),
      fd_step_(default_fd_step()) {
  if (k_ < 1 || n_ < 1) throw std::invalid_argument("MetricFamily: need k >= 1 metrics of size n >= 1");
  for (const Mat& g : *constant_) {
    if (g.rows() != n_ || g.cols() != n_) {
      throw std::invalid_argument("MetricFamily: all metrics must be n x n");
    }
  }
}

MetricFamily::MetricFamily(int k, int n, MetricFn metrics, std::optional<DerivativeFn> derivative,
                           double fd_step)
    : k_(k), n_(n), fn_(std::move(metrics)), derivative_(std::move(derivative)), fd_step_(fd_step) {
  if (k_ < 1 || n_ < 1) throw std::invalid_argument("MetricFamily: need k >= 1 and n >= 1");
  if (!fn_) throw std::invalid_argument("MetricFamily: metric function required");
}

std::vector<Mat> MetricFamily::metrics(const Vec& q) const {
  if (constant_) return *constant_;
  auto g = fn_(q);
  if (static_cast<int>(g.size()) != k_) {
    throw std::invalid_argument("MetricFamily: metric function returned wrong count");
  }
  return g;
}

std::vector<std::vector<Mat>> MetricFamily::derivative(const Vec& q) const {
  std::vector<std::vector<Mat>> out(static_cast<std::size_t>(k_),
                                    std::vector<Mat>(static_cast<std::size_t>(n_), Mat::Zero(n_, n_)));
  if (constant_) return out;
  if (derivative_) return (*derivative_)(q);
  Vec y = q;
  for (int l = 0; l < n_; ++l) {
    const double h = fd_axis_step(fd_step_, q(l));
    y(l) = q(l) + h;
    const auto gp = fn_(y);
    y(l) = q(l) - h;
    const auto gm = fn_(y);
    y(l) = q(l);
    for (int a = 0; a < k_; ++a) {
      out[static_cast<std::size_t>(a)][static_cast<std::size_t>(l)] =
          (gp[static_cast<std::size_t>(a)] - gm[static_cast<std::size_t>(a)]) / (2.0 * h);
    }
  }
  return out;
}

Potential Potential::zero() {
  Potential v;
  v.value = [](const Vec&, const Vec&) { return 0.0; };
  v.grad_t = [](const Vec& t, const Vec&) { return Vec::Zero(t.size()).eval(); };
  v.grad_q = [](const Vec&, const Vec& q) { return Vec::Zero(q.size()).eval(); };
  return v;
}

Potential Potential::harmonic(Mat stiffness) {
  const Mat k = 0.5 * (stiffness + stiffness.transpose());
  Potential v;
  v.value = [k](const Vec&, const Vec& q) { return 0.5 * q.dot(k * q); };
  v.grad_t = [](const Vec& t, const Vec&) { return Vec::Zero(t.size()).eval(); };
  v.grad_q = [k](const Vec&, const Vec& q) { return (k * q).eval(); };
  return v;
}

Vec Potential::dt(const Vec& t, const Vec& q) const {
  if (grad_t) return grad_t(t, q);
  return fd_gradient([&](const Vec& s) { return value(s, q); }, t, fd_step);
}

Vec Potential::dq(const Vec& t, const Vec& q) const {
  if (grad_q) return grad_q(t, q);
  return fd_gradient([&](const Vec& s) { return value(t, s); }, q, fd_step);
}

QuadraticHamiltonian::QuadraticHamiltonian(MetricFamily metrics, Potential potential)
    : metrics_(std::move(metrics)), potential_(std::move(potential)) {
  if (!potential_.value) throw std::invalid_argument("QuadraticHamiltonian: potential value required");
  if (metrics_.constant()) {
    for (const Mat& g : metrics_.metrics(Vec::Zero(metrics_.n()))) {
      cached_duals_.push_back(dual_metric(g));
    }
  }
}

std::vector<Mat> QuadraticHamiltonian::dual_metrics(const Vec& q) const {
  if (!cached_duals_.empty()) return cached_duals_;
  std::vector<Mat> duals;
  for (const Mat& g : metrics_.metrics(q)) duals.push_back(dual_metric(g));
  return duals;
}

double QuadraticHamiltonian::value(const ChartPoint& x) const {
  const auto duals = dual_metrics(x.q);
  double kinetic = 0.0;
  for (int a = 0; a < dims().k(); ++a) {
    const Vec pa = x.p.row(a).transpose();
    kinetic += pa.dot(duals[static_cast<std::size_t>(a)] * pa);
  }
  return 0.5 * kinetic + potential_.value(x.t, x.q);
}

Covector QuadraticHamiltonian::gradient(const ChartPoint& x) const {
  const Dimensions d = dims();
  const auto duals = dual_metrics(x.q);
  Covector c = Covector::zero(d);
  c.at = potential_.dt(x.t, x.q);
  c.aq = potential_.dq(x.t, x.q);
  for (int a = 0; a < d.k(); ++a) {
    const Mat& dual = duals[static_cast<std::size_t>(a)];
    const Vec pa = x.p.row(a).transpose();
    c.ap.row(a) = (dual * pa).transpose();
  }
  if (!metrics_.constant()) {
    // d g^{-1}/dq^l = -g^{-1} (dg/dq^l) g^{-1}
    const auto dg = metrics_.derivative(x.q);
    for (int a = 0; a < d.k(); ++a) {
      const Mat& dual = duals[static_cast<std::size_t>(a)];
      const Vec pa = x.p.row(a).transpose();
      const Vec u = dual * pa;
      for (int l = 0; l < d.n(); ++l) {
        c.aq(l) -= 0.5 * u.dot(dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(l)] * u);
      }
    }
  }
  return c;
}

double eval_quadratic(const QuadraticHamiltonian& h, const ChartPoint& x) { return h.value(x); }

QuadraticHamiltonian wave_hamiltonian(double sigma, double tau, int spatial_dims) {
  if (!(sigma > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("wave_hamiltonian: sigma and tau must be positive");
  }
  if (spatial_dims < 1) throw std::invalid_argument("wave_hamiltonian: spatial_dims must be >= 1");
  std::vector<Mat> metrics;
  metrics.push_back(Mat::Constant(1, 1, sigma));
  for (int a = 0; a < spatial_dims; ++a) metrics.push_back(Mat::Constant(1, 1, -tau));
  return QuadraticHamiltonian(MetricFamily(std::move(metrics)), Potential::zero());
}

HamiltonianKVectorField::HamiltonianKVectorField(std::shared_ptr<const Hamiltonian> source,
                                                 HdwGauge gauge)
    : source_(std::move(source)), gauge_(gauge) {
  if (!source_) throw std::invalid_argument("build_hdw: null Hamiltonian");
  if (const auto* c = std::get_if<ConcentratedGauge>(&gauge_)) {
    if (c->index < 0 || c->index >= source_->dims().k()) {
      throw std::out_of_range("build_hdw: concentrated gauge index " + std::to_string(c->index) +
                              " outside [0, k)");
    }
  }
}

KTangent HamiltonianKVectorField::operator()(const ChartPoint& x) const {
  const Dimensions d = source_->dims();
  const Covector dh = source_->gradient(x);
  KTangent out;
  out.vectors.reserve(static_cast<std::size_t>(d.k()));
  for (int a = 0; a < d.k(); ++a) {
    TangentVector v = TangentVector::zero(d);
    v.vt(a) = 1.0;
    v.vq = dh.ap.row(a).transpose();
    double share = 0.0;
    if (std::holds_alternative<SymmetricGauge>(gauge_)) {
      share = 1.0 / d.k();
    } else if (std::get<ConcentratedGauge>(gauge_).index == a) {
      share = 1.0;
    }
    v.vp.row(a) = (-share * dh.aq).transpose();
    out.vectors.push_back(std::move(v));
  }
  return out;
}

HamiltonianKVectorField build_hdw(std::shared_ptr<const Hamiltonian> h, HdwGauge gauge) {
  return HamiltonianKVectorField(std::move(h), gauge);
}

double HdwResidual::max_abs() const {
  const double e = eta.size() > 0 ? eta.cwiseAbs().maxCoeff() : 0.0;
  return std::max(e, omega.max_abs());
}

HdwResidual hdw_residual(const Hamiltonian& h, const KTangent& x_field, const ChartPoint& x) {
  const Dimensions d = h.dims();
  if (static_cast<int>(x_field.size()) != d.k()) {
    throw std::invalid_argument("hdw_residual: k-tangent length differs from k");
  }
  HdwResidual r{Mat::Zero(d.k(), d.k()), Covector::zero(d)};
  for (int a = 0; a < d.k(); ++a) {
    for (int b = 0; b < d.k(); ++b) {
      r.eta(a, b) = contract_eta(a, x_field[static_cast<std::size_t>(b)]) - (a == b ? 1.0 : 0.0);
    }
  }
  Vec lhs = Vec::Zero(d.phase());
  for (int a = 0; a < d.k(); ++a) lhs += contract_omega(a, x_field[static_cast<std::size_t>(a)]).flat();
  const Covector dh = h.gradient(x);
  Covector rhs = dh;
  rhs.at.setZero();  // dH - sum_A (dH/dt^A) dt^A
  r.omega = Covector::from_flat(d, lhs - rhs.flat());
  return r;
}

KTangent reconstruct_from_section(const SectionGrid& section, std::size_t node) {
  const BaseGrid& grid = section.grid();
  const Dimensions d = section.dims();
  if (node >= grid.node_count()) throw std::out_of_range("reconstruct_from_section: node out of range");
  KTangent out;
  for (int a = 0; a < d.k(); ++a) {
    const auto fwd = grid.shifted(node, a, 1);
    const auto bwd = grid.shifted(node, a, -1);
    if (!fwd || !bwd) {
      throw std::invalid_argument("reconstruct_from_section: node " + std::to_string(node) +
                                  " lies on the boundary of axis " + std::to_string(a + 1));
    }
    const double h2 = 2.0 * grid.axis(a).spacing();
    const auto f = static_cast<Eigen::Index>(*fwd);
    const auto b = static_cast<Eigen::Index>(*bwd);
    TangentVector v = TangentVector::zero(d);
    v.vt(a) = 1.0;
    v.vq = (section.psi().row(f) - section.psi().row(b)).transpose() / h2;
    for (int c = 0; c < d.k(); ++c) {
      v.vp.row(c) = (section.momenta().block(f, c * d.n(), 1, d.n()) -
                     section.momenta().block(b, c * d.n(), 1, d.n())) / h2;
    }
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace kcosym
