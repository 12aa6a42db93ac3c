#pragma once

// Vector fields on R^k x Q and on phase space, complete lifts, canonical
// prolongations, Killing / Noether checks and conserved currents.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kcosym/chart.hpp"
#include "kcosym/hamiltonian.hpp"

namespace kcosym {

/// First partials of a base field Z = Z^A d/dt^A + Z^i d/dq^i.
struct BaseFieldDerivatives {
  Mat zt_t;  // k x k, dZ^A/dt^B
  Mat zt_q;  // k x n, dZ^A/dq^i
  Mat zq_t;  // n x k, dZ^j/dt^B
  Mat zq_q;  // n x n, dZ^j/dq^i
};

/// Vector field on the base bundle R^k x Q.
class BaseVectorField {
 public:
  using ComponentFn = std::function<Vec(const Vec& t, const Vec& q)>;
  using DerivativeFn = std::function<BaseFieldDerivatives(const Vec& t, const Vec& q)>;

  BaseVectorField(Dimensions dims, ComponentFn zt, ComponentFn zq,
                  std::optional<DerivativeFn> derivatives = {}, double fd_step = default_fd_step());

  /// Field X = X^i(q) d/dq^i on Q (no base components).
  static BaseVectorField on_configuration(int k, int n, std::function<Vec(const Vec& q)> xq,
                                          std::optional<std::function<Mat(const Vec& q)>> jacobian = {},
                                          double fd_step = default_fd_step());
  /// Constant translation along `direction` in Q.
  static BaseVectorField translation(int k, const Vec& direction);
  /// Linear field X^i = M^i_j q^j on Q (rotations when M is antisymmetric).
  static BaseVectorField linear(int k, const Mat& generator);
  static BaseVectorField zero(Dimensions dims);

  Dimensions dims() const { return dims_; }
  bool has_base_components() const { return has_base_components_; }
  double fd_step() const { return fd_step_; }

  Vec zt(const Vec& t, const Vec& q) const { return zt_(t, q); }
  Vec zq(const Vec& t, const Vec& q) const { return zq_(t, q); }
  BaseFieldDerivatives derivatives(const Vec& t, const Vec& q) const;
  bool analytic_derivatives() const { return derivatives_.has_value(); }

 private:
  Dimensions dims_;
  ComponentFn zt_;
  ComponentFn zq_;
  std::optional<DerivativeFn> derivatives_;
  double fd_step_;
  bool has_base_components_ = true;
};

/// Vector field on phase space R^k x (T^1_k)^*Q.
class PhaseVectorField {
 public:
  using EvalFn = std::function<TangentVector(const ChartPoint&)>;
  /// Flat N x N Jacobian, J(r, c) = d Y_r / d x_c.
  using JacobianFn = std::function<Mat(const ChartPoint&)>;

  PhaseVectorField(Dimensions dims, EvalFn eval, std::optional<JacobianFn> jacobian = {},
                   double fd_step = default_fd_step());

  static PhaseVectorField constant(const TangentVector& v);
  /// The HDW solution field X_A of `x_field`.
  static PhaseVectorField component(const HamiltonianKVectorField& x_field, int a);

  Dimensions dims() const { return dims_; }
  TangentVector operator()(const ChartPoint& x) const { return eval_(x); }
  Mat jacobian(const ChartPoint& x) const;
  bool analytic_jacobian() const { return jacobian_.has_value(); }
  double fd_step() const { return fd_step_; }

 private:
  Dimensions dims_;
  EvalFn eval_;
  std::optional<JacobianFn> jacobian_;
  double fd_step_;
};

/// Complete lift Z^{1*}.
PhaseVectorField complete_lift(const BaseVectorField& z);

/// Fiber-preserving diffeomorphism phi(t, q) = (phi^A(t, q), phi_Q(q)) with
/// the pointwise data needed by its canonical prolongation.
struct BundleMap {
  std::function<Vec(const Vec& t, const Vec& q)> base;        // phi^A
  std::function<Mat(const Vec& t, const Vec& q)> base_dt;     // k x k, d phi^A / d t^B
  std::function<Mat(const Vec& t, const Vec& q)> base_dq;     // k x n, d phi^A / d q^i
  std::function<Vec(const Vec& q)> fiber;                     // phi_Q
  /// d (phi_Q^{-1})^k / d q^i evaluated at phi_Q(q), as a function of q.
  std::function<Mat(const Vec& q)> fiber_inverse_jacobian;
  /// d phi_Q / d q at q; inverted numerically when the above is absent.
  std::function<Mat(const Vec& q)> fiber_jacobian;

  static BundleMap identity(Dimensions dims);
  /// phi = (t, R q + c), R invertible.
  static BundleMap affine_fiber(int k, const Mat& r, const Vec& c);
};

/// j^{1*} phi applied to a chart point.
ChartPoint canonical_prolongation(const BundleMap& phi, const ChartPoint& x);

/// Directional derivative of f along Y(x) by central differences on x + s Y(x).
double lie_derivative_scalar(const PhaseVectorField& y, const std::function<double(const ChartPoint&)>& f,
                             const ChartPoint& x);
/// L(Y) H = dH(Y), with H's gradient (analytic when available).
double lie_derivative_scalar(const PhaseVectorField& y, const Hamiltonian& h, const ChartPoint& x);

/// L(Y) omega^A = d i(Y) omega^A as an antisymmetric N x N matrix, entry (l, j)
/// the coefficient of dx^l ^ dx^j for l < j.
Mat lie_derivative_omega(const PhaseVectorField& y, int a, const ChartPoint& x);

/// L(Y) theta^A = d i(Y) theta^A - i(Y) omega^A.
Covector lie_derivative_theta(const PhaseVectorField& y, int a, const ChartPoint& x);

TangentVector lie_bracket(const PhaseVectorField& y1, const PhaseVectorField& y2, const ChartPoint& x);
/// [Y1, Y2] as a field; Jacobian by finite differences of the pointwise bracket.
PhaseVectorField bracket_field(PhaseVectorField y1, PhaseVectorField y2);

struct NoetherReport {
  double residual_omega = 0.0;
  double residual_eta = 0.0;
  double residual_H = 0.0;
  double residual_reeb = 0.0;
  double exact_residual = 0.0;
  double tol = 0.0;
  std::size_t worst_H_sample = 0;

  bool omega_ok() const { return residual_omega <= tol; }
  bool eta_ok() const { return residual_eta <= tol; }
  bool hamiltonian_ok() const { return residual_H <= tol; }
  bool reeb_ok() const { return residual_reeb <= tol; }
  bool exact() const { return exact_residual <= tol / 10.0; }
  /// Conditions (a) L(Y) omega^A = 0, (b) i(Y) eta^A = 0, (c) L(Y) H = 0.
  bool passed() const { return omega_ok() && eta_ok() && hamiltonian_ok(); }
};

NoetherReport noether_check(const PhaseVectorField& y, const Hamiltonian& h,
                            const std::vector<ChartPoint>& samples, double tol);

/// max over samples, A, j, k of |X(g_A,jk) + dX^l/dq^j g_A,kl + dX^l/dq^k g_A,jl|.
double killing_check(const BaseVectorField& x, const MetricFamily& metrics,
                     const std::vector<Vec>& sample_qs);

enum class CurrentSource { killing, noether_exact, noether_line_integral, user };

/// F = (F^1, ..., F^k): R^k x M -> R^k.
struct ConservedCurrent {
  Dimensions dims;
  std::function<Vec(const ChartPoint&)> eval;
  CurrentSource source = CurrentSource::user;

  Vec operator()(const ChartPoint& x) const { return eval(x); }
};

/// F^A = alpha^A(X(q)) = sum_i p^A_i X^i(q).
ConservedCurrent conserved_from_killing(const BaseVectorField& x);

struct QuadratureOptions {
  int initial_panels = 2;
  int max_panels = 1024;
  double tol = 1e-12;
};

/// zeta^A(x) = int_0^1 (L(Y) theta^A)(gamma(s)) (gamma'(s)) ds on the segment
/// from base_point to x.
Vec noether_zeta(const PhaseVectorField& y, const ChartPoint& base_point, const ChartPoint& x,
                 const QuadratureOptions& options = {});

/// F^A = i(Y) theta^A - zeta^A. `report` must come from noether_check on Y and
/// must pass; the line-integral branch is taken unless Y is exact.
ConservedCurrent conserved_from_noether(const PhaseVectorField& y, const NoetherReport& report,
                                        const ChartPoint& base_point,
                                        const QuadratureOptions& options = {});

/// sum_A <dF^A, X_A> at x, dF^A by central differences.
double conservation_defect(const ConservedCurrent& f, const KTangent& x_field, const ChartPoint& x,
                           double fd_step = default_fd_step());

/// Phi^* F = F o Phi.
ConservedCurrent pullback(const ConservedCurrent& f, std::function<ChartPoint(const ChartPoint&)> phi);

}  // namespace kcosym
