#pragma once

// Hamiltonian functions on R^k x (T^1_k)^*Q and the k-vector fields solving
//
//   eta^A(X_B) = delta^A_B,   sum_A i(X_A) omega^A = dH - sum_A R_A(H) eta^A.

#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "kcosym/chart.hpp"
#include "kcosym/grid.hpp"
#include "kcosym/numdiff.hpp"

namespace kcosym {

/// Interface shared by generic and quadratic Hamiltonians.
class Hamiltonian {
 public:
  virtual ~Hamiltonian() = default;

  virtual Dimensions dims() const = 0;
  virtual double value(const ChartPoint& x) const = 0;
  virtual Covector gradient(const ChartPoint& x) const = 0;
  virtual bool analytic_gradient() const = 0;
};

/// H given as a plain function, optionally with its analytic differential.
class HamiltonianFunction final : public Hamiltonian {
 public:
  using ValueFn = std::function<double(const ChartPoint&)>;
  using GradientFn = std::function<Covector(const ChartPoint&)>;

  HamiltonianFunction(Dimensions dims, ValueFn value, std::optional<GradientFn> gradient = {},
                      double fd_step = default_fd_step());

  Dimensions dims() const override { return dims_; }
  double value(const ChartPoint& x) const override { return value_(x); }
  /// Analytic gradient when supplied, central differences otherwise.
  Covector gradient(const ChartPoint& x) const override;
  bool analytic_gradient() const override { return gradient_.has_value(); }
  double fd_step() const { return fd_step_; }

 private:
  Dimensions dims_;
  ValueFn value_;
  std::optional<GradientFn> gradient_;
  double fd_step_;
};

/// Inverse of a symmetric invertible matrix; throws std::invalid_argument on
/// asymmetric (> 1e-12 relative) or singular input.
Mat dual_metric(const Mat& g);

/// k semi-Riemannian metrics g_A on Q, constant or q-dependent.
class MetricFamily {
 public:
  using MetricFn = std::function<std::vector<Mat>(const Vec& q)>;
  /// derivative(q)[A][l] = d g_A / d q^l
  using DerivativeFn = std::function<std::vector<std::vector<Mat>>(const Vec& q)>;

  /// Constant metrics.
  explicit MetricFamily(std::vector<Mat> metrics);
  /// q-dependent metrics; finite differences of `metrics` when `derivative` is absent.
  MetricFamily(int k, int n, MetricFn metrics, std::optional<DerivativeFn> derivative = {},
               double fd_step = default_fd_step());

  int k() const { return k_; }
  int n() const { return n_; }
  bool constant() const { return constant_.has_value(); }
  bool analytic_derivative() const { return constant() || derivative_.has_value(); }

  std::vector<Mat> metrics(const Vec& q) const;
  std::vector<std::vector<Mat>> derivative(const Vec& q) const;

 private:
  int k_;
  int n_;
  std::optional<std::vector<Mat>> constant_;
  MetricFn fn_;
  std::optional<DerivativeFn> derivative_;
  double fd_step_;
};

/// Potential V(t, q) with optional analytic partials.
struct Potential {
  std::function<double(const Vec& t, const Vec& q)> value;
  std::function<Vec(const Vec& t, const Vec& q)> grad_t;  // optional
  std::function<Vec(const Vec& t, const Vec& q)> grad_q;  // optional
  double fd_step = default_fd_step();

  static Potential zero();
  /// V = 1/2 q^T K q.
  static Potential harmonic(Mat stiffness);

  bool analytic() const { return grad_t && grad_q; }
  Vec dt(const Vec& t, const Vec& q) const;
  Vec dq(const Vec& t, const Vec& q) const;
};

/// H = 1/2 sum_A g_A^{ij}(q) p^A_i p^A_j + V(t, q).
class QuadraticHamiltonian final : public Hamiltonian {
 public:
  QuadraticHamiltonian(MetricFamily metrics, Potential potential);

  Dimensions dims() const override { return {metrics_.k(), metrics_.n()}; }
  double value(const ChartPoint& x) const override;
  Covector gradient(const ChartPoint& x) const override;
  bool analytic_gradient() const override {
    return potential_.analytic() && metrics_.analytic_derivative();
  }

  const MetricFamily& metrics() const { return metrics_; }
  const Potential& potential() const { return potential_; }
  /// Dual metrics g_A^* at q; cached when the metrics are constant.
  std::vector<Mat> dual_metrics(const Vec& q) const;

 private:
  MetricFamily metrics_;
  Potential potential_;
  std::vector<Mat> cached_duals_;
};

double eval_quadratic(const QuadraticHamiltonian& h, const ChartPoint& x);

/// Hamiltonian of sigma psi_tt - tau sum_a psi_{x_a x_a} = 0: k = d + 1, n = 1,
/// g_1 = sigma, g_{2..k} = -tau, V = 0.
QuadraticHamiltonian wave_hamiltonian(double sigma, double tau, int spatial_dims);

/// How the trace condition sum_A (X_A)^A_i = -dH/dq^i is split across A.
struct SymmetricGauge {};
struct ConcentratedGauge {
  int index = 0;
};
using HdwGauge = std::variant<SymmetricGauge, ConcentratedGauge>;

/// Solution k-vector field of the geometric Hamiltonian equations.
class HamiltonianKVectorField {
 public:
  HamiltonianKVectorField(std::shared_ptr<const Hamiltonian> source, HdwGauge gauge);

  KTangent operator()(const ChartPoint& x) const;
  const Hamiltonian& source() const { return *source_; }
  const HdwGauge& gauge() const { return gauge_; }

 private:
  std::shared_ptr<const Hamiltonian> source_;
  HdwGauge gauge_;
};

HamiltonianKVectorField build_hdw(std::shared_ptr<const Hamiltonian> h,
                                  HdwGauge gauge = SymmetricGauge{});

struct HdwResidual {
  Mat eta;         // eta^A(X_B) - delta^A_B
  Covector omega;  // sum_A i(X_A) omega^A - dH + sum_A (dH/dt^A) eta^A

  double max_abs() const;
};

HdwResidual hdw_residual(const Hamiltonian& h, const KTangent& x_field, const ChartPoint& x);

/// k-tangent psi_*(d/dt^A) at an interior node, by central differences.
KTangent reconstruct_from_section(const SectionGrid& section, std::size_t node);

}  // namespace kcosym
