#pragma once

// Finite-difference integration of the Hamilton-de Donder-Weyl equations for
// quadratic Hamiltonians with constant metrics, and diagnostics on sampled
// sections. Axis 0 of every grid is the evolution (time-like) axis.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kcosym/grid.hpp"
#include "kcosym/hamiltonian.hpp"
#include "kcosym/symmetry.hpp"

namespace kcosym {

/// Initial slice data as functions of the spatial coordinates (t^2, ..., t^k).
struct InitialData {
  std::function<Vec(const Vec& x)> displacement;
  std::function<Vec(const Vec& x)> velocity;
};

/// Explicit leapfrog for sum_A g_A d^2 psi / d(t^A)^2 = -dV/dq, evolving along
/// axis 0. Slices are (spatial nodes) x n matrices in grid order.
class LeapfrogStepper {
 public:
  /// Validates the system: constant metrics, g_1 positive definite, g_{A>1}
  /// negative semidefinite, non-periodic evolution axis, and stability
  /// (cfl_number() <= 1).
  LeapfrogStepper(const QuadraticHamiltonian& h, const BaseGrid& grid);

  double dt() const { return dt_; }
  /// dt * sqrt(lambda_max) / 2 for the discrete spatial operator; the scheme
  /// is stable iff this is <= 1. Equals c dt sqrt(sum_a 1/h_a^2) for the wave.
  double cfl_number() const { return cfl_; }
  std::size_t spatial_nodes() const { return spatial_nodes_; }

  Mat acceleration(const Mat& slice, double t) const;
  /// psi(t + dt) from psi(t - dt) and psi(t).
  Mat step(const Mat& previous, const Mat& current, double t) const;
  /// Second-order Taylor start: psi0 + dt v0 + dt^2/2 a(psi0).
  Mat first_step(const Mat& psi0, const Mat& velocity0, double t0) const;

  /// Initial displacement / velocity sampled on the spatial nodes.
  Mat sample_slice(const std::function<Vec(const Vec& x)>& f) const;

 private:
  Potential potential_;
  BaseGrid grid_;
  int n_;
  double dt_ = 0.0;
  double cfl_ = 0.0;
  std::size_t spatial_nodes_ = 1;
  Mat g1_inv_;
  std::vector<Mat> spatial_metrics_;  // g_A for A >= 1
  std::vector<unsigned char> fixed_;  // spatial dirichlet boundary nodes
};

/// Static CFL estimate for a system on a grid, without the other checks.
double cfl_number(const QuadraticHamiltonian& h, const BaseGrid& grid);

/// Solves the second-order field equations by leapfrog and fills momenta.
SectionGrid integrate_quadratic(const QuadraticHamiltonian& h, const BaseGrid& grid,
                                const InitialData& initial);

struct WaveParams {
  double sigma = 1.0;
  double tau = 1.0;
  int spatial_dims = 1;
  std::function<double(const Vec& x)> initial_displacement;
  std::function<double(const Vec& x)> initial_velocity;

  double speed() const;
  /// Throws std::invalid_argument on non-positive sigma/tau, d outside {1,2,3}
  /// or missing profile functions.
  void validate() const;
};

/// sigma psi_tt - tau sum_a psi_{x_a x_a} = 0. Throws on CFL violation or an
/// unsupported boundary mix.
SectionGrid integrate_wave(const WaveParams& params, const BaseGrid& grid);

/// psi^A_i = (g_A)_ij d psi^j / d t^A.
SectionGrid momenta_from_section(const SectionGrid& section, const QuadraticHamiltonian& h);

/// Values on a subset of grid nodes; row r of `values` belongs to nodes[r].
struct NodalField {
  std::vector<std::size_t> nodes;
  Mat values;

  double max_abs() const;
};

/// Div(F o psi) = sum_A d(F^A o psi)/dt^A on interior nodes.
NodalField divergence(const ConservedCurrent& f, const SectionGrid& section);

/// sum_A g_A (psi(t + 2h_A) - 2 psi + psi(t - 2h_A)) / (4 h_A^2) + dV/dq (one
/// column per component i) on nodes at least two steps from any dirichlet end. Equals the
/// composition of the central first differences used by momenta_from_section
/// and divergence.
NodalField field_equation_residual(const QuadraticHamiltonian& h, const SectionGrid& section);

struct SectionResidual {
  Vec q_equation;  // max_i |dH/dq^i + sum_A d psi^A_i / dt^A|
  Vec p_equation;  // max_{A,i} |dH/dp^A_i - d psi^i / dt^A|

  double max_abs() const;
};

SectionResidual hdw_residual_on_section(const Hamiltonian& h, const SectionGrid& section);

/// Section sampled from closed-form psi(t) and momenta(t) (k x n).
SectionGrid sample_section(const BaseGrid& grid, int n, const std::function<Vec(const Vec& t)>& psi,
                           const std::function<Mat(const Vec& t)>& momenta);

/// Built-in scalar wave profiles; `exact` is set when a closed form exists.
struct WaveProfile {
  std::string name;
  std::function<double(const Vec& x)> displacement;
  std::function<double(const Vec& x)> velocity;
  std::function<double(double t, const Vec& x)> exact;
};

/// amplitude sin(kappa x_1 - c kappa t).
WaveProfile plane_wave_profile(double speed, double amplitude = 1.0, double wavenumber = 1.0);
/// amplitude sin(kappa x_1) cos(c kappa t).
WaveProfile standing_wave_profile(double speed, double amplitude = 1.0, double wavenumber = 1.0);
/// amplitude exp(-|x - center|^2 / (2 width^2)), at rest.
WaveProfile gaussian_profile(const Vec& center, double width, double amplitude = 1.0);

/// Max |psi - exact| over all nodes.
double max_error(const SectionGrid& section, const std::function<double(double t, const Vec& x)>& exact);

/// CSV: header t1..tk,q1..qn,p{A}_{i}; one row per node; shortest round-trip
/// decimal formatting.
void write_section_csv(std::ostream& out, const SectionGrid& section);
void write_section_csv(const std::string& path, const SectionGrid& section);
/// Reads a section written on `grid`; throws on header, shape or coordinate mismatch.
SectionGrid read_section_csv(std::istream& in, const BaseGrid& grid);
SectionGrid read_section_csv(const std::string& path, const BaseGrid& grid);

std::string format_double(double v);

}  // namespace kcosym
