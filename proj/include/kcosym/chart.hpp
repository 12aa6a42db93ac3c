#pragma once

// Darboux-coordinate arithmetic for the canonical k-cosymplectic structure on
// R^k x (T^1_k)^*Q:
//
//   eta^A   = dt^A
//   omega^A = dq^i ^ dp^A_i
//   theta^A = p^A_i dq^i          (omega^A = -d theta^A)
//   R_A     = d/dt^A
//
// Forms are never stored; only their contractions are exposed. Indices in the
// C++ API are zero-based (A in [0, k), i in [0, n)).

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace kcosym {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Sizes of the chart: k base parameters, n configuration coordinates.
class Dimensions {
 public:
  Dimensions(int k, int n);

  int k() const { return k_; }
  int n() const { return n_; }
  /// Phase dimension k + n + k*n.
  int phase() const { return k_ + n_ + k_ * n_; }

  // Offsets into the flat coordinate layout (t, q, p) with p row-major, A outer.
  int t_offset(int a) const { return a; }
  int q_offset(int i) const { return k_ + i; }
  int p_offset(int a, int i) const { return k_ + n_ + a * n_ + i; }

  bool operator==(const Dimensions&) const = default;

 private:
  int k_;
  int n_;
};

/// A point (t^A, q^i, p^A_i) of the chart. p is k x n.
struct ChartPoint {
  Vec t;
  Vec q;
  Mat p;

  static ChartPoint zero(const Dimensions& dims);
  static ChartPoint from_flat(const Dimensions& dims, const Vec& flat);
  Vec flat() const;
  Dimensions dims() const;
  bool finite() const;
};

/// Components along d/dt^A, d/dq^i, d/dp^A_i.
struct TangentVector {
  Vec vt;
  Vec vq;
  Mat vp;

  static TangentVector zero(const Dimensions& dims);
  static TangentVector from_flat(const Dimensions& dims, const Vec& flat);
  Vec flat() const;
  Dimensions dims() const;

  TangentVector& operator+=(const TangentVector& o);
  TangentVector& operator-=(const TangentVector& o);
  TangentVector& operator*=(double s);
};

TangentVector operator+(TangentVector a, const TangentVector& b);
TangentVector operator-(TangentVector a, const TangentVector& b);
TangentVector operator*(double s, TangentVector v);

/// Components along dt^A, dq^i, dp^A_i.
struct Covector {
  Vec at;
  Vec aq;
  Mat ap;

  static Covector zero(const Dimensions& dims);
  static Covector from_flat(const Dimensions& dims, const Vec& flat);
  Vec flat() const;
  Dimensions dims() const;

  /// Pairing alpha(v).
  double operator()(const TangentVector& v) const;
  double max_abs() const;
};

/// Pointwise value of a k-vector field (X_1, ..., X_k).
struct KTangent {
  std::vector<TangentVector> vectors;

  TangentVector& operator[](std::size_t a) { return vectors[a]; }
  const TangentVector& operator[](std::size_t a) const { return vectors[a]; }
  std::size_t size() const { return vectors.size(); }
};

KTangent operator-(const KTangent& a, const KTangent& b);

/// x + s * v, componentwise.
ChartPoint displace(const ChartPoint& x, const TangentVector& v, double s);

double contract_eta(int a, const TangentVector& v);
Covector contract_omega(int a, const TangentVector& v);
double contract_theta(int a, const TangentVector& v, const ChartPoint& x);
/// omega^A(v, w).
double eval_omega(int a, const TangentVector& v, const TangentVector& w);
TangentVector reeb(const Dimensions& dims, int a);

/// Flat N x N matrix Omega with flat(i(v) omega^A) = Omega * flat(v).
Mat omega_matrix(const Dimensions& dims, int a);

/// Rank by row reduction with partial pivoting. A pivot is accepted when its
/// magnitude exceeds tol * max|entry|.
int numerical_rank(Mat m, double tol);

/// Matrix of (X_1..X_k) -> (sum_A i(X_A) omega^A, (eta^A(X_B))_{A,B}), shape
/// (N + k^2) x (k N). Input blocks are the flat X_A stacked in order.
Mat joint_structure_map(const Dimensions& dims);

/// Matrix of v -> ((eta^A(v))_A, (i(v) omega^A)_A), shape (k + k N) x N.
Mat single_vector_structure_map(const Dimensions& dims);

/// Nullity of joint_structure_map; equals (k-1)(kn+n).
int kernel_dimension(const Dimensions& dims, double tol = 1e-9);

/// Max-abs image of a k-tangent under joint_structure_map. Zero iff the
/// tuple lies in ker omega# n ker eta#.
double kernel_membership_residual(const KTangent& x);

/// Closed-form rank of the HDW solution affine bundle.
int expected_kernel_dimension(const Dimensions& dims);

}  // namespace kcosym
