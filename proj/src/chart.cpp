#include "kcosym/chart.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kcosym {

namespace {

void check_index(int a, int k, const char* what) {
  if (a < 0 || a >= k) {
    throw std::out_of_range(std::string(what) + ": index " + std::to_string(a) +
                            " outside [0, " + std::to_string(k) + ")");
  }
}

}  // namespace

Dimensions::Dimensions(int k, int n) : k_(k), n_(n) {
  if (k < 1 || n < 1) {
    throw std::invalid_argument("Dimensions: k and n must be >= 1 (got k=" + std::to_string(k) +
                                ", n=" + std::to_string(n) + ")");
  }
}

ChartPoint ChartPoint::zero(const Dimensions& dims) {
  return {Vec::Zero(dims.k()), Vec::Zero(dims.n()), Mat::Zero(dims.k(), dims.n())};
}

ChartPoint ChartPoint::from_flat(const Dimensions& dims, const Vec& flat) {
  auto v = TangentVector::from_flat(dims, flat);
  return {std::move(v.vt), std::move(v.vq), std::move(v.vp)};
}

Vec ChartPoint::flat() const { return TangentVector{t, q, p}.flat(); }

Dimensions ChartPoint::dims() const {
  return {static_cast<int>(t.size()), static_cast<int>(q.size())};
}

bool ChartPoint::finite() const {
  return t.allFinite() && q.allFinite() && p.allFinite();
}

TangentVector TangentVector::zero(const Dimensions& dims) {
  return {Vec::Zero(dims.k()), Vec::Zero(dims.n()), Mat::Zero(dims.k(), dims.n())};
}

TangentVector TangentVector::from_flat(const Dimensions& dims, const Vec& flat) {
  if (flat.size() != dims.phase()) {
    throw std::invalid_argument("from_flat: expected " + std::to_string(dims.phase()) +
                                " components, got " + std::to_string(flat.size()));
  }
  const int k = dims.k();
  const int n = dims.n();
  TangentVector v = zero(dims);
  v.vt = flat.head(k);
  v.vq = flat.segment(k, n);
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n; ++i) v.vp(a, i) = flat(dims.p_offset(a, i));
  }
  return v;
}

Vec TangentVector::flat() const {
  const Dimensions d = dims();
  Vec out(d.phase());
  out.head(d.k()) = vt;
  out.segment(d.k(), d.n()) = vq;
  for (int a = 0; a < d.k(); ++a) {
    for (int i = 0; i < d.n(); ++i) out(d.p_offset(a, i)) = vp(a, i);
  }
  return out;
}

Dimensions TangentVector::dims() const {
  return {static_cast<int>(vt.size()), static_cast<int>(vq.size())};
}

TangentVector& TangentVector::operator+=(const TangentVector& o) {
  vt += o.vt;
  vq += o.vq;
  vp += o.vp;
  return *this;
}

TangentVector& TangentVector::operator-=(const TangentVector& o) {
  vt -= o.vt;
  vq -= o.vq;
  vp -= o.vp;
  return *this;
}

TangentVector& TangentVector::operator*=(double s) {
  vt *= s;
  vq *= s;
  vp *= s;
  return *this;
}

TangentVector operator+(TangentVector a, const TangentVector& b) { return a += b; }
TangentVector operator-(TangentVector a, const TangentVector& b) { return a -= b; }
TangentVector operator*(double s, TangentVector v) { return v *= s; }

Covector Covector::zero(const Dimensions& dims) {
  return {Vec::Zero(dims.k()), Vec::Zero(dims.n()), Mat::Zero(dims.k(), dims.n())};
}

Covector Covector::from_flat(const Dimensions& dims, const Vec& flat) {
  auto v = TangentVector::from_flat(dims, flat);
  return {std::move(v.vt), std::move(v.vq), std::move(v.vp)};
}

Vec Covector::flat() const { return TangentVector{at, aq, ap}.flat(); }

Dimensions Covector::dims() const {
  return {static_cast<int>(at.size()), static_cast<int>(aq.size())};
}

double Covector::operator()(const TangentVector& v) const {
  return at.dot(v.vt) + aq.dot(v.vq) + (ap.array() * v.vp.array()).sum();
}

double Covector::max_abs() const {
  double m = 0.0;
  if (at.size() > 0) m = std::max(m, at.cwiseAbs().maxCoeff());
  if (aq.size() > 0) m = std::max(m, aq.cwiseAbs().maxCoeff());
  if (ap.size() > 0) m = std::max(m, ap.cwiseAbs().maxCoeff());
  return m;
}

KTangent operator-(const KTangent& a, const KTangent& b) {
  if (a.size() != b.size()) throw std::invalid_argument("KTangent difference: size mismatch");
  KTangent out;
  out.vectors.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.vectors.push_back(a[i] - b[i]);
  return out;
}

ChartPoint displace(const ChartPoint& x, const TangentVector& v, double s) {
  return {x.t + s * v.vt, x.q + s * v.vq, x.p + s * v.vp};
}

double contract_eta(int a, const TangentVector& v) {
  check_index(a, static_cast<int>(v.vt.size()), "contract_eta");
  return v.vt(a);
}

Covector contract_omega(int a, const TangentVector& v) {
  const Dimensions d = v.dims();
  check_index(a, d.k(), "contract_omega");
  Covector c = Covector::zero(d);
  // i(v)(dq^i ^ dp^A_i) = vq^i dp^A_i - vp^A_i dq^i
  c.aq = -v.vp.row(a).transpose();
  c.ap.row(a) = v.vq.transpose();
  return c;
}

double contract_theta(int a, const TangentVector& v, const ChartPoint& x) {
  check_index(a, static_cast<int>(x.p.rows()), "contract_theta");
  return x.p.row(a).dot(v.vq);
}

double eval_omega(int a, const TangentVector& v, const TangentVector& w) {
  check_index(a, static_cast<int>(v.vt.size()), "eval_omega");
  return v.vq.dot(w.vp.row(a).transpose()) - w.vq.dot(v.vp.row(a).transpose());
}

TangentVector reeb(const Dimensions& dims, int a) {
  check_index(a, dims.k(), "reeb");
  TangentVector v = TangentVector::zero(dims);
  v.vt(a) = 1.0;
  return v;
}

Mat omega_matrix(const Dimensions& dims, int a) {
  check_index(a, dims.k(), "omega_matrix");
  Mat m = Mat::Zero(dims.phase(), dims.phase());
  for (int i = 0; i < dims.n(); ++i) {
    m(dims.q_offset(i), dims.p_offset(a, i)) = -1.0;
    m(dims.p_offset(a, i), dims.q_offset(i)) = 1.0;
  }
  return m;
}

int numerical_rank(Mat m, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("numerical_rank: tolerance must be positive");
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const double scale = m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return 0;
  const double threshold = tol * scale;

  Eigen::Index rank = 0;
  for (Eigen::Index col = 0; col < cols && rank < rows; ++col) {
    Eigen::Index pivot = rank;
    m.col(col).tail(rows - rank).cwiseAbs().maxCoeff(&pivot);
    pivot += rank;
    if (std::abs(m(pivot, col)) <= threshold) continue;
    m.row(pivot).swap(m.row(rank));
    for (Eigen::Index r = rank + 1; r < rows; ++r) {
      const double f = m(r, col) / m(rank, col);
      if (f != 0.0) m.row(r) -= f * m.row(rank);
    }
    ++rank;
  }
  return static_cast<int>(rank);
}

Mat joint_structure_map(const Dimensions& dims) {
  const int k = dims.k();
  const int N = dims.phase();
  Mat m = Mat::Zero(N + k * k, k * N);
  for (int a = 0; a < k; ++a) {
    m.block(0, a * N, N, N) = omega_matrix(dims, a);
    // eta^A(X_B): row N + A*k + B picks the t^A slot of block B.
    for (int b = 0; b < k; ++b) m(N + a * k + b, b * N + dims.t_offset(a)) = 1.0;
  }
  return m;
}

Mat single_vector_structure_map(const Dimensions& dims) {
  const int k = dims.k();
  const int N = dims.phase();
  Mat m = Mat::Zero(k + k * N, N);
  for (int a = 0; a < k; ++a) {
    m(a, dims.t_offset(a)) = 1.0;
    m.block(k + a * N, 0, N, N) = omega_matrix(dims, a);
  }
  return m;
}

int kernel_dimension(const Dimensions& dims, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("kernel_dimension: tolerance must be positive");
  const Mat m = joint_structure_map(dims);
  return static_cast<int>(m.cols()) - numerical_rank(m, tol);
}

double kernel_membership_residual(const KTangent& x) {
  if (x.size() == 0) throw std::invalid_argument("kernel_membership_residual: empty k-tangent");
  const Dimensions dims = x[0].dims();
  if (static_cast<int>(x.size()) != dims.k()) {
    throw std::invalid_argument("kernel_membership_residual: tuple length differs from k");
  }
  const int N = dims.phase();
  Vec stacked(dims.k() * N);
  for (int a = 0; a < dims.k(); ++a) stacked.segment(a * N, N) = x[a].flat();
  const Vec image = joint_structure_map(dims) * stacked;
  return image.size() > 0 ? image.cwiseAbs().maxCoeff() : 0.0;
}

int expected_kernel_dimension(const Dimensions& dims) {
  return (dims.k() - 1) * (dims.k() * dims.n() + dims.n());
}

}  // namespace kcosym
