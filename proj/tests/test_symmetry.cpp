#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kcosym/numdiff.hpp"
#include "kcosym/sampling.hpp"
#include "kcosym/symmetry.hpp"
#include "oracles.hpp"

using namespace kcosym;

namespace {

Mat rotation_generator(int n, int i, int j) {
  Mat m = Mat::Zero(n, n);
  m(i, j) = -1.0;
  m(j, i) = 1.0;
  return m;
}

Mat rotation(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

std::shared_ptr<const QuadraticHamiltonian> isotropic(int k, int n, double stiffness) {
  std::vector<Mat> g{Mat::Identity(n, n)};
  for (int a = 1; a < k; ++a) g.push_back(-Mat::Identity(n, n));
  return std::make_shared<const QuadraticHamiltonian>(MetricFamily(g),
                                                      Potential::harmonic(stiffness * Mat::Identity(n, n)));
}

PhaseVectorField q_dilation_without_momenta(const Dimensions& d) {
  return PhaseVectorField(d, [d](const ChartPoint& x) {
    TangentVector v = TangentVector::zero(d);
    v.vq = x.q;
    return v;
  });
}

}  // namespace

TEST(CompleteLift, Examples) {
  std::mt19937_64 rng(10);
  for (int k = 1; k <= 3; ++k) {
    const Dimensions d(k, 1);
    const ChartPoint x = oracle::random_point(rng, d);
    const TangentVector t = complete_lift(BaseVectorField::translation(k, Vec::Ones(1)))(x);
    EXPECT_EQ(t.vq(0), 1.0);
    EXPECT_EQ(t.vp.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(t.vt.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(complete_lift(BaseVectorField::zero(d))(x).flat().cwiseAbs().maxCoeff(), 0.0);
  }
  // q d/dq lifts to q d/dq - p d/dp.
  const Dimensions d(1, 1);
  ChartPoint x = ChartPoint::zero(d);
  x.q(0) = 1.5;
  x.p(0, 0) = -0.25;
  const TangentVector v = complete_lift(BaseVectorField::linear(1, Mat::Identity(1, 1)))(x);
  EXPECT_DOUBLE_EQ(v.vq(0), 1.5);
  EXPECT_DOUBLE_EQ(v.vp(0, 0), 0.25);
}

TEST(CompleteLift, MatchesDerivativeOfProlongedFlow) {
  std::mt19937_64 rng(11);
  const int k = 2;
  const int n = 3;
  const Dimensions d(k, n);
  const Mat m = Mat::NullaryExpr(n, n, [&] { return std::uniform_real_distribution<double>(-1, 1)(rng); });
  const PhaseVectorField lift = complete_lift(BaseVectorField::linear(k, m));
  const double s = 1e-4;
  for (int trial = 0; trial < 5; ++trial) {
    const ChartPoint x = oracle::random_point(rng, d);
    // phi_s = I + s M agrees with the flow to O(s^2); the central difference cancels it.
    const ChartPoint plus = canonical_prolongation(BundleMap::affine_fiber(k, Mat::Identity(n, n) + s * m, Vec::Zero(n)), x);
    const ChartPoint minus = canonical_prolongation(BundleMap::affine_fiber(k, Mat::Identity(n, n) - s * m, Vec::Zero(n)), x);
    const TangentVector v = lift(x);
    EXPECT_LE(((plus.q - minus.q) / (2 * s) - v.vq).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(((plus.p - minus.p) / (2 * s) - v.vp).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(CompleteLift, AnalyticJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  const Dimensions d(2, 2);
  const BaseVectorField z(
      d, [](const Vec& t, const Vec& q) { return Vec((Vec(2) << q(0) * t(1), std::sin(q(1))).finished()); },
      [](const Vec& t, const Vec& q) { return Vec((Vec(2) << t(0) * q(1), q(0) * q(0)).finished()); });
  const PhaseVectorField y = complete_lift(z);
  const ChartPoint x = oracle::random_point(rng, d, 1.0);
  const Mat fd = fd_jacobian([&](const Vec& f) { return y(ChartPoint::from_flat(d, f)).flat(); }, x.flat(), 1e-5);
  EXPECT_LE((y.jacobian(x) - fd).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(CanonicalProlongation, Examples) {
  std::mt19937_64 rng(13);
  const Dimensions d(2, 2);
  const ChartPoint x = oracle::random_point(rng, d);
  const ChartPoint same = canonical_prolongation(BundleMap::identity(d), x);
  EXPECT_EQ(same.flat(), x.flat());

  BundleMap shift = BundleMap::identity(d);
  const Vec c = (Vec(2) << 0.5, -2.0).finished();
  shift.base = [c](const Vec& t, const Vec&) { return Vec(t + c); };
  const ChartPoint moved = canonical_prolongation(shift, x);
  EXPECT_EQ(moved.t, Vec(x.t + c));
  EXPECT_EQ(moved.p, x.p);

  const Dimensions d1(1, 1);
  ChartPoint y = ChartPoint::zero(d1);
  y.q(0) = 0.3;
  y.p(0, 0) = 5.0;
  const ChartPoint scaled = canonical_prolongation(BundleMap::affine_fiber(1, Mat::Constant(1, 1, 2.0), Vec::Zero(1)), y);
  EXPECT_DOUBLE_EQ(scaled.q(0), 0.6);
  EXPECT_DOUBLE_EQ(scaled.p(0, 0), 2.5);
  // The pairing p(v) is invariant: p'(phi_* v) = p(v).
  const double v = 0.7;
  EXPECT_DOUBLE_EQ(scaled.p(0, 0) * (2.0 * v), y.p(0, 0) * v);
}

TEST(LieDerivativeScalar, Examples) {
  std::mt19937_64 rng(14);
  const auto wave = std::make_shared<const QuadraticHamiltonian>(wave_hamiltonian(1.0, 1.0, 2));
  const Dimensions d = wave->dims();
  const PhaseVectorField y = complete_lift(BaseVectorField::translation(d.k(), Vec::Ones(1)));
  const ChartPoint x = oracle::random_point(rng, d);
  EXPECT_EQ(lie_derivative_scalar(y, [](const ChartPoint&) { return 3.0; }, x), 0.0);
  EXPECT_NEAR(lie_derivative_scalar(y, [&](const ChartPoint& z) { return wave->value(z); }, x), 0.0, 1e-10);
  EXPECT_EQ(lie_derivative_scalar(y, *wave, x), 0.0);
  EXPECT_NEAR(lie_derivative_scalar(y, [](const ChartPoint& z) { return z.q(0); }, x), 1.0, 1e-10);
}

TEST(LieDerivativeOmega, Examples) {
  std::mt19937_64 rng(15);
  const Dimensions d(2, 1);
  const ChartPoint x = oracle::random_point(rng, d);
  for (int a = 0; a < 2; ++a) {
    EXPECT_EQ(lie_derivative_omega(PhaseVectorField::constant(reeb(d, 0)), a, x).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE(lie_derivative_omega(complete_lift(BaseVectorField::translation(2, Vec::Ones(1))), a, x)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
  }
  const Dimensions d1(1, 1);
  const Mat lo = lie_derivative_omega(q_dilation_without_momenta(d1), 0, oracle::random_point(rng, d1));
  // Flat layout (t, q, p): the dq ^ dp coefficient sits at (1, 2).
  EXPECT_NEAR(lo(1, 2), 1.0, 1e-8);
  EXPECT_NEAR(lo(2, 1), -1.0, 1e-8);
  EXPECT_NEAR(lo(0, 1), 0.0, 1e-8);
}

TEST(LieDerivativeTheta, CompleteLiftsPreserveTheta) {
  std::mt19937_64 rng(16);
  const Dimensions d(2, 3);
  const PhaseVectorField y = complete_lift(BaseVectorField::linear(2, rotation_generator(3, 0, 2)));
  for (int s = 0; s < 5; ++s) {
    const ChartPoint x = oracle::random_point(rng, d);
    for (int a = 0; a < 2; ++a) EXPECT_LE(lie_derivative_theta(y, a, x).max_abs(), 1e-9);
  }
}

TEST(NoetherCheck, TranslationPassesReebFails) {
  const auto wave = std::make_shared<const QuadraticHamiltonian>(wave_hamiltonian(1.0, 1.0, 1));
  const Dimensions d = wave->dims();
  const auto samples = sample_chart(d, 2.0, 64, 1);
  const NoetherReport ok = noether_check(complete_lift(BaseVectorField::translation(2, Vec::Ones(1))), *wave, samples, 1e-8);
  EXPECT_TRUE(ok.passed());
  EXPECT_TRUE(ok.exact());
  EXPECT_LE(ok.residual_reeb, 1e-12);

  const NoetherReport bad = noether_check(PhaseVectorField::constant(reeb(d, 0)), *wave, samples, 1e-8);
  EXPECT_FALSE(bad.passed());
  EXPECT_FALSE(bad.eta_ok());
  EXPECT_EQ(bad.residual_eta, 1.0);
  EXPECT_TRUE(bad.omega_ok());

  EXPECT_THROW(noether_check(PhaseVectorField::constant(reeb(d, 0)), *wave, {}, 1e-8), std::invalid_argument);
  EXPECT_THROW(noether_check(PhaseVectorField::constant(reeb(d, 0)), *wave, samples, 0.0), std::invalid_argument);
}

TEST(NoetherCheck, PotentialBreaksTranslation) {
  // V = q^2 = 1/2 * 2 q^2: L(Y) H = dV/dq = 2 q.
  const auto h = std::make_shared<const QuadraticHamiltonian>(
      MetricFamily({Mat::Identity(1, 1), -Mat::Identity(1, 1)}), Potential::harmonic(Mat::Constant(1, 1, 2.0)));
  const auto samples = sample_chart(h->dims(), 2.0, 128, 9);
  const NoetherReport r = noether_check(complete_lift(BaseVectorField::translation(2, Vec::Ones(1))), *h, samples, 1e-8);
  EXPECT_TRUE(r.omega_ok());
  EXPECT_TRUE(r.eta_ok());
  EXPECT_FALSE(r.hamiltonian_ok());
  EXPECT_NEAR(r.residual_H, std::abs(2.0 * samples[r.worst_H_sample].q(0)), 1e-12);
}

TEST(KillingCheck, Examples) {
  const std::vector<Vec> qs = sample_box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0), 32, 3);
  std::vector<Vec> q1;
  for (const Vec& q : qs) q1.push_back(q.head(1));
  const MetricFamily wave({Mat::Identity(1, 1), -Mat::Identity(1, 1)});
  EXPECT_EQ(killing_check(BaseVectorField::translation(2, Vec::Ones(1)), wave, q1), 0.0);
  EXPECT_NEAR(killing_check(BaseVectorField::linear(1, Mat::Identity(1, 1)), MetricFamily({Mat::Identity(1, 1)}), q1),
              2.0, 1e-12);
  EXPECT_LE(killing_check(BaseVectorField::linear(1, rotation_generator(2, 0, 1)), MetricFamily({Mat::Identity(2, 2)}), qs),
            1e-12);
  const Mat aniso = (Vec(2) << 1.0, 2.0).finished().asDiagonal();
  EXPECT_NEAR(killing_check(BaseVectorField::linear(1, rotation_generator(2, 0, 1)), MetricFamily({aniso}), qs), 1.0,
              1e-12);
  const BaseVectorField with_time(
      Dimensions(1, 1), [](const Vec&, const Vec&) { return Vec::Ones(1).eval(); },
      [](const Vec&, const Vec&) { return Vec::Zero(1).eval(); });
  EXPECT_THROW(killing_check(with_time, MetricFamily({Mat::Identity(1, 1)}), q1), std::invalid_argument);
}

TEST(KillingCheck, QDependentMetric) {
  // g(q) = exp(2q): L(d/dq) g = 2 g, so the residual is 2 exp(2 q) at the worst sample.
  const MetricFamily m(1, 1, [](const Vec& q) { return std::vector<Mat>{Mat::Constant(1, 1, std::exp(2 * q(0)))}; });
  const std::vector<Vec> qs{Vec::Constant(1, 0.0), Vec::Constant(1, 0.5)};
  EXPECT_NEAR(killing_check(BaseVectorField::translation(1, Vec::Ones(1)), m, qs), 2.0 * std::exp(1.0), 1e-6);
}

TEST(LieBracket, Examples) {
  std::mt19937_64 rng(17);
  const Dimensions d1(1, 1);
  const ChartPoint x = oracle::random_point(rng, d1);
  TangentVector dq = TangentVector::zero(d1);
  dq.vq(0) = 1.0;
  const PhaseVectorField y1 = PhaseVectorField::constant(dq);
  const PhaseVectorField y2 = q_dilation_without_momenta(d1);
  EXPECT_LE(lie_bracket(y2, y2, x).flat().cwiseAbs().maxCoeff(), 1e-10);
  const TangentVector b = lie_bracket(y1, y2, x);
  EXPECT_NEAR(b.vq(0), 1.0, 1e-8);
  EXPECT_NEAR(b.vp(0, 0), 0.0, 1e-8);
}

TEST(LieBracket, LiftIsAHomomorphism) {
  std::mt19937_64 rng(18);
  const Dimensions d(2, 3);
  const Mat a = rotation_generator(3, 0, 1);
  const Mat b = rotation_generator(3, 1, 2);
  const PhaseVectorField ya = complete_lift(BaseVectorField::linear(2, a));
  const PhaseVectorField yb = complete_lift(BaseVectorField::linear(2, b));
  // [Aq, Bq] = (BA - AB) q for linear fields.
  const PhaseVectorField yab = complete_lift(BaseVectorField::linear(2, b * a - a * b));
  for (int s = 0; s < 5; ++s) {
    const ChartPoint x = oracle::random_point(rng, d);
    EXPECT_LE((lie_bracket(ya, yb, x) - yab(x)).flat().cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ConservedFromKilling, Examples) {
  std::mt19937_64 rng(19);
  const Dimensions d(3, 1);
  const ChartPoint x = oracle::random_point(rng, d);
  const ConservedCurrent f = conserved_from_killing(BaseVectorField::translation(3, Vec::Ones(1)));
  EXPECT_EQ(f(x), Vec(x.p.col(0)));
  EXPECT_EQ(f.source, CurrentSource::killing);
  EXPECT_EQ(conserved_from_killing(BaseVectorField::zero(d))(x), Vec(Vec::Zero(3)));

  const Dimensions d2(2, 2);
  const ChartPoint y = oracle::random_point(rng, d2);
  const Vec r = conserved_from_killing(BaseVectorField::linear(2, rotation_generator(2, 0, 1)))(y);
  for (int a = 0; a < 2; ++a) EXPECT_NEAR(r(a), -y.p(a, 0) * y.q(1) + y.p(a, 1) * y.q(0), 1e-15);
}

TEST(ConservedFromNoether, TranslationMatchesKillingCurrent) {
  const auto wave = std::make_shared<const QuadraticHamiltonian>(wave_hamiltonian(2.0, 0.5, 2));
  const Dimensions d = wave->dims();
  const auto samples = sample_chart(d, 2.0, 64, 4);
  const PhaseVectorField y = complete_lift(BaseVectorField::translation(3, Vec::Ones(1)));
  const NoetherReport r = noether_check(y, *wave, samples, 1e-8);
  const ConservedCurrent f = conserved_from_noether(y, r, ChartPoint::zero(d));
  EXPECT_EQ(f.source, CurrentSource::noether_exact);
  for (const ChartPoint& x : samples) EXPECT_LE((f(x) - Vec(x.p.col(0))).cwiseAbs().maxCoeff(), 1e-12);

  const PhaseVectorField zero = PhaseVectorField::constant(TangentVector::zero(d));
  const ConservedCurrent f0 = conserved_from_noether(zero, noether_check(zero, *wave, samples, 1e-8), ChartPoint::zero(d));
  EXPECT_EQ(f0(samples[3]), Vec(Vec::Zero(3)));

  const NoetherReport bad = noether_check(PhaseVectorField::constant(reeb(d, 0)), *wave, samples, 1e-8);
  EXPECT_THROW(conserved_from_noether(PhaseVectorField::constant(reeb(d, 0)), bad, ChartPoint::zero(d)),
               std::invalid_argument);
}

TEST(ConservedFromNoether, LineIntegralForNonExactSymmetry) {
  // H = (p^1)^2 / 2 on k = 2, n = 1; Y = d/dp^2 is a Noether symmetry with
  // L(Y) theta^2 = dq, so F = (0, -(q - q0)).
  const Dimensions d(2, 1);
  const HamiltonianFunction h(
      d, [](const ChartPoint& x) { return 0.5 * x.p(0, 0) * x.p(0, 0); },
      [d](const ChartPoint& x) {
        Covector c = Covector::zero(d);
        c.ap(0, 0) = x.p(0, 0);
        return c;
      });
  TangentVector shift = TangentVector::zero(d);
  shift.vp(1, 0) = 1.0;
  const PhaseVectorField y = PhaseVectorField::constant(shift);
  const auto samples = sample_chart(d, 2.0, 32, 5);
  const NoetherReport r = noether_check(y, h, samples, 1e-8);
  ASSERT_TRUE(r.passed());
  EXPECT_FALSE(r.exact());
  EXPECT_LE(r.residual_reeb, 1e-12);

  ChartPoint base = ChartPoint::zero(d);
  base.q(0) = 0.4;
  const ConservedCurrent f = conserved_from_noether(y, r, base);
  EXPECT_EQ(f.source, CurrentSource::noether_line_integral);
  for (std::size_t s = 0; s < 8; ++s) {
    const ChartPoint& x = samples[s];
    EXPECT_NEAR(f(x)(0), 0.0, 1e-10);
    EXPECT_NEAR(f(x)(1), -(x.q(0) - 0.4), 1e-10);
  }
  // d zeta = L(Y) theta (closure of the Noether one-forms).
  const Vec zeta_grad = fd_gradient([&](const Vec& v) { return noether_zeta(y, base, ChartPoint::from_flat(d, v))(1); },
                                    samples[0].flat(), default_fd_step());
  EXPECT_LE((zeta_grad - lie_derivative_theta(y, 1, samples[0]).flat()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ConservedCurrent, DerivativeIdentityAndConservation) {
  std::mt19937_64 rng(20);
  const auto h = isotropic(2, 2, 1.5);
  const Dimensions d = h->dims();
  const PhaseVectorField y = complete_lift(BaseVectorField::linear(2, rotation_generator(2, 0, 1)));
  const ConservedCurrent f = conserved_from_killing(BaseVectorField::linear(2, rotation_generator(2, 0, 1)));
  const HamiltonianKVectorField xh = build_hdw(h);
  for (int s = 0; s < 10; ++s) {
    const ChartPoint x = oracle::random_point(rng, d);
    const Mat df = fd_jacobian([&](const Vec& v) { return f(ChartPoint::from_flat(d, v)); }, x.flat(), default_fd_step());
    for (int a = 0; a < 2; ++a) {
      EXPECT_LE((Vec(df.row(a).transpose()) - contract_omega(a, y(x)).flat()).cwiseAbs().maxCoeff(), 1e-8);
    }
    EXPECT_NEAR(conservation_defect(f, xh(x), x), 0.0, 1e-8);
  }
}

TEST(ConservedCurrent, DefectEqualsMinusLieDerivativeOfH) {
  std::mt19937_64 rng(21);
  const Mat k = (Vec(2) << 1.0, 3.0).finished().asDiagonal();
  const auto h = std::make_shared<const QuadraticHamiltonian>(
      MetricFamily({Mat::Identity(2, 2), -Mat::Identity(2, 2)}), Potential::harmonic(k));
  const ConservedCurrent f = conserved_from_killing(BaseVectorField::linear(2, rotation_generator(2, 0, 1)));
  const HamiltonianKVectorField xh = build_hdw(h);
  for (int s = 0; s < 5; ++s) {
    const ChartPoint x = oracle::random_point(rng, h->dims());
    // dV(X) = k1 q1 (-q2) + k2 q2 q1.
    const double lh = (3.0 - 1.0) * x.q(0) * x.q(1);
    EXPECT_NEAR(conservation_defect(f, xh(x), x), -lh, 1e-8);
  }
}

TEST(ConservedCurrent, PullbackByProlongedIsometryStaysConserved) {
  std::mt19937_64 rng(22);
  const auto h = isotropic(2, 2, 0.0);
  const Mat r = rotation(0.7);
  const BundleMap phi = BundleMap::affine_fiber(2, r, Vec::Zero(2));
  const ConservedCurrent f = conserved_from_killing(BaseVectorField::translation(2, Vec::Unit(2, 0)));
  const ConservedCurrent g = pullback(f, [phi](const ChartPoint& x) { return canonical_prolongation(phi, x); });
  const HamiltonianKVectorField xh = build_hdw(h);
  for (int s = 0; s < 5; ++s) {
    const ChartPoint x = oracle::random_point(rng, h->dims());
    const Vec expect = x.p * r.row(0).transpose();
    EXPECT_LE((g(x) - expect).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(conservation_defect(g, xh(x), x), 0.0, 1e-8);
  }
}
