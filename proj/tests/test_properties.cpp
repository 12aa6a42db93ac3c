// Randomised invariants over seeded draws of dimensions, systems and points.

#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "kcosym/fields.hpp"
#include "kcosym/numdiff.hpp"
#include "kcosym/sampling.hpp"
#include "kcosym/symmetry.hpp"
#include "oracles.hpp"

using namespace kcosym;

namespace {

struct Draw {
  int k;
  int n;
  std::shared_ptr<const QuadraticHamiltonian> h;
};

Draw draw_system(std::mt19937_64& rng) {
  const int k = std::uniform_int_distribution<int>(1, 4)(rng);
  const int n = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<Mat> g;
  for (int a = 0; a < k; ++a) {
    const Mat m = oracle::random_spd(rng, n);
    g.push_back(std::bernoulli_distribution(0.5)(rng) ? m : Mat(-m));
  }
  return {k, n, std::make_shared<const QuadraticHamiltonian>(MetricFamily(g), Potential::harmonic(oracle::random_spd(rng, n)))};
}

Mat random_matrix(std::mt19937_64& rng, int n) {
  return Mat::NullaryExpr(n, n, [&] { return std::uniform_real_distribution<double>(-1, 1)(rng); });
}

}  // namespace

TEST(Property, HdwFieldsSolveTheEquationsInEveryGauge) {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 40; ++trial) {
    const Draw s = draw_system(rng);
    const Dimensions d(s.k, s.n);
    const ChartPoint x = oracle::random_point(rng, d);
    const KTangent sym = build_hdw(s.h)(x);
    EXPECT_LE(hdw_residual(*s.h, sym, x).max_abs(), 1e-12);
    for (int a = 0; a < s.k; ++a) {
      const KTangent con = build_hdw(s.h, ConcentratedGauge{a})(x);
      EXPECT_LE(hdw_residual(*s.h, con, x).max_abs(), 1e-12);
      EXPECT_LE(kernel_membership_residual(sym - con), 1e-10);
    }
  }
}

TEST(Property, LiftsOfConfigurationFieldsPreserveTheCanonicalForms) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const Draw s = draw_system(rng);
    const Dimensions d(s.k, s.n);
    const PhaseVectorField y = complete_lift(BaseVectorField::linear(s.k, random_matrix(rng, s.n)));
    const ChartPoint x = oracle::random_point(rng, d);
    for (int a = 0; a < s.k; ++a) {
      EXPECT_LE(lie_derivative_omega(y, a, x).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LE(lie_derivative_theta(y, a, x).max_abs(), 1e-9);
      EXPECT_EQ(contract_eta(a, y(x)), 0.0);
    }
  }
}

TEST(Property, BracketIsAntisymmetricAndLiftsCommute) {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const Mat a = random_matrix(rng, n);
    const Mat b = random_matrix(rng, n);
    const PhaseVectorField ya = complete_lift(BaseVectorField::linear(k, a));
    const PhaseVectorField yb = complete_lift(BaseVectorField::linear(k, b));
    const ChartPoint x = oracle::random_point(rng, Dimensions(k, n));
    const TangentVector ab = lie_bracket(ya, yb, x);
    EXPECT_LE((ab + lie_bracket(yb, ya, x)).flat().cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((ab - complete_lift(BaseVectorField::linear(k, b * a - a * b))(x)).flat().cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Property, KillingCurrentsSatisfyTheNoetherDerivativeIdentity) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const Dimensions d(k, n);
    const BaseVectorField z = BaseVectorField::linear(k, random_matrix(rng, n));
    const ConservedCurrent f = conserved_from_killing(z);
    const PhaseVectorField y = complete_lift(z);
    const ChartPoint x = oracle::random_point(rng, d);
    const Mat df = fd_jacobian([&](const Vec& v) { return f(ChartPoint::from_flat(d, v)); }, x.flat(), default_fd_step());
    for (int a = 0; a < k; ++a) {
      EXPECT_LE((Vec(df.row(a).transpose()) - contract_omega(a, y(x)).flat()).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Property, ProlongationIsFunctorial) {
  std::mt19937_64 rng(104);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const Mat r1 = Mat::Identity(n, n) + 0.3 * random_matrix(rng, n);
    const Mat r2 = Mat::Identity(n, n) + 0.3 * random_matrix(rng, n);
    const Vec c1 = oracle::random_vector(rng, n);
    const Vec c2 = oracle::random_vector(rng, n);
    const ChartPoint x = oracle::random_point(rng, Dimensions(k, n));
    const ChartPoint two_steps = canonical_prolongation(BundleMap::affine_fiber(k, r2, c2),
                                                        canonical_prolongation(BundleMap::affine_fiber(k, r1, c1), x));
    const ChartPoint composed = canonical_prolongation(BundleMap::affine_fiber(k, r2 * r1, r2 * c1 + c2), x);
    EXPECT_LE((two_steps.flat() - composed.flat()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Property, SamplingIsDeterministicAndInsideTheBox) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const Vec lo = (Vec(3) << -1.0, 0.0, 5.0).finished();
    const Vec hi = (Vec(3) << 1.0, 0.5, 5.5).finished();
    const auto a = sample_box(lo, hi, 200, seed);
    const auto b = sample_box(lo, hi, 200, seed);
    ASSERT_EQ(a.size(), 200u);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i], b[i]);
      EXPECT_TRUE((a[i].array() >= lo.array()).all() && (a[i].array() <= hi.array()).all());
    }
    // Low discrepancy: every coordinate's mean is close to the box centre.
    Vec mean = Vec::Zero(3);
    for (const Vec& v : a) mean += v / 200.0;
    EXPECT_LE(((mean - 0.5 * (lo + hi)).array() / (hi - lo).array()).abs().maxCoeff(), 0.02);
  }
  EXPECT_NE(sample_box(Vec::Zero(2), Vec::Ones(2), 4, 1)[0], sample_box(Vec::Zero(2), Vec::Ones(2), 4, 2)[0]);
}

TEST(Property, CsvRoundTripIsBitExactForArbitraryDoubles) {
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int trial = 0; trial < 5; ++trial) {
    const BaseGrid g({{0.0, 1.0, 3, Boundary::dirichlet}, {-2.0, 3.0, 4, Boundary::periodic}});
    SectionGrid s(g, 2);
    const auto fill = [&](Mat& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        double v;
        do {
          const std::uint64_t b = bits(rng);
          std::memcpy(&v, &b, sizeof v);
        } while (!std::isfinite(v));
        m.data()[i] = v;
      }
    };
    fill(s.psi());
    fill(s.momenta());
    std::stringstream io;
    write_section_csv(io, s);
    const SectionGrid back = read_section_csv(io, g);
    EXPECT_EQ(std::memcmp(back.psi().data(), s.psi().data(), sizeof(double) * s.psi().size()), 0);
    EXPECT_EQ(std::memcmp(back.momenta().data(), s.momenta().data(), sizeof(double) * s.momenta().size()), 0);
  }
}

TEST(Property, LeapfrogPreservesLinearity) {
  // Superposition: the scheme is linear for quadratic Hamiltonians with V = 0.
  const QuadraticHamiltonian h = wave_hamiltonian(1.0, 2.0, 1);
  const BaseGrid g({{0.0, 0.5, 41, Boundary::dirichlet}, {0.0, 1.0, 32, Boundary::periodic}});
  const auto f1 = [](const Vec& x) { return Vec::Constant(1, std::sin(6.283185307179586 * x(0))); };
  const auto f2 = [](const Vec& x) { return Vec::Constant(1, x(0) * (1 - x(0))); };
  const auto zero = [](const Vec&) { return Vec::Zero(1).eval(); };
  const SectionGrid a = integrate_quadratic(h, g, {f1, zero});
  const SectionGrid b = integrate_quadratic(h, g, {f2, f1});
  const SectionGrid ab = integrate_quadratic(
      h, g, {[&](const Vec& x) { return Vec(f1(x) + 2.0 * f2(x)); }, [&](const Vec& x) { return Vec(2.0 * f1(x)); }});
  EXPECT_LE((ab.psi() - a.psi() - 2.0 * b.psi()).cwiseAbs().maxCoeff(), 1e-12);
}
