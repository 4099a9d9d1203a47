#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <numbers>

#include "hrcalc/errors.hpp"
#include "hrcalc/quaternion.hpp"
#include "test_random.hpp"

using namespace hrcalc;
using hrcalc::testing::Rand;

namespace {

constexpr double kPi = std::numbers::pi;
const Quaternion I = Quaternion::unit_i();
const Quaternion J = Quaternion::unit_j();
const Quaternion K = Quaternion::unit_k();

// Scalar/vector form (a0 b0 - a.b, a0 b + b0 a + a x b).
Quaternion product_oracle(const Quaternion& a, const Quaternion& b) {
  const Eigen::Vector3d va(a.i, a.j, a.k), vb(b.i, b.j, b.k);
  const Eigen::Vector3d v = a.r * vb + b.r * va + va.cross(vb);
  return {a.r * b.r - va.dot(vb), v.x(), v.y(), v.z()};
}

Eigen::Vector3d vec3(const Quaternion& q) { return {q.i, q.j, q.k}; }

}  // namespace

TEST(Quaternion, ProductTableExact) {
  EXPECT_EQ(I * I, Quaternion(-1));
  EXPECT_EQ(J * J, Quaternion(-1));
  EXPECT_EQ(K * K, Quaternion(-1));
  EXPECT_EQ(I * J * K, Quaternion(-1));
  EXPECT_EQ(I * J, K);
  EXPECT_EQ(J * K, I);
  EXPECT_EQ(K * I, J);
  EXPECT_EQ(J * I, -K);
}

TEST(Quaternion, ProductMatchesVectorFormOracle) {
  Rand rng(1);
  for (int n = 0; n < 1000; ++n) {
    const Quaternion a = rng.quat(), b = rng.quat();
    EXPECT_LE(max_abs_diff(a * b, product_oracle(a, b)), 1e-12);
    EXPECT_LE(max_abs_diff(a * b, from_matrix_dual(matrix_dual(a) * matrix_dual(b))), 1e-12);
  }
}

TEST(Quaternion, IdentityAndNonCommutativity) {
  const Quaternion q{1.5, -2, 0.25, 3};
  EXPECT_EQ(q * Quaternion(1), q);
  EXPECT_EQ(Quaternion(1) * q, q);
  EXPECT_FALSE(approx_equal(I * q, q * I));
}

TEST(Quaternion, ConjInvNorm) {
  EXPECT_EQ(conj(Quaternion(1, 1)), Quaternion(1, -1));
  EXPECT_EQ(inv(Quaternion(2)), Quaternion(0.5));
  EXPECT_DOUBLE_EQ(norm(Quaternion(1, 1, 1, 1)), 2.0);
  EXPECT_THROW(inv(Quaternion()), DomainError);
  Rand rng(2);
  for (int n = 0; n < 200; ++n) {
    const Quaternion q = rng.quat();
    EXPECT_EQ(conj(conj(q)), q);
    EXPECT_LE(max_abs_diff(q * inv(q), Quaternion(1)), 1e-12);
    EXPECT_LE(max_abs_diff(inv(q) * q, Quaternion(1)), 1e-12);
  }
}

TEST(Quaternion, AlgebraProperties) {
  Rand rng(3);
  for (int n = 0; n < 1000; ++n) {
    const Quaternion a = rng.quat(), b = rng.quat(), c = rng.quat();
    EXPECT_NEAR(norm(a * b), norm(a) * norm(b), 1e-12 * norm(a) * norm(b));
    EXPECT_LE(max_abs_diff(a * b, conj(conj(b) * conj(a))), 1e-12);
    EXPECT_LE(max_abs_diff((a * b) * c, a * (b * c)), 1e-12 * (1 + norm(a) * norm(b) * norm(c)));
    // Parallel imaginary parts commute.
    const Quaternion p = Quaternion(rng.normal()) + rng.normal() * a.imag_part();
    EXPECT_LE(max_abs_diff(a * p, p * a), 1e-12);
  }
}

TEST(Involution, ExamplesAndIdentities) {
  const Quaternion q{1, 1, 1, 1};
  EXPECT_EQ(involution(q, I), Quaternion(1, 1, -1, -1));
  EXPECT_EQ(involution_i(q), Quaternion(1, 1, -1, -1));
  EXPECT_EQ(involution(Quaternion(3.5), J), Quaternion(3.5));
  EXPECT_THROW(involution(q, Quaternion(1, 1)), DomainError);
  EXPECT_THROW(involution(q, Quaternion()), DomainError);

  Rand rng(4);
  for (int n = 0; n < 1000; ++n) {
    const Quaternion x = rng.quat();
    const Quaternion a = rng.pure_unit();
    EXPECT_LE(max_abs_diff(involution(involution(x, a), a), x), 1e-12);
    const Quaternion c =
        0.5 * (involution(x, I) + involution(x, J) + involution(x, K) - x);
    EXPECT_LE(max_abs_diff(c, conj(x)), 1e-12);
    EXPECT_LE(max_abs_diff(involution(x, J), involution_j(x)), 1e-12);
    EXPECT_LE(max_abs_diff(involution(x, K), involution_k(x)), 1e-12);
  }
}

TEST(Polar, RoundTripAndConventions) {
  const PolarForm p = to_polar(I);
  EXPECT_DOUBLE_EQ(p.magnitude, 1.0);
  EXPECT_EQ(p.axis, I);
  EXPECT_NEAR(p.angle, kPi / 2, 1e-15);

  const PolarForm neg = to_polar(Quaternion(-2));
  EXPECT_EQ(neg.axis, I);
  EXPECT_DOUBLE_EQ(neg.angle, kPi);
  EXPECT_THROW(to_polar(Quaternion()), DomainError);

  Rand rng(5);
  for (int n = 0; n < 500; ++n) {
    const Quaternion q = rng.quat();
    const PolarForm pf = to_polar(q);
    EXPECT_NEAR(norm(pf.axis), 1.0, 1e-12);
    EXPECT_EQ(pf.axis.r, 0.0);
    EXPECT_GE(pf.angle, 0.0);
    EXPECT_LE(pf.angle, kPi);
    EXPECT_LE(max_abs_diff(from_polar(pf), q), 1e-12 * (1 + norm(q)));
  }
}

TEST(Polar, PureExponential) {
  EXPECT_EQ(qexp(Quaternion()), Quaternion(1));
  EXPECT_LE(max_abs_diff(qexp(kPi * I), Quaternion(-1)), 1e-12);
  EXPECT_THROW(qexp(Quaternion(1, 1)), DomainError);
  Rand rng(6);
  for (int n = 0; n < 100; ++n) {
    const Quaternion eta = rng.pure_unit();
    const double th = rng.uniform(-4, 4);
    EXPECT_LE(max_abs_diff(qexp(th * eta), Quaternion(std::cos(th)) + std::sin(th) * eta),
              1e-12);
  }
}

TEST(Rotation, RightHandRuleAndOracle) {
  EXPECT_LE(max_abs_diff(rotate(I, K, kPi / 2), J), 1e-12);
  const Quaternion q{0, 0.3, -1, 2};
  EXPECT_LE(max_abs_diff(rotate(q, J, 0.0), q), 1e-15);
  EXPECT_LE(max_abs_diff(rotate(J, J, 1.234), J), 1e-12);
  EXPECT_THROW(rotate(q, Quaternion(0, 2), 1.0), DomainError);
  EXPECT_THROW(rotate(Quaternion(1, 1), I, 1.0), DomainError);

  Rand rng(7);
  for (int n = 0; n < 300; ++n) {
    const Quaternion p{0, rng.normal(), rng.normal(), rng.normal()};
    const Quaternion eta = rng.pure_unit();
    const double t1 = rng.uniform(-3, 3), t2 = rng.uniform(-3, 3);
    const Quaternion out = rotate(p, eta, t1);
    const Eigen::Vector3d ref = Eigen::AngleAxisd(t1, vec3(eta)) * vec3(p);
    EXPECT_LE((vec3(out) - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(out.r, 0.0);
    EXPECT_NEAR(norm(out), norm(p), 1e-12);
    EXPECT_LE(max_abs_diff(rotate(out, eta, t2), rotate(p, eta, t1 + t2)), 1e-10);
  }
}

TEST(Qubit, BlochMapping) {
  EXPECT_LE(max_abs_diff(qubit_to_quaternion(0.0, 1.7), K), 1e-15);
  EXPECT_LE(max_abs_diff(qubit_to_quaternion(kPi / 2, 0.0), I), 1e-15);
  EXPECT_LE(max_abs_diff(qubit_to_quaternion(kPi / 2, kPi / 2), J), 1e-15);
  Rand rng(8);
  for (int n = 0; n < 100; ++n) {
    const Quaternion q = qubit_to_quaternion(rng.uniform(-7, 7), rng.uniform(-7, 7));
    EXPECT_EQ(q.r, 0.0);
    EXPECT_NEAR(norm(q), 1.0, 1e-12);
  }
}

TEST(MatrixDual, LayoutAndHomomorphism) {
  EXPECT_TRUE(matrix_dual(Quaternion(1)).isApprox(Eigen::Matrix4d::Identity()));
  const RealDual4 di = matrix_dual(I);
  EXPECT_EQ(di.col(0), Eigen::Vector4d(0, 1, 0, 0));
  RealDual4 expected;
  expected << 0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0;
  EXPECT_EQ(di, expected);
  Rand rng(9);
  for (int n = 0; n < 500; ++n) {
    const Quaternion a = rng.quat(), b = rng.quat();
    const double s = rng.normal();
    EXPECT_LE((matrix_dual(a * b) - matrix_dual(a) * matrix_dual(b)).cwiseAbs().maxCoeff(),
              1e-12);
    EXPECT_LE((matrix_dual(a + s * b) - matrix_dual(a) - s * matrix_dual(b)).cwiseAbs().maxCoeff(),
              1e-12);
    EXPECT_EQ(matrix_dual(conj(a)), matrix_dual(a).transpose());
    EXPECT_EQ(from_matrix_dual(matrix_dual(a)), a);
  }
}
