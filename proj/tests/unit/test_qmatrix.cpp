#include <gtest/gtest.h>

#include <sstream>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"
#include "hrcalc/qmatrix.hpp"
#include "hrcalc/statistics.hpp"
#include "test_random.hpp"

using namespace hrcalc;
using hrcalc::testing::Rand;

namespace {
const Quaternion I = Quaternion::unit_i();
const Quaternion J = Quaternion::unit_j();
const Quaternion K = Quaternion::unit_k();
}  // namespace

TEST(QMatrix, BasicAlgebra) {
  Rand rng(11);
  const QMatrix a = rng.mat(3, 4), b = rng.mat(4, 2);
  EXPECT_EQ(QMatrix::identity(3) * a, a);
  EXPECT_EQ(hermitian(hermitian(a)), a);
  EXPECT_LE(max_abs_diff(hermitian(a * b), hermitian(b) * hermitian(a)), 1e-12);
  EXPECT_THROW(a * a, UsageError);
  EXPECT_THROW(a + b, UsageError);
  // Scalars multiply from the declared side.
  const QMatrix l = scale_left(I, a), r = scale_right(a, I);
  EXPECT_GT(max_abs_diff(l, r), 1e-3);
  EXPECT_EQ(l(1, 2), I * a(1, 2));
  EXPECT_EQ(r(1, 2), a(1, 2) * I);
}

TEST(QMatrix, RealEmbeddingHomomorphism) {
  EXPECT_TRUE(real_embed(QMatrix::identity(3)).isApprox(Eigen::MatrixXd::Identity(12, 12)));
  QMatrix qi(1, 1);
  qi(0, 0) = I;
  EXPECT_EQ(real_embed(qi), Eigen::MatrixXd(matrix_dual(I)));
  Rand rng(12);
  for (int n = 0; n < 200; ++n) {
    const QMatrix a = rng.mat(3, 2), b = rng.mat(2, 4);
    EXPECT_LE((real_embed(a * b) - real_embed(a) * real_embed(b)).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_LE((real_embed(hermitian(a)) - real_embed(a).transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(real_unembed(real_embed(a)), a);
  }
  Eigen::MatrixXd bad = real_embed(rng.mat(2, 2));
  bad(1, 1) += 1e-6;
  EXPECT_THROW(real_unembed(bad), UsageError);
  EXPECT_THROW(real_unembed(Eigen::MatrixXd::Zero(3, 4)), UsageError);
}

TEST(QMatrix, Inverse) {
  EXPECT_EQ(qinverse(QMatrix::identity(2)), QMatrix::identity(2));
  const QMatrix d = QMatrix::diagonal({Quaternion(2), Quaternion(2)});
  EXPECT_LE(max_abs_diff(qinverse(d), QMatrix::diagonal({Quaternion(0.5), Quaternion(0.5)})),
            1e-15);
  Rand rng(13);
  for (int n = 0; n < 50; ++n) {
    QMatrix a = rng.mat(4, 4);
    for (std::size_t k = 0; k < 4; ++k) a(k, k) += Quaternion(4.0);
    const QMatrix ai = qinverse(a);
    EXPECT_LE(max_abs_diff(a * ai, QMatrix::identity(4)), 1e-8);
    EXPECT_LE(max_abs_diff(ai * a, QMatrix::identity(4)), 1e-8);
  }
  QMatrix sing(2, 2);
  sing(0, 0) = I;
  sing(0, 1) = J;
  sing(1, 0) = K * I;  // = J
  sing(1, 1) = K * J;  // = -I; row 2 = K * row 1
  try {
    qinverse(sing);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_GT(e.condition(), 1e12);
  }
}

TEST(QMatrix, SpectralRadius) {
  EXPECT_NEAR(spectral_radius(QMatrix::identity(3)), 1.0, 1e-14);
  EXPECT_NEAR(spectral_radius(QMatrix::diagonal({0.5 * I})), 0.5, 1e-14);
  Rand rng(14);
  for (int n = 0; n < 20; ++n) {
    QMatrix a = rng.mat(3, 3);
    a *= 0.9 / spectral_radius(a);
    EXPECT_NEAR(spectral_radius(a), 0.9, 1e-6);
  }
}

TEST(QMatrix, HermitianPsd) {
  Rand rng(15);
  const QMatrix p = rng.hpd(3, 0.0);
  EXPECT_TRUE(is_hermitian_psd(p));
  QMatrix neg = p;
  neg(0, 0) -= Quaternion(100.0);
  EXPECT_FALSE(is_hermitian_psd(neg));
  QMatrix nonh = p;
  nonh(0, 1) += Quaternion(1e-6);
  EXPECT_FALSE(is_hermitian_psd(nonh));
  EXPECT_TRUE(is_hermitian(symmetrize(nonh), 1e-14));
}

TEST(Augmentation, ExamplesAndRoundTrip) {
  const AugmentedVector one = augment({Quaternion(1)});
  EXPECT_EQ(one.stacked, QVector(4, Quaternion(1)));
  const QVector ai = augment_stacked({I});
  EXPECT_EQ(ai, (QVector{I, I, -I, -I}));
  Rand rng(16);
  for (int n = 0; n < 100; ++n) {
    const QVector v = rng.vec(5);
    const AugmentedVector a = augment(v);
    EXPECT_LE(max_abs_diff(deaugment(a), v), 1e-12);
    for (std::size_t m = 0; m < 5; ++m) {
      EXPECT_EQ(a.stacked[5 + m], involution(v[m], I));
      EXPECT_LE(max_abs_diff(a.stacked[10 + m], involution(v[m], J)), 1e-15);
      EXPECT_LE(max_abs_diff(a.stacked[15 + m], involution(v[m], K)), 1e-15);
    }
  }
  QVector bad = augment_stacked(rng.vec(2));
  bad[3] += Quaternion(1e-6);
  EXPECT_THROW(deaugment(bad), UsageError);
  EXPECT_NO_THROW(deaugment(bad, false));
  EXPECT_THROW(deaugment(QVector(3)), UsageError);
}

TEST(Augmentation, MatrixIdentity) {
  const QMatrix a1 = build_augmentation_matrix(1);
  EXPECT_EQ(a1(0, 0), Quaternion(1));
  EXPECT_EQ(a1(0, 1), I);
  EXPECT_EQ(a1(0, 2), J);
  EXPECT_EQ(a1(0, 3), K);
  EXPECT_NE(real_embed(a1).determinant(), 0.0);
  for (std::size_t m : {1u, 2u, 5u}) {
    const QMatrix a = build_augmentation_matrix(m);
    EXPECT_LE(max_abs_diff(a * (0.25 * hermitian(a)), QMatrix::identity(4 * m)), 1e-12);
    EXPECT_LE(max_abs_diff(a * hermitian(a), 4.0 * QMatrix::identity(4 * m)), 1e-12);
  }
  // A maps stacked real components onto the augmented vector.
  Rand rng(17);
  const QVector v = rng.vec(3);
  const Eigen::VectorXd x = real_components(v);
  QVector xr(12);
  for (int n = 0; n < 12; ++n) xr[n] = Quaternion(x(n));
  EXPECT_LE(max_abs_diff(build_augmentation_matrix(3) * xr, augment_stacked(v)), 1e-12);
  EXPECT_EQ(from_real_components(x), v);
}

TEST(Augmentation, PerturbationHook) {
  test_hooks::set_augmentation_perturbation(1e-6);
  const QMatrix a = build_augmentation_matrix(2);
  test_hooks::set_augmentation_perturbation(0.0);
  EXPECT_GT(max_abs_diff(a * (0.25 * hermitian(a)), QMatrix::identity(8)), 1e-7);
}

TEST(Augmentation, OperatorsFromReal) {
  Rand rng(18);
  const Eigen::MatrixXd l = Eigen::MatrixXd::Random(8, 12);
  const QMatrix la = augmented_operator_from_real(l);
  const QVector v = rng.vec(3);
  const QVector y = from_real_components(l * real_components(v));
  EXPECT_LE(max_abs_diff(la * augment_stacked(v), augment_stacked(y)), 1e-12);
  EXPECT_LE((real_operator_from_augmented(la) - l).cwiseAbs().maxCoeff(), 1e-12);

  const QMatrix w = rng.mat(2, 3);
  EXPECT_LE(max_abs_diff(augmented_linear_operator(w) * augment_stacked(v),
                         augment_stacked(w * v)),
            1e-12);

  const Eigen::MatrixXd c = l * l.transpose();
  const QMatrix ca = augmented_covariance_from_real(c);
  EXPECT_TRUE(is_hermitian_psd(ca, 1e-9));
}

TEST(Statistics, SampleStats) {
  EXPECT_THROW(sample_stats({}), UsageError);
  EXPECT_THROW(sample_stats({QVector(2), QVector(3)}), UsageError);
  const QVector c{Quaternion(1, 2, 3, 4)};
  const SampleStats s0 = sample_stats({c, c, c});
  EXPECT_LE(max_abs_diff(s0.mean, augment_stacked(c)), 1e-15);
  EXPECT_EQ(max_abs(s0.aug_cov), 0.0);

  Rand rng(19);
  std::vector<QVector> samples;
  const double sigma = 0.7;
  for (int n = 0; n < 20000; ++n) samples.push_back({rng.quat(sigma)});
  const SampleStats s = sample_stats(samples);
  EXPECT_TRUE(is_hermitian(s.aug_cov, 1e-10));
  EXPECT_GE(min_embedded_eigenvalue(s.aug_cov), -1e-8);
  for (std::size_t d = 0; d < 4; ++d) EXPECT_NEAR(s.aug_cov(d, d).r, 4 * sigma * sigma, 0.05);

  // Real-only samples: every involution block is identical.
  std::vector<QVector> real;
  for (int n = 0; n < 50; ++n) real.push_back({Quaternion(rng.normal())});
  const SampleStats sr = sample_stats(real);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t cc = 0; cc < 4; ++cc) EXPECT_EQ(sr.aug_cov(r, cc), sr.aug_cov(0, 0));
}

TEST(Statistics, AqcfBasics) {
  Rand rng(20);
  std::vector<QVector> samples;
  for (int n = 0; n < 10; ++n) samples.push_back(rng.vec(2));
  EXPECT_EQ(aqcf_eval(samples, QVector(2), I), Quaternion(1));
  const QVector q = rng.vec(2), s = rng.vec(2);
  const double t = inner(s, q).r;
  const Quaternion xi = rng.pure_unit();
  EXPECT_LE(max_abs_diff(aqcf_eval({q}, s, xi), Quaternion(std::cos(t)) + std::sin(t) * xi),
            1e-14);
  EXPECT_THROW(aqcf_eval({q}, s, Quaternion(0, 2)), DomainError);
}

TEST(Io, CsvRoundTrip) {
  Rand rng(21);
  const QMatrix a = rng.mat(3, 2);
  const std::string text = qmatrix_to_csv(a);
  EXPECT_EQ(text.substr(0, text.find('\n')), "q0_0_r,q0_0_i,q0_0_j,q0_0_k,q0_1_r,q0_1_i,q0_1_j,q0_1_k");
  EXPECT_EQ(qmatrix_from_csv(text), a);
  EXPECT_THROW(qmatrix_from_csv("q0_0_r,q0_0_i,q0_0_j\n1,2,3\n"), UsageError);
  EXPECT_THROW(qmatrix_from_csv("q0_0_r,q0_0_i,q0_0_j,q0_0_k\n1,2,x,4\n"), UsageError);
  EXPECT_THROW(qmatrix_from_csv("q0_0_r,q0_0_i,q0_0_j,q0_0_k\n1,2,3\n"), UsageError);
}
