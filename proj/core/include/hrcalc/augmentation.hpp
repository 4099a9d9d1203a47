#pragma once

#include <Eigen/Dense>

#include <cstddef>

#include "hrcalc/qmatrix.hpp"

namespace hrcalc {

// Stack (q, q^i, q^j, q^k) of a base vector of length M.
struct AugmentedVector {
  std::size_t base_len = 0;
  QVector stacked;
};

AugmentedVector augment(const QVector& v);
// Same as augment(v).stacked.
QVector augment_stacked(const QVector& v);

// Applies (1/4) A^H. With strict set, blocks that are not the involutions of
// the recovered base by more than tol raise UsageError.
QVector deaugment(const AugmentedVector& a, bool strict = true, double tol = 1e-8);
QVector deaugment(const QVector& stacked, bool strict = true, double tol = 1e-8);

// The 4M x 4M block matrix A with q^a = A [q_r; q_i; q_j; q_k] and
// A (A^H / 4) = I.
QMatrix build_augmentation_matrix(std::size_t m);

// Real components stacked as [q_r; q_i; q_j; q_k], each block of length M.
Eigen::VectorXd real_components(const QVector& v);
QVector from_real_components(const Eigen::VectorXd& x);

// Real-linear map y_real = L x_real expressed on augmented vectors:
// A_out L (A_in^H / 4).
QMatrix augmented_operator_from_real(const Eigen::MatrixXd& l);
// Augmented covariance A C A^H of a real covariance C of stacked components.
QMatrix augmented_covariance_from_real(const Eigen::MatrixXd& c);
// Inverse of augmented_operator_from_real.
Eigen::MatrixXd real_operator_from_augmented(const QMatrix& la);

// Augmented form of the quaternion-linear map x -> W x, i.e.
// blockdiag(W, W^i, W^j, W^k).
QMatrix augmented_linear_operator(const QMatrix& w);

namespace test_hooks {
// Adds eps to the (0,0) entry of every matrix built by
// build_augmentation_matrix. Negative-control hook for self checks only.
void set_augmentation_perturbation(double eps);
double augmentation_perturbation();
}  // namespace test_hooks

}  // namespace hrcalc
