#pragma once

#include <functional>

#include "hrcalc/qmatrix.hpp"

namespace hrcalc {

// f: H^M -> H. Must be deterministic.
using QFunction = std::function<Quaternion(const QVector&)>;
// F: H^M -> H^N.
using QVectorFunction = std::function<QVector(const QVector&)>;
using RealScalarFunction = std::function<double(double)>;

// Partials with respect to the real coordinates of every entry.
struct RealPartials {
  QVector d_r, d_i, d_j, d_k;
};

struct HRGradient {
  QVector d_q, d_qi, d_qj, d_qk;
  QVector d_q_conj, d_qi_conj, d_qj_conj, d_qk_conj;
};

// 1e-5 * max(1, |at|). Every `h` argument below uses this when h <= 0.
double default_step(const QVector& at);

// Central differences. Throws NumericError naming the probe on a
// non-finite evaluation and UsageError on an empty point.
RealPartials real_partials(const QFunction& f, const QVector& at, double h = 0.0);

// Maps partials to HR derivatives (units on the left):
//   df/dq^mu  = (p_r - i^mu p_i - j^mu p_j - k^mu p_k) / 4
//   df/dq^mu* = (p_r + i^mu p_i + j^mu p_j + k^mu p_k) / 4
// where x^mu = mu x mu^-1 for any nonzero mu.
HRGradient hr_from_partials(const RealPartials& p);
HRGradient hr_gradient(const QFunction& f, const QVector& at, double h = 0.0);

// Inverse of the HR* map: p = A^H [d_q*; d_qi*; d_qj*; d_qk*].
RealPartials partials_from_hr_conj(const HRGradient& g);

// Derivative with respect to q^mu (or q^mu* when conjugate is set) for an
// arbitrary nonzero mu, entry-wise over the argument vector.
QVector hr_derivative(const RealPartials& p, const Quaternion& mu, bool conjugate);
QVector hr_derivative(const QFunction& f, const QVector& at, const Quaternion& mu,
                      bool conjugate, double h = 0.0);
// Same with the units placed on the right of the partials.
QVector hr_derivative_right(const RealPartials& p, const Quaternion& mu, bool conjugate);

// |p_r + i p_i + j p_j + k p_k| for a scalar argument (M = 1), or the
// Euclidean norm over entries for M > 1.
double check_crf(const QFunction& f, const QVector& at, double h = 0.0);

// Right-hand side f dg/dq^(f* xi) + df/dq^xi g for the product f g, scalar
// argument only (the conjugate flag gives the q^xi* form). The rotation axis
// f* xi is used unnormalised; the map x -> mu x mu^-1 is scale invariant.
// Throws DomainError when f(at) = 0.
Quaternion product_rule_derivative(const QFunction& f, const QFunction& g, const QVector& at,
                                   const Quaternion& xi, double h = 0.0,
                                   bool conjugate = false);

// max |(df/dq^xi)^nu - d(f^nu)/dq^(nu xi)| over entries.
double rotation_rule_check(const QFunction& f, const QVector& at, const Quaternion& nu,
                           const Quaternion& xi, double h = 0.0);
// max |d(nu f)/dq^xi - nu df/dq^(nu^-1 xi)| over entries.
double multiplication_rule_check(const QFunction& f, const QVector& at, const Quaternion& nu,
                                 const Quaternion& xi, double h = 0.0);
// max |(df/dq^mu*)^* - right derivative of f* w.r.t. q^mu| over entries.
double conjugate_rule_check(const QFunction& f, const QVector& at, const Quaternion& mu,
                            double h = 0.0);

struct TaylorResult {
  Quaternion predicted;
  Quaternion actual;
};

// predicted = f(x) + sum over entries and zeta of conj(dx^zeta) df/dq^zeta*.
TaylorResult taylor_first_order(const QFunction& f, const QVector& x, const QVector& dx,
                                double h = 0.0);

// Gradient of fr(g(q)) for real-valued g: dg/dq^xi* fr'(g). Throws
// DomainError when g has an imaginary part above 1e-10 at any probe.
HRGradient chain_rule_real_inner(const QFunction& g, const RealScalarFunction& fr,
                                 const QVector& at, double h = 0.0);

// Real Jacobian of the stacked components [r; i; j; k] (4N x 4M).
Eigen::MatrixXd real_jacobian(const QVectorFunction& f, const QVector& at, double h = 0.0);
// Augmented Jacobian J with dF^a = J dq^a (4N x 4M).
QMatrix augmented_jacobian(const QVectorFunction& f, const QVector& at, double h = 0.0);

}  // namespace hrcalc
