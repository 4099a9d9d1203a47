#include "hrcalc/quaternion.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>

#include "hrcalc/errors.hpp"

namespace hrcalc {

bool is_finite(const Quaternion& q) {
  return std::isfinite(q.r) && std::isfinite(q.i) && std::isfinite(q.j) &&
         std::isfinite(q.k);
}

Quaternion inv(const Quaternion& q) {
  const double n2 = norm_squared(q);
  if (n2 == 0.0) throw DomainError("inverse of the zero quaternion");
  return conj(q) / n2;
}

bool is_pure(const Quaternion& q, double tol) { return std::abs(q.r) <= tol; }

Quaternion rotate_by(const Quaternion& q, const Quaternion& mu) {
  if (mu.is_zero()) throw DomainError("rotation by the zero quaternion");
  return mu * q * inv(mu);
}

Quaternion involution(const Quaternion& q, const Quaternion& axis) {
  if (!is_pure(axis) || axis.is_zero())
    throw DomainError("involution axis must be pure imaginary and nonzero");
  return rotate_by(q, axis);
}

PolarForm to_polar(const Quaternion& q) {
  const double mag = norm(q);
  if (mag == 0.0) throw DomainError("polar form of the zero quaternion");
  const Quaternion im = q.imag_part();
  const double im_norm = norm(im);
  PolarForm p;
  p.magnitude = mag;
  if (im_norm == 0.0) {
    p.axis = Quaternion::unit_i();
    p.angle = q.r > 0.0 ? 0.0 : std::numbers::pi;
    return p;
  }
  p.axis = im / im_norm;
  p.angle = std::atan2(im_norm, q.r);
  return p;
}

Quaternion from_polar(const PolarForm& p) {
  return p.magnitude * (Quaternion(std::cos(p.angle)) + p.axis * std::sin(p.angle));
}

Quaternion qexp(const Quaternion& pure) {
  if (pure.r != 0.0) throw DomainError("qexp is defined here for pure arguments only");
  const double theta = norm(pure);
  if (theta == 0.0) return Quaternion(1.0);
  const Quaternion axis = pure / theta;
  return Quaternion(std::cos(theta)) + axis * std::sin(theta);
}

Quaternion rotate(const Quaternion& q_pre, const Quaternion& axis, double angle) {
  if (!is_pure(q_pre, 1e-12)) throw DomainError("rotate expects a pure quaternion");
  if (!is_pure(axis, 1e-12) || std::abs(norm(axis) - 1.0) > 1e-12)
    throw DomainError("rotation axis must be a unit pure quaternion");
  const Quaternion mu =
      Quaternion(std::cos(angle / 2.0)) + axis.imag_part() * std::sin(angle / 2.0);
  // mu is unit, so mu^-1 = conj(mu).
  Quaternion out = mu * q_pre * conj(mu);
  out.r = 0.0;
  return out;
}

Quaternion qubit_to_quaternion(double theta, double phi) {
  return {0.0, std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

RealDual4 matrix_dual(const Quaternion& q) {
  RealDual4 m;
  // clang-format off
  m <<  q.r, -q.i, -q.j,  q.k,
        q.i,  q.r, -q.k, -q.j,
        q.j,  q.k,  q.r,  q.i,
       -q.k,  q.j, -q.i,  q.r;
  // clang-format on
  return m;
}

Quaternion from_matrix_dual(const RealDual4& m) {
  return {m(0, 0), m(1, 0), m(2, 0), -m(3, 0)};
}

double max_abs_diff(const Quaternion& a, const Quaternion& b) {
  return std::max({std::abs(a.r - b.r), std::abs(a.i - b.i), std::abs(a.j - b.j),
                   std::abs(a.k - b.k)});
}

bool approx_equal(const Quaternion& a, const Quaternion& b, double tol) {
  return max_abs_diff(a, b) <= tol;
}

std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
  return os << '(' << q.r << ", " << q.i << ", " << q.j << ", " << q.k << ')';
}

}  // namespace hrcalc
