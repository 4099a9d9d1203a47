#pragma once

#include <Eigen/Core>

#include <cmath>
#include <iosfwd>

namespace hrcalc {

// Real quaternion q = r + i*x + j*y + k*z with the Hamilton product
// (ij = k, jk = i, ki = j, i^2 = j^2 = k^2 = ijk = -1).
struct Quaternion {
  double r = 0.0;
  double i = 0.0;
  double j = 0.0;
  double k = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double r_, double i_ = 0.0, double j_ = 0.0,
                       double k_ = 0.0)
      : r(r_), i(i_), j(j_), k(k_) {}

  static constexpr Quaternion unit_i() { return {0.0, 1.0, 0.0, 0.0}; }
  static constexpr Quaternion unit_j() { return {0.0, 0.0, 1.0, 0.0}; }
  static constexpr Quaternion unit_k() { return {0.0, 0.0, 0.0, 1.0}; }

  constexpr Quaternion real_part() const { return {r, 0.0, 0.0, 0.0}; }
  constexpr Quaternion imag_part() const { return {0.0, i, j, k}; }
  constexpr bool is_zero() const {
    return r == 0.0 && i == 0.0 && j == 0.0 && k == 0.0;
  }

  constexpr double operator[](int c) const {
    return c == 0 ? r : c == 1 ? i : c == 2 ? j : k;
  }
  constexpr double& operator[](int c) {
    return c == 0 ? r : c == 1 ? i : c == 2 ? j : k;
  }

  constexpr Quaternion& operator+=(const Quaternion& o) {
    r += o.r; i += o.i; j += o.j; k += o.k;
    return *this;
  }
  constexpr Quaternion& operator-=(const Quaternion& o) {
    r -= o.r; i -= o.i; j -= o.j; k -= o.k;
    return *this;
  }
  constexpr Quaternion& operator*=(double s) {
    r *= s; i *= s; j *= s; k *= s;
    return *this;
  }
  constexpr Quaternion& operator*=(const Quaternion& o);

  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

constexpr Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
constexpr Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
constexpr Quaternion operator-(const Quaternion& a) { return {-a.r, -a.i, -a.j, -a.k}; }
constexpr Quaternion operator*(Quaternion a, double s) { return a *= s; }
constexpr Quaternion operator*(double s, Quaternion a) { return a *= s; }
constexpr Quaternion operator/(Quaternion a, double s) { return a *= (1.0 / s); }

// Hamilton product.
constexpr Quaternion mul(const Quaternion& a, const Quaternion& b) {
  return {a.r * b.r - a.i * b.i - a.j * b.j - a.k * b.k,
          a.r * b.i + a.i * b.r + a.j * b.k - a.k * b.j,
          a.r * b.j - a.i * b.k + a.j * b.r + a.k * b.i,
          a.r * b.k + a.i * b.j - a.j * b.i + a.k * b.r};
}

constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return mul(a, b);
}

constexpr Quaternion& Quaternion::operator*=(const Quaternion& o) {
  *this = mul(*this, o);
  return *this;
}

constexpr Quaternion conj(const Quaternion& q) { return {q.r, -q.i, -q.j, -q.k}; }

constexpr double norm_squared(const Quaternion& q) {
  return q.r * q.r + q.i * q.i + q.j * q.j + q.k * q.k;
}

inline double norm(const Quaternion& q) { return std::sqrt(norm_squared(q)); }

// Real part of a * conj(b); the Euclidean inner product on R^4.
constexpr double dot(const Quaternion& a, const Quaternion& b) {
  return a.r * b.r + a.i * b.i + a.j * b.j + a.k * b.k;
}

bool is_finite(const Quaternion& q);

// Throws DomainError for q == 0.
Quaternion inv(const Quaternion& q);

bool is_pure(const Quaternion& q, double tol = 0.0);

// q^axis = axis * q * axis^-1. The axis must be pure and nonzero; the
// generalised form below accepts any nonzero quaternion.
Quaternion involution(const Quaternion& q, const Quaternion& axis);
Quaternion rotate_by(const Quaternion& q, const Quaternion& mu);

// The three canonical involutions used by the augmented representation.
constexpr Quaternion involution_i(const Quaternion& q) { return {q.r, q.i, -q.j, -q.k}; }
constexpr Quaternion involution_j(const Quaternion& q) { return {q.r, -q.i, q.j, -q.k}; }
constexpr Quaternion involution_k(const Quaternion& q) { return {q.r, -q.i, -q.j, q.k}; }

struct PolarForm {
  double magnitude = 0.0;
  Quaternion axis{0.0, 1.0, 0.0, 0.0};
  double angle = 0.0;
};

// q = |q| (cos(angle) + axis sin(angle)), angle in [0, pi]. When Im(q) = 0
// the axis is reported as i and the angle is 0 or pi.
PolarForm to_polar(const Quaternion& q);
Quaternion from_polar(const PolarForm& p);

// e^(pure) for pure-imaginary arguments only.
Quaternion qexp(const Quaternion& pure);

// mu * q_pre * mu^-1 with mu = exp(axis * angle / 2); axis must be unit pure.
Quaternion rotate(const Quaternion& q_pre, const Quaternion& axis, double angle);

// Bloch-sphere qubit state as a unit pure quaternion.
Quaternion qubit_to_quaternion(double theta, double phi);

// 4x4 real matrix dual. First column is (r, i, j, -k); the map is an algebra
// homomorphism and dual(conj(q)) = dual(q)^T.
using RealDual4 = Eigen::Matrix4d;
RealDual4 matrix_dual(const Quaternion& q);
// Inverse of matrix_dual read from the first column (no structure check).
Quaternion from_matrix_dual(const RealDual4& m);

// Component-wise absolute comparison.
bool approx_equal(const Quaternion& a, const Quaternion& b, double tol = 1e-12);
double max_abs_diff(const Quaternion& a, const Quaternion& b);

std::ostream& operator<<(std::ostream& os, const Quaternion& q);

}  // namespace hrcalc
