#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "hrcalc/quaternion.hpp"

namespace hrcalc {

using QVector = std::vector<Quaternion>;

// Dense row-major quaternion matrix.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  static QMatrix identity(std::size_t n);
  static QMatrix diagonal(const QVector& d);
  static QMatrix column(const QVector& v);
  static QMatrix row(const QVector& v);
  // Real matrix with zero imaginary parts.
  static QMatrix from_real(const Eigen::MatrixXd& m);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  Quaternion& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Quaternion& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<Quaternion> data() { return data_; }
  std::span<const Quaternion> data() const { return data_; }

  QMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const QMatrix& b);

  QVector column_vector(std::size_t c) const;

  QMatrix& operator+=(const QMatrix& o);
  QMatrix& operator-=(const QMatrix& o);
  QMatrix& operator*=(double s);

  friend bool operator==(const QMatrix&, const QMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Quaternion> data_;
};

QMatrix qadd(const QMatrix& a, const QMatrix& b);
QMatrix qsub(const QMatrix& a, const QMatrix& b);
QMatrix qmatmul(const QMatrix& a, const QMatrix& b);
QMatrix hermitian(const QMatrix& a);
QMatrix transpose(const QMatrix& a);
// Element-wise conjugate without transposition.
QMatrix conjugate(const QMatrix& a);
// s * A and A * s; the side matters for quaternion scalars.
QMatrix scale_left(const Quaternion& s, const QMatrix& a);
QMatrix scale_right(const QMatrix& a, const Quaternion& s);

inline QMatrix operator+(const QMatrix& a, const QMatrix& b) { return qadd(a, b); }
inline QMatrix operator-(const QMatrix& a, const QMatrix& b) { return qsub(a, b); }
inline QMatrix operator*(const QMatrix& a, const QMatrix& b) { return qmatmul(a, b); }
QMatrix operator*(double s, QMatrix a);
QMatrix operator*(QMatrix a, double s);

QVector matvec(const QMatrix& a, const QVector& x);
inline QVector operator*(const QMatrix& a, const QVector& x) { return matvec(a, x); }
// Row vector times matrix: (x^T A)^T.
QVector vecmat(const QVector& x, const QMatrix& a);

QVector operator+(const QVector& a, const QVector& b);
QVector operator-(const QVector& a, const QVector& b);
QVector operator*(double s, const QVector& a);
QVector scale_left(const Quaternion& s, const QVector& a);
QVector scale_right(const QVector& a, const Quaternion& s);
QVector conjugate(const QVector& a);

// a^H b
Quaternion inner(const QVector& a, const QVector& b);
// a^T b (no conjugation)
Quaternion dot_t(const QVector& a, const QVector& b);
// a b^H
QMatrix outer(const QVector& a, const QVector& b);
double norm_squared(const QVector& a);
double norm(const QVector& a);

double max_abs(const QMatrix& a);
double max_abs_diff(const QMatrix& a, const QMatrix& b);
double max_abs_diff(const QVector& a, const QVector& b);
bool all_finite(const QMatrix& a);
bool all_finite(const QVector& a);
Quaternion trace(const QMatrix& a);

// Real embedding: every entry replaced by its 4x4 matrix dual. The map is a
// ring homomorphism and embed(A^H) = embed(A)^T.
Eigen::MatrixXd real_embed(const QMatrix& a);
// Left inverse of real_embed. Rejects blocks that deviate from the dual
// structure by more than tol.
QMatrix real_unembed(const Eigen::MatrixXd& m, double tol = 1e-8);

// Reciprocal condition estimate of the real embedding (LU based).
double condition_estimate(const QMatrix& a);

// Inverse through the real embedding. Throws NumericError carrying the
// condition estimate when it exceeds max_condition.
QMatrix qinverse(const QMatrix& a, double max_condition = 1e12);

// max |eigenvalue| of the real embedding.
double spectral_radius(const QMatrix& a);

bool is_hermitian(const QMatrix& p, double tol = 1e-10);
double min_embedded_eigenvalue(const QMatrix& p);
bool is_hermitian_psd(const QMatrix& p, double tol = 1e-10);
// (P + P^H) / 2
QMatrix symmetrize(const QMatrix& p);

}  // namespace hrcalc
