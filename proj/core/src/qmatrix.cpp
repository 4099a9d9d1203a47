#include "hrcalc/qmatrix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "hrcalc/errors.hpp"

namespace hrcalc {

namespace {

void require_same_shape(const QMatrix& a, const QMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw UsageError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

void require_same_length(const QVector& a, const QVector& b, const char* op) {
  if (a.size() != b.size())
    throw UsageError(std::string(op) + ": length mismatch " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
}

void require_square(const QMatrix& a, const char* op) {
  if (!a.is_square()) throw UsageError(std::string(op) + ": matrix must be square");
}

}  // namespace

QMatrix QMatrix::identity(std::size_t n) {
  QMatrix m(n, n);
  for (std::size_t d = 0; d < n; ++d) m(d, d) = Quaternion(1.0);
  return m;
}

QMatrix QMatrix::diagonal(const QVector& d) {
  QMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

QMatrix QMatrix::column(const QVector& v) {
  QMatrix m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

QMatrix QMatrix::row(const QVector& v) {
  QMatrix m(1, v.size());
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

QMatrix QMatrix::from_real(const Eigen::MatrixXd& m) {
  QMatrix q(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      q(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = Quaternion(m(r, c));
  return q;
}

QMatrix QMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw UsageError("block: out of range");
  QMatrix b(nr, nc);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
  return b;
}

void QMatrix::set_block(std::size_t r0, std::size_t c0, const QMatrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
    throw UsageError("set_block: out of range");
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) (*this)(r0 + r, c0 + c) = b(r, c);
}

QVector QMatrix::column_vector(std::size_t c) const {
  if (c >= cols_) throw UsageError("column_vector: out of range");
  QVector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

QMatrix& QMatrix::operator+=(const QMatrix& o) {
  require_same_shape(*this, o, "qadd");
  for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
  return *this;
}

QMatrix& QMatrix::operator-=(const QMatrix& o) {
  require_same_shape(*this, o, "qsub");
  for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
  return *this;
}

QMatrix& QMatrix::operator*=(double s) {
  for (auto& q : data_) q *= s;
  return *this;
}

QMatrix qadd(const QMatrix& a, const QMatrix& b) {
  QMatrix out = a;
  out += b;
  return out;
}

QMatrix qsub(const QMatrix& a, const QMatrix& b) {
  QMatrix out = a;
  out -= b;
  return out;
}

QMatrix qmatmul(const QMatrix& a, const QMatrix& b) {
  if (a.cols() != b.rows())
    throw UsageError("qmatmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                     std::to_string(b.rows()) + " differ");
  QMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Quaternion& ark = a(r, k);
      if (ark.is_zero()) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

QMatrix hermitian(const QMatrix& a) {
  QMatrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = conj(a(r, c));
  return out;
}

QMatrix transpose(const QMatrix& a) {
  QMatrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

QMatrix conjugate(const QMatrix& a) {
  QMatrix out = a;
  for (auto& q : out.data()) q = conj(q);
  return out;
}

QMatrix scale_left(const Quaternion& s, const QMatrix& a) {
  QMatrix out = a;
  for (auto& q : out.data()) q = s * q;
  return out;
}

QMatrix scale_right(const QMatrix& a, const Quaternion& s) {
  QMatrix out = a;
  for (auto& q : out.data()) q = q * s;
  return out;
}

QMatrix operator*(double s, QMatrix a) { return a *= s; }
QMatrix operator*(QMatrix a, double s) { return a *= s; }

QVector matvec(const QMatrix& a, const QVector& x) {
  if (a.cols() != x.size())
    throw UsageError("matvec: matrix has " + std::to_string(a.cols()) +
                     " columns, vector has " + std::to_string(x.size()) + " entries");
  QVector y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    Quaternion acc;
    for (std::size_t c = 0; c < a.cols(); ++c) acc += a(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

QVector vecmat(const QVector& x, const QMatrix& a) {
  if (a.rows() != x.size()) throw UsageError("vecmat: dimension mismatch");
  QVector y(a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += x[r] * a(r, c);
  return y;
}

QVector operator+(const QVector& a, const QVector& b) {
  require_same_length(a, b, "vector add");
  QVector out(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = a[n] + b[n];
  return out;
}

QVector operator-(const QVector& a, const QVector& b) {
  require_same_length(a, b, "vector sub");
  QVector out(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = a[n] - b[n];
  return out;
}

QVector operator*(double s, const QVector& a) {
  QVector out = a;
  for (auto& q : out) q *= s;
  return out;
}

QVector scale_left(const Quaternion& s, const QVector& a) {
  QVector out = a;
  for (auto& q : out) q = s * q;
  return out;
}

QVector scale_right(const QVector& a, const Quaternion& s) {
  QVector out = a;
  for (auto& q : out) q = q * s;
  return out;
}

QVector conjugate(const QVector& a) {
  QVector out = a;
  for (auto& q : out) q = conj(q);
  return out;
}

Quaternion inner(const QVector& a, const QVector& b) {
  require_same_length(a, b, "inner");
  Quaternion acc;
  for (std::size_t n = 0; n < a.size(); ++n) acc += conj(a[n]) * b[n];
  return acc;
}

Quaternion dot_t(const QVector& a, const QVector& b) {
  require_same_length(a, b, "dot_t");
  Quaternion acc;
  for (std::size_t n = 0; n < a.size(); ++n) acc += a[n] * b[n];
  return acc;
}

QMatrix outer(const QVector& a, const QVector& b) {
  QMatrix out(a.size(), b.size());
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < b.size(); ++c) out(r, c) = a[r] * conj(b[c]);
  return out;
}

double norm_squared(const QVector& a) {
  double s = 0.0;
  for (const auto& q : a) s += norm_squared(q);
  return s;
}

double norm(const QVector& a) { return std::sqrt(norm_squared(a)); }

double max_abs(const QMatrix& a) {
  double m = 0.0;
  for (const auto& q : a.data())
    m = std::max({m, std::abs(q.r), std::abs(q.i), std::abs(q.j), std::abs(q.k)});
  return m;
}

double max_abs_diff(const QMatrix& a, const QMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t n = 0; n < a.data().size(); ++n)
    m = std::max(m, max_abs_diff(a.data()[n], b.data()[n]));
  return m;
}

double max_abs_diff(const QVector& a, const QVector& b) {
  require_same_length(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, max_abs_diff(a[n], b[n]));
  return m;
}

bool all_finite(const QMatrix& a) {
  return std::all_of(a.data().begin(), a.data().end(),
                     [](const Quaternion& q) { return is_finite(q); });
}

bool all_finite(const QVector& a) {
  return std::all_of(a.begin(), a.end(), [](const Quaternion& q) { return is_finite(q); });
}

Quaternion trace(const QMatrix& a) {
  require_square(a, "trace");
  Quaternion t;
  for (std::size_t d = 0; d < a.rows(); ++d) t += a(d, d);
  return t;
}

Eigen::MatrixXd real_embed(const QMatrix& a) {
  Eigen::MatrixXd m(4 * a.rows(), 4 * a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      m.block<4, 4>(static_cast<Eigen::Index>(4 * r), static_cast<Eigen::Index>(4 * c)) =
          matrix_dual(a(r, c));
  return m;
}

QMatrix real_unembed(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() % 4 != 0 || m.cols() % 4 != 0)
    throw UsageError("real_unembed: dimensions must be multiples of 4");
  QMatrix a(static_cast<std::size_t>(m.rows() / 4), static_cast<std::size_t>(m.cols() / 4));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const RealDual4 blk =
          m.block<4, 4>(static_cast<Eigen::Index>(4 * r), static_cast<Eigen::Index>(4 * c));
      // Average over the dual pattern rather than trusting a single column.
      const RealDual4 p = blk;
      const Quaternion q{(p(0, 0) + p(1, 1) + p(2, 2) + p(3, 3)) / 4.0,
                         (p(1, 0) - p(0, 1) + p(2, 3) - p(3, 2)) / 4.0,
                         (p(2, 0) - p(0, 2) + p(3, 1) - p(1, 3)) / 4.0,
                         (-p(3, 0) + p(0, 3) + p(2, 1) - p(1, 2)) / 4.0};
      const double dev = (matrix_dual(q) - blk).cwiseAbs().maxCoeff();
      if (!(dev <= tol))
        throw UsageError("real_unembed: block (" + std::to_string(r) + "," + std::to_string(c) +
                         ") is not a quaternion dual (deviation " + std::to_string(dev) + ")");
      a(r, c) = q;
    }
  return a;
}

double condition_estimate(const QMatrix& a) {
  require_square(a, "condition_estimate");
  if (a.rows() == 0) return 1.0;
  const Eigen::MatrixXd e = real_embed(a);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(e);
  const double rc = lu.rcond();
  return rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
}

QMatrix qinverse(const QMatrix& a, double max_condition) {
  require_square(a, "qinverse");
  if (!all_finite(a)) throw NumericError("qinverse: non-finite input", 0.0);
  const Eigen::MatrixXd e = real_embed(a);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(e);
  const double rc = lu.rcond();
  const double cond = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(cond < max_condition))
    throw NumericError("qinverse: matrix is singular or ill-conditioned (condition estimate " +
                           std::to_string(cond) + ")",
                       cond);
  Eigen::MatrixXd inv = lu.inverse();
  // The inverse of a dual-structured matrix is dual-structured; project away
  // rounding rather than rejecting it.
  return real_unembed(inv, std::numeric_limits<double>::infinity());
}

double spectral_radius(const QMatrix& a) {
  require_square(a, "spectral_radius");
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(real_embed(a), false);
  if (es.info() != Eigen::Success) throw NumericError("spectral_radius: eigen solver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_hermitian(const QMatrix& p, double tol) {
  if (!p.is_square()) return false;
  for (std::size_t r = 0; r < p.rows(); ++r)
    for (std::size_t c = r; c < p.cols(); ++c)
      if (max_abs_diff(p(r, c), conj(p(c, r))) > tol) return false;
  return true;
}

double min_embedded_eigenvalue(const QMatrix& p) {
  require_square(p, "min_embedded_eigenvalue");
  if (p.rows() == 0) return 0.0;
  const Eigen::MatrixXd e = real_embed(p);
  const Eigen::MatrixXd sym = 0.5 * (e + e.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_hermitian_psd(const QMatrix& p, double tol) {
  return is_hermitian(p, tol) && min_embedded_eigenvalue(p) >= -tol;
}

QMatrix symmetrize(const QMatrix& p) {
  require_square(p, "symmetrize");
  QMatrix out = p + hermitian(p);
  out *= 0.5;
  return out;
}

}  // namespace hrcalc
