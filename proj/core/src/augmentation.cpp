#include "hrcalc/augmentation.hpp"

#include <atomic>
#include <string>

#include "hrcalc/errors.hpp"

namespace hrcalc {

namespace {

std::atomic<double> g_perturbation{0.0};

Quaternion involution_by_block(const Quaternion& q, std::size_t block) {
  switch (block) {
    case 1: return involution_i(q);
    case 2: return involution_j(q);
    case 3: return involution_k(q);
    default: return q;
  }
}

// Signs of the unit multiplying each real component in block row b of A.
constexpr double kSign[4][4] = {
    {1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};

}  // namespace

namespace test_hooks {
void set_augmentation_perturbation(double eps) { g_perturbation.store(eps); }
double augmentation_perturbation() { return g_perturbation.load(); }
}  // namespace test_hooks

AugmentedVector augment(const QVector& v) { return {v.size(), augment_stacked(v)}; }

QVector augment_stacked(const QVector& v) {
  const std::size_t m = v.size();
  QVector out(4 * m);
  for (std::size_t n = 0; n < m; ++n) {
    out[n] = v[n];
    out[m + n] = involution_i(v[n]);
    out[2 * m + n] = involution_j(v[n]);
    out[3 * m + n] = involution_k(v[n]);
  }
  return out;
}

QVector deaugment(const AugmentedVector& a, bool strict, double tol) {
  if (a.stacked.size() != 4 * a.base_len)
    throw UsageError("deaugment: stacked length " + std::to_string(a.stacked.size()) +
                     " does not match base length " + std::to_string(a.base_len));
  return deaugment(a.stacked, strict, tol);
}

QVector deaugment(const QVector& stacked, bool strict, double tol) {
  if (stacked.size() % 4 != 0)
    throw UsageError("deaugment: length " + std::to_string(stacked.size()) +
                     " is not divisible by 4");
  const std::size_t m = stacked.size() / 4;
  QVector base(m);
  // Each involution is self-inverse, so undoing it per block and averaging is
  // the first block row of A^H / 4 applied to the stack.
  for (std::size_t n = 0; n < m; ++n) {
    Quaternion acc;
    for (std::size_t b = 0; b < 4; ++b) acc += involution_by_block(stacked[b * m + n], b);
    base[n] = acc * 0.25;
  }
  if (strict) {
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t n = 0; n < m; ++n) {
        const double dev = max_abs_diff(stacked[b * m + n], involution_by_block(base[n], b));
        if (dev > tol)
          throw UsageError("deaugment: block " + std::to_string(b) + " entry " +
                           std::to_string(n) + " is inconsistent (deviation " +
                           std::to_string(dev) + ")");
      }
  }
  return base;
}

QMatrix build_augmentation_matrix(std::size_t m) {
  if (m == 0) throw UsageError("build_augmentation_matrix: M must be at least 1");
  const Quaternion units[4] = {Quaternion(1.0), Quaternion::unit_i(), Quaternion::unit_j(),
                               Quaternion::unit_k()};
  QMatrix a(4 * m, 4 * m);
  for (std::size_t br = 0; br < 4; ++br)
    for (std::size_t bc = 0; bc < 4; ++bc) {
      const Quaternion e = kSign[br][bc] * units[bc];
      for (std::size_t n = 0; n < m; ++n) a(br * m + n, bc * m + n) = e;
    }
  a(0, 0).r += g_perturbation.load();
  return a;
}

Eigen::VectorXd real_components(const QVector& v) {
  const auto m = static_cast<Eigen::Index>(v.size());
  Eigen::VectorXd x(4 * m);
  for (Eigen::Index n = 0; n < m; ++n) {
    const Quaternion& q = v[static_cast<std::size_t>(n)];
    x(n) = q.r;
    x(m + n) = q.i;
    x(2 * m + n) = q.j;
    x(3 * m + n) = q.k;
  }
  return x;
}

QVector from_real_components(const Eigen::VectorXd& x) {
  if (x.size() % 4 != 0) throw UsageError("from_real_components: length not divisible by 4");
  const Eigen::Index m = x.size() / 4;
  QVector v(static_cast<std::size_t>(m));
  for (Eigen::Index n = 0; n < m; ++n)
    v[static_cast<std::size_t>(n)] = {x(n), x(m + n), x(2 * m + n), x(3 * m + n)};
  return v;
}

QMatrix augmented_operator_from_real(const Eigen::MatrixXd& l) {
  if (l.rows() % 4 != 0 || l.cols() % 4 != 0)
    throw UsageError("augmented_operator_from_real: dimensions must be multiples of 4");
  const QMatrix a_out = build_augmentation_matrix(static_cast<std::size_t>(l.rows() / 4));
  const QMatrix a_in = build_augmentation_matrix(static_cast<std::size_t>(l.cols() / 4));
  return 0.25 * (a_out * QMatrix::from_real(l) * hermitian(a_in));
}

QMatrix augmented_covariance_from_real(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols() || c.rows() % 4 != 0)
    throw UsageError("augmented_covariance_from_real: square multiple-of-4 matrix expected");
  const QMatrix a = build_augmentation_matrix(static_cast<std::size_t>(c.rows() / 4));
  return a * QMatrix::from_real(c) * hermitian(a);
}

Eigen::MatrixXd real_operator_from_augmented(const QMatrix& la) {
  if (la.rows() % 4 != 0 || la.cols() % 4 != 0)
    throw UsageError("real_operator_from_augmented: dimensions must be multiples of 4");
  const QMatrix a_out = build_augmentation_matrix(la.rows() / 4);
  const QMatrix a_in = build_augmentation_matrix(la.cols() / 4);
  const QMatrix l = 0.25 * (hermitian(a_out) * la * a_in);
  Eigen::MatrixXd out(l.rows(), l.cols());
  for (std::size_t r = 0; r < l.rows(); ++r)
    for (std::size_t c = 0; c < l.cols(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = l(r, c).r;
  return out;
}

QMatrix augmented_linear_operator(const QMatrix& w) {
  const std::size_t r = w.rows();
  const std::size_t c = w.cols();
  QMatrix out(4 * r, 4 * c);
  for (std::size_t b = 0; b < 4; ++b)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) out(b * r + i, b * c + j) = involution_by_block(w(i, j), b);
  return out;
}

}  // namespace hrcalc
