#include "hrcalc/hr_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"

namespace hrcalc {

namespace {

const Quaternion kUnits[3] = {Quaternion::unit_i(), Quaternion::unit_j(), Quaternion::unit_k()};

double resolve_step(double h, const QVector& at) { return h > 0.0 ? h : default_step(at); }

std::string describe(const QVector& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t n = 0; n < v.size(); ++n) os << (n ? ", " : "") << v[n];
  os << ']';
  return os.str();
}

Quaternion eval_checked(const QFunction& f, const QVector& x) {
  const Quaternion y = f(x);
  if (!is_finite(y)) throw NumericError("non-finite function value at probe " + describe(x));
  return y;
}

QVector eval_checked(const QVectorFunction& f, const QVector& x) {
  QVector y = f(x);
  if (!all_finite(y)) throw NumericError("non-finite function value at probe " + describe(x));
  return y;
}

}  // namespace

double default_step(const QVector& at) { return 1e-5 * std::max(1.0, norm(at)); }

RealPartials real_partials(const QFunction& f, const QVector& at, double h) {
  if (at.empty()) throw UsageError("real_partials: empty argument");
  h = resolve_step(h, at);
  const std::size_t m = at.size();
  RealPartials p{QVector(m), QVector(m), QVector(m), QVector(m)};
  QVector* out[4] = {&p.d_r, &p.d_i, &p.d_j, &p.d_k};
  QVector probe = at;
  for (std::size_t n = 0; n < m; ++n)
    for (int c = 0; c < 4; ++c) {
      const double x0 = at[n][c];
      probe[n][c] = x0 + h;
      const Quaternion fp = eval_checked(f, probe);
      probe[n][c] = x0 - h;
      const Quaternion fm = eval_checked(f, probe);
      probe[n][c] = x0;
      (*out[c])[n] = (fp - fm) / (2.0 * h);
    }
  return p;
}

QVector hr_derivative(const RealPartials& p, const Quaternion& mu, bool conjugate) {
  if (mu.is_zero()) throw DomainError("hr_derivative: zero rotation axis");
  const double s = conjugate ? 1.0 : -1.0;
  Quaternion e[3];
  for (int c = 0; c < 3; ++c) e[c] = rotate_by(kUnits[c], mu);
  QVector d(p.d_r.size());
  for (std::size_t n = 0; n < d.size(); ++n)
    d[n] = 0.25 * (p.d_r[n] + s * (e[0] * p.d_i[n] + e[1] * p.d_j[n] + e[2] * p.d_k[n]));
  return d;
}

QVector hr_derivative_right(const RealPartials& p, const Quaternion& mu, bool conjugate) {
  if (mu.is_zero()) throw DomainError("hr_derivative_right: zero rotation axis");
  const double s = conjugate ? 1.0 : -1.0;
  Quaternion e[3];
  for (int c = 0; c < 3; ++c) e[c] = rotate_by(kUnits[c], mu);
  QVector d(p.d_r.size());
  for (std::size_t n = 0; n < d.size(); ++n)
    d[n] = 0.25 * (p.d_r[n] + s * (p.d_i[n] * e[0] + p.d_j[n] * e[1] + p.d_k[n] * e[2]));
  return d;
}

QVector hr_derivative(const QFunction& f, const QVector& at, const Quaternion& mu,
                      bool conjugate, double h) {
  return hr_derivative(real_partials(f, at, h), mu, conjugate);
}

HRGradient hr_from_partials(const RealPartials& p) {
  const Quaternion one(1.0);
  HRGradient g;
  g.d_q = hr_derivative(p, one, false);
  g.d_qi = hr_derivative(p, kUnits[0], false);
  g.d_qj = hr_derivative(p, kUnits[1], false);
  g.d_qk = hr_derivative(p, kUnits[2], false);
  g.d_q_conj = hr_derivative(p, one, true);
  g.d_qi_conj = hr_derivative(p, kUnits[0], true);
  g.d_qj_conj = hr_derivative(p, kUnits[1], true);
  g.d_qk_conj = hr_derivative(p, kUnits[2], true);
  return g;
}

HRGradient hr_gradient(const QFunction& f, const QVector& at, double h) {
  return hr_from_partials(real_partials(f, at, h));
}

RealPartials partials_from_hr_conj(const HRGradient& g) {
  const std::size_t m = g.d_q_conj.size();
  QVector stacked(4 * m);
  for (std::size_t n = 0; n < m; ++n) {
    stacked[n] = g.d_q_conj[n];
    stacked[m + n] = g.d_qi_conj[n];
    stacked[2 * m + n] = g.d_qj_conj[n];
    stacked[3 * m + n] = g.d_qk_conj[n];
  }
  const QVector p = hermitian(build_augmentation_matrix(m)) * stacked;
  RealPartials out{QVector(m), QVector(m), QVector(m), QVector(m)};
  for (std::size_t n = 0; n < m; ++n) {
    out.d_r[n] = p[n];
    out.d_i[n] = p[m + n];
    out.d_j[n] = p[2 * m + n];
    out.d_k[n] = p[3 * m + n];
  }
  return out;
}

double check_crf(const QFunction& f, const QVector& at, double h) {
  const RealPartials p = real_partials(f, at, h);
  double s = 0.0;
  for (std::size_t n = 0; n < at.size(); ++n)
    s += norm_squared(p.d_r[n] + kUnits[0] * p.d_i[n] + kUnits[1] * p.d_j[n] +
                      kUnits[2] * p.d_k[n]);
  return std::sqrt(s);
}

Quaternion product_rule_derivative(const QFunction& f, const QFunction& g, const QVector& at,
                                   const Quaternion& xi, double h, bool conjugate) {
  if (at.size() != 1) throw UsageError("product_rule_derivative: scalar argument expected");
  const Quaternion fv = eval_checked(f, at);
  const Quaternion gv = eval_checked(g, at);
  const Quaternion axis = conj(fv) * xi;
  if (norm(axis) < 1e-12)
    throw DomainError("product_rule_derivative: degenerate rotation axis f(q)* xi");
  const Quaternion dg = hr_derivative(g, at, axis, conjugate, h)[0];
  const Quaternion df = hr_derivative(f, at, xi, conjugate, h)[0];
  return fv * dg + df * gv;
}

double rotation_rule_check(const QFunction& f, const QVector& at, const Quaternion& nu,
                           const Quaternion& xi, double h) {
  if (!is_pure(nu, 1e-12) || std::abs(norm(nu) - 1.0) > 1e-12)
    throw DomainError("rotation_rule_check: nu must be unit pure");
  const QVector lhs = hr_derivative(f, at, xi, false, h);
  const QFunction fnu = [&](const QVector& q) { return rotate_by(f(q), nu); };
  const QVector rhs = hr_derivative(fnu, at, nu * xi, false, h);
  double r = 0.0;
  for (std::size_t n = 0; n < lhs.size(); ++n)
    r = std::max(r, norm(rotate_by(lhs[n], nu) - rhs[n]));
  return r;
}

double multiplication_rule_check(const QFunction& f, const QVector& at, const Quaternion& nu,
                                 const Quaternion& xi, double h) {
  const QFunction nuf = [&](const QVector& q) { return nu * f(q); };
  const QVector lhs = hr_derivative(nuf, at, xi, false, h);
  const QVector rhs = scale_left(nu, hr_derivative(f, at, inv(nu) * xi, false, h));
  double r = 0.0;
  for (std::size_t n = 0; n < lhs.size(); ++n) r = std::max(r, norm(lhs[n] - rhs[n]));
  return r;
}

double conjugate_rule_check(const QFunction& f, const QVector& at, const Quaternion& mu,
                            double h) {
  const QVector lhs = conjugate(hr_derivative(f, at, mu, true, h));
  const QFunction fc = [&](const QVector& q) { return conj(f(q)); };
  const QVector rhs = hr_derivative_right(real_partials(fc, at, h), mu, false);
  double r = 0.0;
  for (std::size_t n = 0; n < lhs.size(); ++n) r = std::max(r, norm(lhs[n] - rhs[n]));
  return r;
}

TaylorResult taylor_first_order(const QFunction& f, const QVector& x, const QVector& dx,
                                double h) {
  if (x.size() != dx.size()) throw UsageError("taylor_first_order: length mismatch");
  const HRGradient g = hr_gradient(f, x, h);
  Quaternion pred = eval_checked(f, x);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const Quaternion c = conj(dx[n]);
    pred += c * g.d_q_conj[n] + involution_i(c) * g.d_qi_conj[n] +
            involution_j(c) * g.d_qj_conj[n] + involution_k(c) * g.d_qk_conj[n];
  }
  return {pred, eval_checked(f, x + dx)};
}

HRGradient chain_rule_real_inner(const QFunction& g, const RealScalarFunction& fr,
                                 const QVector& at, double h) {
  const QFunction g_checked = [&](const QVector& q) {
    const Quaternion v = g(q);
    if (norm(v.imag_part()) >= 1e-10)
      throw DomainError("chain_rule_real_inner: inner function is not real-valued at " +
                        describe(q));
    return v;
  };
  HRGradient grad = hr_gradient(g_checked, at, h);
  const double u = g_checked(at).r;
  const double hu = 1e-5 * std::max(1.0, std::abs(u));
  const double fp = (fr(u + hu) - fr(u - hu)) / (2.0 * hu);
  if (!std::isfinite(fp)) throw NumericError("chain_rule_real_inner: non-finite outer slope");
  for (QVector* v : {&grad.d_q, &grad.d_qi, &grad.d_qj, &grad.d_qk, &grad.d_q_conj,
                     &grad.d_qi_conj, &grad.d_qj_conj, &grad.d_qk_conj})
    for (auto& q : *v) q *= fp;
  return grad;
}

Eigen::MatrixXd real_jacobian(const QVectorFunction& f, const QVector& at, double h) {
  if (at.empty()) throw UsageError("real_jacobian: empty argument");
  h = resolve_step(h, at);
  const std::size_t m = at.size();
  const std::size_t nout = eval_checked(f, at).size();
  Eigen::MatrixXd jac(4 * nout, 4 * m);
  QVector probe = at;
  for (std::size_t n = 0; n < m; ++n)
    for (int c = 0; c < 4; ++c) {
      const double x0 = at[n][c];
      probe[n][c] = x0 + h;
      const QVector fp = eval_checked(f, probe);
      probe[n][c] = x0 - h;
      const QVector fm = eval_checked(f, probe);
      probe[n][c] = x0;
      if (fp.size() != nout || fm.size() != nout)
        throw UsageError("real_jacobian: output length changed between probes");
      jac.col(static_cast<Eigen::Index>(c * m + n)) =
          (real_components(fp) - real_components(fm)) / (2.0 * h);
    }
  return jac;
}

QMatrix augmented_jacobian(const QVectorFunction& f, const QVector& at, double h) {
  return augmented_operator_from_real(real_jacobian(f, at, h));
}

}  // namespace hrcalc
