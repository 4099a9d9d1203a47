#include "hrcalc/adaptive.hpp"

#include <cmath>
#include <string>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/hr_calculus.hpp"

namespace hrcalc {

QVector wl_mmse_fit(const std::vector<QVector>& regressors,
                    const std::vector<Quaternion>& targets, double max_condition) {
  if (regressors.empty() || regressors.size() != targets.size())
    throw UsageError("wl_mmse_fit: need equal, nonzero numbers of regressors and targets");
  const std::size_t m = regressors.front().size();
  if (m == 0) throw UsageError("wl_mmse_fit: empty regressor");
  if (regressors.size() < 4 * m)
    throw UsageError("wl_mmse_fit: need at least " + std::to_string(4 * m) + " samples");
  QMatrix r(4 * m, 4 * m);
  QVector p(4 * m);
  for (std::size_t n = 0; n < regressors.size(); ++n) {
    if (regressors[n].size() != m) throw UsageError("wl_mmse_fit: regressor length mismatch");
    const QVector za = augment_stacked(regressors[n]);
    for (std::size_t a = 0; a < za.size(); ++a) {
      p[a] += targets[n] * conj(za[a]);
      for (std::size_t b = 0; b < za.size(); ++b) r(a, b) += za[a] * conj(za[b]);
    }
  }
  QMatrix r_inv;
  try {
    r_inv = qinverse(r, max_condition);
  } catch (const NumericError& e) {
    throw NumericError("wl_mmse_fit: augmented Gram matrix is rank deficient (condition " +
                           std::to_string(e.condition()) + ")",
                       e.condition());
  }
  // w^T = p R^-1
  return vecmat(p, r_inv);
}

LmsStep qlms_step(const LmsFilter& filter, const QVector& z, const Quaternion& y,
                  std::size_t step) {
  if (!(filter.gamma > 0.0)) throw UsageError("qlms_step: gamma must be positive");
  if (filter.w.size() != 4 * z.size())
    throw UsageError("qlms_step: weight length " + std::to_string(filter.w.size()) +
                     " does not match augmented regressor length " +
                     std::to_string(4 * z.size()));
  const QVector za = augment_stacked(z);
  const Quaternion eps = y - dot_t(filter.w, za);
  LmsStep out{filter, eps};
  for (std::size_t n = 0; n < za.size(); ++n) out.filter.w[n] += filter.gamma * (eps * conj(za[n]));
  if (!all_finite(out.filter.w)) throw DivergenceError("qlms_step: weights diverged", step);
  return out;
}

QMatrix qlms_error_covariance_step(const QMatrix& sigma, const QMatrix& g, double gamma) {
  const QMatrix t = QMatrix::identity(g.rows()) - gamma * g;
  return t * sigma * hermitian(t);
}

double qlms_regressor_radius(const std::vector<QVector>& regressors) {
  if (regressors.empty()) throw UsageError("qlms_regressor_radius: no regressors");
  const std::size_t m = regressors.front().size();
  QMatrix g(4 * m, 4 * m);
  for (const auto& z : regressors) {
    if (z.size() != m) throw UsageError("qlms_regressor_radius: regressor length mismatch");
    g += outer(augment_stacked(z), augment_stacked(z));
  }
  g *= 1.0 / static_cast<double>(regressors.size());
  return spectral_radius(g);
}

double qlms_default_gamma(const std::vector<QVector>& regressors, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw UsageError("qlms_default_gamma: fraction must lie in (0, 1)");
  const double rho = qlms_regressor_radius(regressors);
  if (!(rho > 0.0)) throw NumericError("qlms_default_gamma: zero regressor power");
  return fraction * 2.0 / rho;
}

double squared_norm_metric(const Quaternion& e) { return norm_squared(e); }

Quaternion split_tanh(const Quaternion& q) {
  return {std::tanh(q.r), std::tanh(q.i), std::tanh(q.j), std::tanh(q.k)};
}

NonlinearStep nonlinear_step(const NonlinearElement& elem, const QVector& z,
                             const Quaternion& y, const QMetric& metric, std::size_t step) {
  if (!(elem.gamma > 0.0)) throw UsageError("nonlinear_step: gamma must be positive");
  if (!elem.activation) throw UsageError("nonlinear_step: missing activation");
  if (elem.w.size() != 4 * z.size()) throw UsageError("nonlinear_step: dimension mismatch");
  const QVector za = augment_stacked(z);
  const QFunction cost = [&](const QVector& w) {
    const Quaternion yhat = elem.activation(dot_t(w, za));
    if (!is_finite(yhat)) throw NumericError("nonlinear_step: activation returned non-finite");
    return Quaternion(metric(yhat - y));
  };
  NonlinearStep out{elem, cost(elem.w).r};
  const HRGradient g = hr_gradient(cost, elem.w);
  for (std::size_t n = 0; n < za.size(); ++n) out.element.w[n] -= elem.gamma * g.d_q_conj[n];
  if (!all_finite(out.element.w))
    throw DivergenceError("nonlinear_step: weights diverged", step);
  return out;
}

}  // namespace hrcalc
