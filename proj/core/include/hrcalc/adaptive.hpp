#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hrcalc/qmatrix.hpp"

namespace hrcalc {

// Least-squares widely linear fit y ≈ w^T z^a: solves w^T R = p with
// R = Σ z^a z^aH and p = Σ y z^aH. Requires at least 4M samples; throws
// NumericError with the condition estimate when R is rank deficient.
QVector wl_mmse_fit(const std::vector<QVector>& regressors,
                    const std::vector<Quaternion>& targets, double max_condition = 1e12);

struct LmsFilter {
  QVector w;  // augmented weights, length 4M
  double gamma = 0.0;
};

struct LmsStep {
  LmsFilter filter;
  Quaternion error;  // y - w^T z^a before the update
};

// eps = y - w^T z^a; w <- w + gamma eps z^a*. `step` only labels a
// DivergenceError.
LmsStep qlms_step(const LmsFilter& filter, const QVector& z, const Quaternion& y,
                  std::size_t step = 0);

// (I - gamma G) Σ (I - gamma G)^H
QMatrix qlms_error_covariance_step(const QMatrix& sigma, const QMatrix& g, double gamma);

// Spectral radius of the empirical augmented regressor correlation
// E{z^a z^aH}; the LMS error recursion contracts when gamma * rho < 2.
double qlms_regressor_radius(const std::vector<QVector>& regressors);
// fraction * 2 / rho from a dry run over the given regressors.
double qlms_default_gamma(const std::vector<QVector>& regressors, double fraction = 0.1);

using QScalarMap = std::function<Quaternion(const Quaternion&)>;
using QMetric = std::function<double(const Quaternion&)>;

double squared_norm_metric(const Quaternion& e);
// Real tanh on each component.
Quaternion split_tanh(const Quaternion& q);

struct NonlinearElement {
  QVector w;  // augmented weights
  QScalarMap activation;
  double gamma = 0.0;
};

struct NonlinearStep {
  NonlinearElement element;
  double cost = 0.0;  // before the update
};

// w <- w - gamma ∇_{w*} d(h(w^T z^a) - y), gradient from numeric HR calculus.
NonlinearStep nonlinear_step(const NonlinearElement& elem, const QVector& z,
                             const Quaternion& y, const QMetric& metric = squared_norm_metric,
                             std::size_t step = 0);

}  // namespace hrcalc
