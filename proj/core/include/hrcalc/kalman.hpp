#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>

#include "hrcalc/hr_calculus.hpp"
#include "hrcalc/qmatrix.hpp"

namespace hrcalc {

// Linear state-space model acting on augmented vectors:
//   x[n+1] = F x[n] + B u[n] + v,  y[n] = H x[n] + w.
// B may be empty (no input).
struct StateSpaceModel {
  QMatrix F, B, H, Sigma_v, Sigma_w;
};

struct KalmanState {
  QVector x_hat;  // augmented estimate
  QMatrix M;      // error covariance E{e e^H}
  QMatrix G;      // last gain (empty before the first update)
};

// Checks dimensions and the PSD requirements on the noise covariances.
void validate_model(const StateSpaceModel& model);

// x <- F x + B u; M <- F M F^H + Sigma_v. An empty u means no input.
KalmanState kalman_predict(const StateSpaceModel& model, const KalmanState& state,
                           const QVector& u = {});

// Innovation gain G = M H^H (H M H^H + Sigma_w)^-1; x <- x + G (y - H x);
// posterior M = (M^-1 + H^H Sigma_w^-1 H)^-1. When the prior M is too
// ill-conditioned to invert (condition above 1e10) the algebraically equal
// M - G H M is used instead.
KalmanState kalman_update(const StateSpaceModel& model, const KalmanState& state,
                          const QVector& y);

// Gain in the posterior form M_post H^H Sigma_w^-1.
QMatrix kalman_gain_information_form(const QMatrix& m_post, const QMatrix& h,
                                     const QMatrix& sigma_w);

// One step of the estimation error under a fixed gain:
// e' = (I - G H)(F e + v) - G w.
QVector kalman_error_step(const QMatrix& f, const QMatrix& h, const QMatrix& g, const QVector& e,
                          const QVector& v, const QVector& w);
// Its second moment: (I - G H)(F M F^H + Sigma_v)(I - G H)^H + G Sigma_w G^H.
QMatrix kalman_error_covariance_step(const StateSpaceModel& model, const QMatrix& g,
                                     const QMatrix& m);

// A M A^H + shift
QMatrix lyapunov_step(const QMatrix& m, const QMatrix& rotscale, const QMatrix& shift);

struct RiccatiResult {
  QMatrix M;        // posterior fixed point
  QMatrix M_prior;  // F M F^H + Sigma_v
  QMatrix G;        // steady-state gain
  std::size_t iterations = 0;
  double residual = 0.0;
  double closed_loop_radius = 0.0;  // rho((I - G H) F)
  bool stable = false;              // closed_loop_radius < 1
};

// Iterates M <- ((F M F^H + Sigma_v)^-1 + H^H Sigma_w^-1 H)^-1 until the
// max-abs change is below tol. Throws NumericError with the last residual
// after max_iter iterations.
RiccatiResult riccati_fixed_point(const StateSpaceModel& model, const QMatrix& m0,
                                  double tol = 1e-12, std::size_t max_iter = 100000);

// Nonlinear model on base vectors: x[n+1] = f(x[n]) + v, y[n] = h(x[n]) + w.
// Noise covariances are augmented.
struct NonlinearStateModel {
  QVectorFunction f, h;
  QMatrix Sigma_v, Sigma_w;
};

struct EkfState {
  QVector x;  // base estimate
  QMatrix M;  // augmented error covariance
  QMatrix G;  // last gain
};

// Extended filter step: propagate through f, linearise f and h with numeric
// augmented Jacobians, then a Joseph-form update (Sigma_w may be singular).
EkfState ekf_step(const NonlinearStateModel& model, const EkfState& state, const QVector& y,
                  std::size_t step = 0);

// Model file: `key = value` lines and `[F]`, `[B]`, `[H]`, `[Sigma_v]`,
// `[Sigma_w]` blocks holding matrix CSV. Unknown block names are errors;
// key/value pairs are returned to the caller through `params`.
void write_model(std::ostream& os, const StateSpaceModel& model,
                 const std::map<std::string, std::string>& params = {});
StateSpaceModel read_model(std::istream& is, std::map<std::string, std::string>* params = nullptr);

// Run trace CSV: step, err{n}_{r,i,j,k} per entry, trace_M, gain_norm.
class KalmanTraceWriter {
 public:
  KalmanTraceWriter(std::ostream& os, std::size_t entries);
  void row(std::size_t step, const QVector& error, const QMatrix& m, const QMatrix& g);

 private:
  std::ostream& os_;
  std::size_t entries_;
};

}  // namespace hrcalc
