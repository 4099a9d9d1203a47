#include "hrcalc/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"

namespace hrcalc {

namespace {

constexpr double kPriorConditionLimit = 1e10;

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

double frobenius(const QMatrix& a) {
  double s = 0.0;
  for (const auto& q : a.data()) s += norm_squared(q);
  return std::sqrt(s);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void validate_model(const StateSpaceModel& m) {
  const std::size_t n = m.F.rows();
  require(n > 0 && m.F.is_square(), "model: F must be square and nonempty");
  require(m.Sigma_v.rows() == n && m.Sigma_v.cols() == n, "model: Sigma_v must match F");
  require(m.H.cols() == n && m.H.rows() > 0, "model: H must have as many columns as F");
  const std::size_t p = m.H.rows();
  require(m.Sigma_w.rows() == p && m.Sigma_w.cols() == p, "model: Sigma_w must match H rows");
  require(m.B.empty() || m.B.rows() == n, "model: B must have as many rows as F");
  require(is_hermitian_psd(m.Sigma_v, 1e-10), "model: Sigma_v must be Hermitian PSD");
  require(is_hermitian_psd(m.Sigma_w, 1e-10), "model: Sigma_w must be Hermitian PSD");
}

KalmanState kalman_predict(const StateSpaceModel& model, const KalmanState& state,
                           const QVector& u) {
  if (state.x_hat.size() != model.F.cols() || state.M.rows() != model.F.cols())
    throw UsageError("kalman_predict: state dimension does not match F");
  KalmanState out;
  out.x_hat = model.F * state.x_hat;
  if (!u.empty()) {
    if (model.B.empty() || model.B.cols() != u.size())
      throw UsageError("kalman_predict: input does not match B");
    out.x_hat = out.x_hat + model.B * u;
  }
  out.M = symmetrize(model.F * state.M * hermitian(model.F) + model.Sigma_v);
  out.G = state.G;
  return out;
}

KalmanState kalman_update(const StateSpaceModel& model, const KalmanState& state,
                          const QVector& y) {
  const QMatrix& h = model.H;
  if (y.size() != h.rows()) throw UsageError("kalman_update: observation length mismatch");
  if (state.x_hat.size() != h.cols()) throw UsageError("kalman_update: state length mismatch");
  const QMatrix hh = hermitian(h);
  const QMatrix s = h * state.M * hh + model.Sigma_w;
  QMatrix s_inv;
  try {
    s_inv = qinverse(s);
  } catch (const NumericError& e) {
    throw NumericError("kalman_update: singular innovation covariance", e.condition());
  }
  KalmanState out;
  out.G = state.M * hh * s_inv;
  out.x_hat = state.x_hat + out.G * (y - h * state.x_hat);
  QMatrix m_inv;
  bool info_form = true;
  try {
    m_inv = qinverse(state.M, kPriorConditionLimit);
  } catch (const NumericError&) {
    info_form = false;
  }
  if (info_form) {
    out.M = symmetrize(qinverse(m_inv + hh * qinverse(model.Sigma_w) * h));
  } else {
    out.M = symmetrize(state.M - out.G * h * state.M);
  }
  return out;
}

QMatrix kalman_gain_information_form(const QMatrix& m_post, const QMatrix& h,
                                     const QMatrix& sigma_w) {
  return m_post * hermitian(h) * qinverse(sigma_w);
}

QVector kalman_error_step(const QMatrix& f, const QMatrix& h, const QMatrix& g, const QVector& e,
                          const QVector& v, const QVector& w) {
  const QMatrix t = QMatrix::identity(f.rows()) - g * h;
  return t * (f * e + v) - g * w;
}

QMatrix kalman_error_covariance_step(const StateSpaceModel& model, const QMatrix& g,
                                     const QMatrix& m) {
  const QMatrix t = QMatrix::identity(model.F.rows()) - g * model.H;
  const QMatrix prior = model.F * m * hermitian(model.F) + model.Sigma_v;
  return symmetrize(t * prior * hermitian(t) + g * model.Sigma_w * hermitian(g));
}

QMatrix lyapunov_step(const QMatrix& m, const QMatrix& rotscale, const QMatrix& shift) {
  return rotscale * m * hermitian(rotscale) + shift;
}

RiccatiResult riccati_fixed_point(const StateSpaceModel& model, const QMatrix& m0, double tol,
                                  std::size_t max_iter) {
  validate_model(model);
  if (m0.rows() != model.F.rows() || !m0.is_square())
    throw UsageError("riccati_fixed_point: M0 dimension mismatch");
  KalmanState st{QVector(model.F.rows()), m0, {}};
  const QVector y(model.H.rows());
  double residual = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const KalmanState prior = kalman_predict(model, st);
    const KalmanState post = kalman_update(model, prior, y);
    residual = max_abs_diff(post.M, st.M);
    st.M = post.M;
    if (residual < tol) {
      RiccatiResult r;
      r.M = st.M;
      r.M_prior = kalman_predict(model, st).M;
      const QMatrix hh = hermitian(model.H);
      r.G = r.M_prior * hh * qinverse(model.H * r.M_prior * hh + model.Sigma_w);
      r.iterations = it;
      r.residual = residual;
      const QMatrix closed =
          (QMatrix::identity(model.F.rows()) - r.G * model.H) * model.F;
      r.closed_loop_radius = spectral_radius(closed);
      r.stable = r.closed_loop_radius < 1.0;
      return r;
    }
    if (!all_finite(st.M)) throw DivergenceError("riccati_fixed_point: diverged", it);
  }
  throw NumericError("riccati_fixed_point: no convergence after " + std::to_string(max_iter) +
                     " iterations (last residual " + std::to_string(residual) + ")");
}

EkfState ekf_step(const NonlinearStateModel& model, const EkfState& state, const QVector& y,
                  std::size_t step) {
  if (!model.f || !model.h) throw UsageError("ekf_step: missing f or h");
  const std::size_t n = state.x.size();
  if (state.M.rows() != 4 * n || model.Sigma_v.rows() != 4 * n)
    throw UsageError("ekf_step: covariance dimension mismatch");
  const QMatrix fa = augmented_jacobian(model.f, state.x);
  const QVector x_prior = model.f(state.x);
  const QMatrix m_prior = symmetrize(fa * state.M * hermitian(fa) + model.Sigma_v);
  const QMatrix ha = augmented_jacobian(model.h, x_prior);
  const QMatrix hh = hermitian(ha);
  const QMatrix s = ha * m_prior * hh + model.Sigma_w;
  QMatrix s_inv;
  try {
    s_inv = qinverse(s);
  } catch (const NumericError& e) {
    throw NumericError("ekf_step: singular innovation covariance", e.condition());
  }
  EkfState out;
  out.G = m_prior * hh * s_inv;
  const QVector innov = augment_stacked(y) - augment_stacked(model.h(x_prior));
  const QVector xa = augment_stacked(x_prior) + out.G * innov;
  out.x = deaugment(xa, false);
  const QMatrix t = QMatrix::identity(4 * n) - out.G * ha;
  out.M = symmetrize(t * m_prior * hermitian(t) + out.G * model.Sigma_w * hermitian(out.G));
  if (!all_finite(out.x) || !all_finite(out.M)) throw DivergenceError("ekf_step: diverged", step);
  return out;
}

void write_model(std::ostream& os, const StateSpaceModel& model,
                 const std::map<std::string, std::string>& params) {
  for (const auto& [k, v] : params) os << k << " = " << v << '\n';
  const std::pair<const char*, const QMatrix*> blocks[] = {{"F", &model.F},
                                                           {"B", &model.B},
                                                           {"H", &model.H},
                                                           {"Sigma_v", &model.Sigma_v},
                                                           {"Sigma_w", &model.Sigma_w}};
  for (const auto& [name, m] : blocks) {
    if (m->empty()) continue;
    os << '[' << name << "]\n";
    write_qmatrix_csv(os, *m);
    os << '\n';
  }
}

StateSpaceModel read_model(std::istream& is, std::map<std::string, std::string>* params) {
  StateSpaceModel model;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw UsageError("model file line " + std::to_string(lineno) + ": bad block header");
      const std::string name = t.substr(1, t.size() - 2);
      QMatrix* target = name == "F"         ? &model.F
                        : name == "B"       ? &model.B
                        : name == "H"       ? &model.H
                        : name == "Sigma_v" ? &model.Sigma_v
                        : name == "Sigma_w" ? &model.Sigma_w
                                            : nullptr;
      if (!target) throw UsageError("model file: unknown block [" + name + "]");
      *target = read_qmatrix_csv(is);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("model file line " + std::to_string(lineno) + ": expected key = value");
    if (params) (*params)[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  validate_model(model);
  return model;
}

KalmanTraceWriter::KalmanTraceWriter(std::ostream& os, std::size_t entries)
    : os_(os), entries_(entries) {
  os_ << "step";
  for (std::size_t n = 0; n < entries_; ++n)
    for (char c : {'r', 'i', 'j', 'k'}) os_ << ",err" << n << '_' << c;
  os_ << ",trace_M,gain_norm\n";
}

void KalmanTraceWriter::row(std::size_t step, const QVector& error, const QMatrix& m,
                            const QMatrix& g) {
  if (error.size() != entries_) throw UsageError("trace row: wrong error length");
  os_ << step;
  for (const auto& q : error)
    for (int c = 0; c < 4; ++c) os_ << ',' << format_real(q[c]);
  os_ << ',' << format_real(trace(m).r) << ',' << format_real(frobenius(g)) << '\n';
}

}  // namespace hrcalc
