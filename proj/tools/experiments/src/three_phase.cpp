#include "hrcalc/experiments/three_phase.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"
#include "hrcalc/kalman.hpp"

namespace hrcalc::experiments {

namespace {

constexpr double kPi = std::numbers::pi;

struct PhaseSet {
  double v[3];
  double psi[3];  // total phase offsets including the 2pi/3 spacing
};

PhaseSet phases_at(const ThreePhaseParams& p, std::size_t n) {
  PhaseSet s{{p.va, p.vb, p.vc}, {p.phase_a, p.phase_b + 2 * kPi / 3, p.phase_c + 4 * kPi / 3}};
  if (p.fault_time >= 0.0 && static_cast<double>(n) * p.dt >= p.fault_time) {
    const int f = p.fault_phase;
    s.v[f] *= 1.0 - p.fault_sag;
    s.psi[(f + 1) % 3] += p.fault_shift;
    s.psi[(f + 2) % 3] -= p.fault_shift;
  }
  return s;
}

Eigen::MatrixXd diag_real(const std::vector<double>& per_entry, std::size_t m) {
  // Real ordering is component-major: [r block; i block; j block; k block].
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(4 * m, 4 * m);
  for (std::size_t comp = 0; comp < 4; ++comp)
    for (std::size_t e = 0; e < m; ++e) c(comp * m + e, comp * m + e) = per_entry[e];
  return c;
}

// Tracker covariance: phi (entry 0) varies only within span{1, zeta}, so
// phi stays of the form exp(zeta w); q+ and q- are unrestricted.
Eigen::MatrixXd tracker_covariance(double var_phi, double var_seq, const Quaternion& zeta) {
  Eigen::MatrixXd c = diag_real({0.0, var_seq, var_seq}, 3);
  const double z[4] = {0.0, zeta.i, zeta.j, zeta.k};
  c(0, 0) = var_phi;
  for (int a = 1; a < 4; ++a)
    for (int b = 1; b < 4; ++b) c(3 * a, 3 * b) = var_phi * z[a] * z[b];
  return c;
}

}  // namespace

void declare_three_phase(ParamSet& p) {
  const ThreePhaseParams d;
  p.declare("f", format_real(d.f), "system frequency (Hz)");
  p.declare("dt", format_real(d.dt), "sampling interval (s)");
  p.declare("va", format_real(d.va), "phase a amplitude (p.u.)");
  p.declare("vb", format_real(d.vb), "phase b amplitude (p.u.)");
  p.declare("vc", format_real(d.vc), "phase c amplitude (p.u.)");
  p.declare("phase_a", format_real(d.phase_a), "phase a offset (rad)");
  p.declare("phase_b", format_real(d.phase_b), "phase b offset (rad)");
  p.declare("phase_c", format_real(d.phase_c), "phase c offset (rad)");
  p.declare("noise_std", format_real(d.noise_std), "noise std per imaginary component (p.u.)");
  p.declare("fault_time", format_real(d.fault_time), "fault onset (s); negative disables");
  p.declare("fault_phase", "a", "sagging phase (a, b or c)");
  p.declare("fault_sag", format_real(d.fault_sag), "fractional amplitude drop of the faulted phase");
  p.declare("fault_shift_deg", "20", "phase shift of the other phases (degrees, +/-)");
  p.declare("f_init", format_real(d.f_init), "tracker initial frequency (Hz)");
  p.declare("obs_var", format_real(d.obs_var), "tracker observation variance per component");
  p.declare("proc_var_phi", format_real(d.proc_var_phi), "tracker process variance of phi");
  p.declare("proc_var_seq", format_real(d.proc_var_seq), "tracker process variance of q+ and q-");
  p.declare("init_var_phi", format_real(d.init_var_phi), "tracker initial variance of phi");
  p.declare("init_var_seq", format_real(d.init_var_seq), "tracker initial variance of q+ and q-");
}

ThreePhaseParams three_phase_params(const ParamSet& s) {
  ThreePhaseParams p;
  p.f = s.real("f");
  p.dt = s.real("dt");
  p.va = s.real("va");
  p.vb = s.real("vb");
  p.vc = s.real("vc");
  p.phase_a = s.real("phase_a");
  p.phase_b = s.real("phase_b");
  p.phase_c = s.real("phase_c");
  p.noise_std = s.real("noise_std");
  p.fault_time = s.real("fault_time");
  const std::string& fp = s.text("fault_phase");
  if (fp == "a") p.fault_phase = 0;
  else if (fp == "b") p.fault_phase = 1;
  else if (fp == "c") p.fault_phase = 2;
  else throw UsageError("fault_phase must be a, b or c");
  p.fault_sag = s.real("fault_sag");
  p.fault_shift = s.real("fault_shift_deg") * kPi / 180.0;
  p.f_init = s.real("f_init");
  p.obs_var = s.real("obs_var");
  p.proc_var_phi = s.real("proc_var_phi");
  p.proc_var_seq = s.real("proc_var_seq");
  p.init_var_phi = s.real("init_var_phi");
  p.init_var_seq = s.real("init_var_seq");
  validate(p);
  return p;
}

void validate(const ThreePhaseParams& p) {
  auto req = [](bool ok, const char* what) {
    if (!ok) throw UsageError(std::string("three-phase: ") + what);
  };
  req(std::isfinite(p.dt) && p.dt > 0.0, "dt must be positive");
  req(std::isfinite(p.f) && p.f > 0.0, "f must be positive");
  req(p.f * p.dt < 0.5, "f dt must be below 0.5");
  req(std::isfinite(p.f_init) && p.f_init > 0.0 && p.f_init * p.dt < 0.25,
      "f_init must be positive with f_init dt below 0.25");
  for (double v : {p.va, p.vb, p.vc, p.phase_a, p.phase_b, p.phase_c, p.fault_time, p.fault_shift})
    req(std::isfinite(v), "amplitudes, phases and fault settings must be finite");
  req(p.fault_phase >= 0 && p.fault_phase < 3, "fault phase must be a, b or c");
  req(p.fault_sag >= 0.0 && p.fault_sag <= 1.0, "fault_sag must lie in [0, 1]");
  req(std::isfinite(p.noise_std) && p.noise_std >= 0.0, "noise_std must be non-negative");
  req(p.obs_var > 0.0 && p.proc_var_phi >= 0.0 && p.proc_var_seq >= 0.0 && p.init_var_phi > 0.0 &&
          p.init_var_seq > 0.0,
      "tracker variances must be positive (process variances non-negative)");
}

Quaternion three_phase_axis() {
  const double s = -1.0 / std::sqrt(3.0);
  return {0.0, s, s, s};
}

Quaternion three_phase_voltage(const ThreePhaseParams& p, std::size_t n) {
  const PhaseSet s = phases_at(p, n);
  const double th = 2 * kPi * p.f * p.dt * static_cast<double>(n);
  return {0.0, s.v[0] * std::sin(th + s.psi[0]), s.v[1] * std::sin(th + s.psi[1]),
          s.v[2] * std::sin(th + s.psi[2])};
}

SequenceSplit three_phase_sequences(const ThreePhaseParams& p, std::size_t n) {
  const PhaseSet s = phases_at(p, n);
  // q = a cos(th) + b sin(th) with V sin(th + psi) = V sin(psi) cos(th) + V cos(psi) sin(th).
  const Quaternion a{0.0, s.v[0] * std::sin(s.psi[0]), s.v[1] * std::sin(s.psi[1]),
                     s.v[2] * std::sin(s.psi[2])};
  const Quaternion b{0.0, s.v[0] * std::cos(s.psi[0]), s.v[1] * std::cos(s.psi[1]),
                     s.v[2] * std::cos(s.psi[2])};
  const Quaternion z = three_phase_axis();
  const Quaternion c_plus = 0.5 * (a - z * b);
  const Quaternion c_minus = -0.5 * (a + z * b);
  const double th = 2 * kPi * p.f * p.dt * static_cast<double>(n);
  return {qexp(z * th) * c_plus, qexp(z * -th) * c_minus};
}

double frequency_from_phi(const Quaternion& phi, double dt) {
  const double im = std::sqrt(phi.i * phi.i + phi.j * phi.j + phi.k * phi.k);
  return std::atan(im / phi.r) / (2 * kPi * dt);
}

ThreePhaseRun run_three_phase(const ThreePhaseParams& p, std::uint64_t seed, std::size_t steps,
                              std::ostream* csv) {
  validate(p);
  if (steps == 0) throw UsageError("three-phase: steps must be positive");
  Rng rng(child_seed(seed, 0));
  const Quaternion zeta = three_phase_axis();

  NonlinearStateModel model;
  model.f = [](const QVector& x) {
    QVector out(3);
    out[0] = x[0];
    out[1] = x[0] * x[1];
    out[2] = conj(x[0]) * x[2];
    return out;
  };
  model.h = [](const QVector& x) {
    QVector out(1);
    out[0] = x[1] - x[2];
    return out;
  };
  model.Sigma_v =
      augmented_covariance_from_real(tracker_covariance(p.proc_var_phi, p.proc_var_seq, zeta));
  model.Sigma_w = augmented_covariance_from_real(diag_real({p.obs_var}, 1));

  auto observe = [&](std::size_t n) {
    Quaternion y = three_phase_voltage(p, n);
    if (p.noise_std > 0.0) y += rng.pure(p.noise_std);
    return y;
  };

  ThreePhaseRun run;
  EkfState st;
  const Quaternion y0 = observe(0);
  st.x = QVector(3);
  st.x[0] = qexp(zeta * (2 * kPi * p.f_init * p.dt));
  st.x[1] = y0;
  st.M = augmented_covariance_from_real(tracker_covariance(p.init_var_phi, p.init_var_seq, zeta));

  auto record = [&](std::size_t n, const Quaternion& y) {
    const double fh = frequency_from_phi(st.x[0], p.dt);
    const double qm_true = norm(three_phase_sequences(p, n).minus);
    run.f_hat.push_back(fh);
    run.f_true.push_back(p.f);
    run.qplus_norm.push_back(norm(st.x[1]));
    run.qminus_norm.push_back(norm(st.x[2]));
    run.qminus_true.push_back(qm_true);
    if (csv)
      *csv << n << ',' << format_real(static_cast<double>(n) * p.dt) << ',' << quat_fields(y)
           << ',' << format_real(fh) << ',' << format_real(p.f) << ','
           << format_real(run.qplus_norm.back()) << ',' << format_real(run.qminus_norm.back())
           << ',' << format_real(qm_true) << '\n';
  };
  if (csv) *csv << "step,t,y_r,y_i,y_j,y_k,f_hat,f_true,qplus_norm,qminus_norm,qminus_true\n";
  record(0, y0);
  for (std::size_t n = 1; n < steps; ++n) {
    const Quaternion y = observe(n);
    st = ekf_step(model, st, QVector{y}, n);
    record(n, y);
  }
  return run;
}

}  // namespace hrcalc::experiments
