#include "hrcalc/experiments/motion.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "hrcalc/adaptive.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"

namespace hrcalc::experiments {

namespace {

constexpr double kPi = std::numbers::pi;

double component(const Quaternion& q, int c) { return q[c]; }

// |phase| of the polar form; zero for the zero quaternion (untrained filter).
double phase_of(const Quaternion& q) { return q.is_zero() ? 0.0 : to_polar(q).angle; }

}  // namespace

void declare_motion(ParamSet& p) {
  const MotionParams d;
  p.declare("dt", format_real(d.dt), "sampling interval (s)");
  p.declare("roll_amp", format_real(d.roll_amp), "roll amplitude (rad)");
  p.declare("roll_freq", format_real(d.roll_freq), "roll frequency (Hz)");
  p.declare("pitch_amp", format_real(d.pitch_amp), "pitch amplitude (rad)");
  p.declare("pitch_freq", format_real(d.pitch_freq), "pitch frequency (Hz)");
  p.declare("yaw_rate", format_real(d.yaw_rate), "yaw sweep rate (rad/s)");
  p.declare("angle_noise", format_real(d.angle_noise), "std of additive angle noise (rad)");
  p.declare("constant", "0", "hold all angles constant");
  p.declare("order", std::to_string(d.order), "predictor taps");
  p.declare("gamma", format_real(d.gamma), "QLMS step size");
  p.declare("lms_mu", format_real(d.lms_mu), "channel-wise real LMS step size");
}

MotionParams motion_params(const ParamSet& s) {
  MotionParams p;
  p.dt = s.real("dt");
  p.roll_amp = s.real("roll_amp");
  p.roll_freq = s.real("roll_freq");
  p.pitch_amp = s.real("pitch_amp");
  p.pitch_freq = s.real("pitch_freq");
  p.yaw_rate = s.real("yaw_rate");
  p.angle_noise = s.real("angle_noise");
  p.constant = s.flag("constant");
  p.order = s.count("order");
  p.gamma = s.real("gamma");
  p.lms_mu = s.real("lms_mu");
  validate(p);
  return p;
}

void validate(const MotionParams& p) {
  auto req = [](bool ok, const char* what) {
    if (!ok) throw UsageError(std::string("motion: ") + what);
  };
  req(std::isfinite(p.dt) && p.dt > 0.0, "dt must be positive");
  for (double v : {p.roll_amp, p.roll_freq, p.pitch_amp, p.pitch_freq, p.yaw_rate})
    req(std::isfinite(v), "trajectory parameters must be finite");
  req(std::isfinite(p.angle_noise) && p.angle_noise >= 0.0, "angle_noise must be non-negative");
  req(p.order >= 1, "order must be at least 1");
  req(std::isfinite(p.gamma) && p.gamma >= 0.0, "gamma must be non-negative");
  req(std::isfinite(p.lms_mu) && p.lms_mu >= 0.0, "lms_mu must be non-negative");
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2 * kPi;
  return w;
}

Quaternion euler_to_quaternion(double roll, double pitch, double yaw) {
  return qexp({0, 0, 0, yaw / 2}) * qexp({0, 0, pitch / 2, 0}) * qexp({0, roll / 2, 0, 0});
}

MotionRun run_motion(const MotionParams& p, std::uint64_t seed, std::size_t steps,
                     std::ostream* csv) {
  validate(p);
  if (steps <= p.order) throw UsageError("motion: steps must exceed the predictor order");
  Rng rng(child_seed(seed, 0));
  const double ph_roll = rng.uniform(-kPi, kPi), ph_pitch = rng.uniform(-kPi, kPi);
  const double yaw0 = rng.uniform(-kPi, kPi);
  Rng noise(child_seed(seed, 1));

  MotionRun run;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = p.constant ? 0.0 : static_cast<double>(n) * p.dt;
    double roll = p.roll_amp * std::sin(2 * kPi * p.roll_freq * t + ph_roll);
    double pitch = p.pitch_amp * std::sin(2 * kPi * p.pitch_freq * t + ph_pitch);
    double yaw = yaw0 + p.yaw_rate * t;
    if (p.angle_noise > 0.0 && !p.constant) {
      roll += noise.normal(p.angle_noise);
      pitch += noise.normal(p.angle_noise);
      yaw += noise.normal(p.angle_noise);
    }
    yaw = wrap_angle(yaw);
    // The map goes through (cos, sin) of each angle, so it is continuous in
    // the wrapped yaw up to the sign of the half-angle quaternion; q and -q
    // are the same rotation and the sign follows the previous sample.
    Quaternion q = euler_to_quaternion(roll, pitch, yaw);
    if (!run.q.empty() && dot(q, run.q.back()) < 0.0) q = -q;
    run.yaw_wrapped.push_back(yaw);
    run.q.push_back(q);
    run.phase_true.push_back(phase_of(q));
  }

  const std::size_t m = p.order;
  LmsFilter qlms{QVector(4 * m), p.gamma};
  std::vector<std::vector<double>> lms(4, std::vector<double>(m, 0.0));
  if (csv)
    *csv << "step,yaw_wrapped,q_r,q_i,q_j,q_k,err_qlms,err_lms,phase_true,phase_qlms,phase_lms\n";
  for (std::size_t n = m; n < steps; ++n) {
    QVector z(m);
    for (std::size_t k = 0; k < m; ++k) z[k] = run.q[n - 1 - k];
    const Quaternion y = run.q[n];
    const LmsStep st = qlms_step(qlms, z, y, n);
    qlms = st.filter;
    const Quaternion pred_q = y - st.error;

    Quaternion pred_l;
    for (int c = 0; c < 4; ++c) {
      double pr = 0.0;
      for (std::size_t k = 0; k < m; ++k) pr += lms[c][k] * component(z[k], c);
      const double e = component(y, c) - pr;
      for (std::size_t k = 0; k < m; ++k) lms[c][k] += p.lms_mu * e * component(z[k], c);
      pred_l[c] = pr;
    }
    if (!is_finite(pred_l)) throw DivergenceError("motion: real LMS diverged", n);

    run.err_qlms.push_back(norm_squared(st.error));
    run.err_lms.push_back(norm_squared(y - pred_l));
    run.phase_qlms.push_back(phase_of(pred_q));
    run.phase_lms.push_back(phase_of(pred_l));
    if (csv)
      *csv << n << ',' << format_real(run.yaw_wrapped[n]) << ',' << quat_fields(y) << ','
           << format_real(run.err_qlms.back()) << ',' << format_real(run.err_lms.back()) << ','
           << format_real(run.phase_true[n]) << ',' << format_real(run.phase_qlms.back()) << ','
           << format_real(run.phase_lms.back()) << '\n';
  }
  const std::size_t total = run.err_qlms.size(), half = total / 2;
  for (std::size_t k = half; k < total; ++k) {
    run.mse_qlms += run.err_qlms[k];
    run.mse_lms += run.err_lms[k];
  }
  run.mse_qlms /= static_cast<double>(total - half);
  run.mse_lms /= static_cast<double>(total - half);
  return run;
}

}  // namespace hrcalc::experiments
