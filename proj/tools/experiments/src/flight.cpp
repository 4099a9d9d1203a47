#include "hrcalc/experiments/flight.hpp"

#include <cmath>
#include <ostream>

#include "hrcalc/augmentation.hpp"
#include "hrcalc/errors.hpp"
#include "hrcalc/io.hpp"

namespace hrcalc::experiments {

namespace {

std::size_t whole_steps(double seconds, double dt, const char* what) {
  const double n = seconds / dt;
  const double r = std::round(n);
  if (!(r >= 1.0) || std::abs(n - r) > 1e-9 * std::max(1.0, r))
    throw UsageError(std::string("flight: ") + what + " must be a positive whole number of steps");
  return static_cast<std::size_t>(r);
}

}  // namespace

void declare_flight(ParamSet& p) {
  const FlightParams d;
  p.declare("dt", format_real(d.dt), "sampling interval (s)");
  p.declare("segment", format_real(d.segment), "planning horizon (s)");
  p.declare("apply", format_real(d.apply), "portion of each plan applied (s)");
  p.declare("q_scale", format_real(d.q_scale), "Q = q_scale I");
  p.declare("t_scale", format_real(d.t_scale), "T = t_scale I");
  p.declare("r_diag", format_real(d.r_diag), "R = r_diag I - r_coupling 1 1^T");
  p.declare("r_coupling", format_real(d.r_coupling), "R = r_diag I - r_coupling 1 1^T");
  p.declare("init_std", format_real(d.init_std), "std of the initial pure phi components");
  p.declare("proc_noise", format_real(d.proc_noise), "std of additive state noise per component");
}

FlightParams flight_params(const ParamSet& s) {
  FlightParams p;
  p.dt = s.real("dt");
  p.segment = s.real("segment");
  p.apply = s.real("apply");
  p.q_scale = s.real("q_scale");
  p.t_scale = s.real("t_scale");
  p.r_diag = s.real("r_diag");
  p.r_coupling = s.real("r_coupling");
  p.init_std = s.real("init_std");
  p.proc_noise = s.real("proc_noise");
  validate(p);
  return p;
}

LqrProblem flight_problem(const FlightParams& p) {
  const double a[2][2] = {{1.0, p.dt}, {0.0, 1.0}};
  const double b[2] = {p.dt * p.dt / 2.0, p.dt};
  LqrProblem prob;
  // Augmented blocks [x; x^i; x^j; x^k]; the real model acts identically on each.
  prob.F = QMatrix(8, 8);
  prob.B = QMatrix(8, 4);
  for (std::size_t blk = 0; blk < 4; ++blk)
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 2; ++c) prob.F(2 * blk + r, 2 * blk + c) = Quaternion(a[r][c]);
      prob.B(2 * blk + r, blk) = Quaternion(b[r]);
    }
  prob.Q = p.q_scale * QMatrix::identity(8);
  prob.T = p.t_scale * QMatrix::identity(8);
  prob.R = QMatrix(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      prob.R(r, c) = Quaternion((r == c ? p.r_diag : 0.0) - p.r_coupling);
  prob.horizon = whole_steps(p.segment, p.dt, "segment") + 1;
  return prob;
}

void validate(const FlightParams& p) {
  if (!(std::isfinite(p.dt) && p.dt > 0.0)) throw UsageError("flight: dt must be positive");
  const std::size_t seg = whole_steps(p.segment, p.dt, "segment");
  const std::size_t app = whole_steps(p.apply, p.dt, "apply");
  if (app > seg) throw UsageError("flight: apply must not exceed segment");
  if (!(std::isfinite(p.init_std) && p.init_std >= 0.0) ||
      !(std::isfinite(p.proc_noise) && p.proc_noise >= 0.0))
    throw UsageError("flight: init_std and proc_noise must be non-negative");
  try {
    validate_problem(flight_problem(p));
  } catch (const UsageError& e) {
    throw UsageError(std::string("flight: ") + e.what());
  }
}

QMatrix flight_monodromy(const FlightParams& p) {
  validate(p);
  const LqrProblem prob = flight_problem(p);
  const LqrSolution sol = lqr_backward(prob);
  const std::size_t apply = whole_steps(p.apply, p.dt, "apply");
  QMatrix m = QMatrix::identity(prob.F.rows());
  for (std::size_t k = 1; k <= apply; ++k) m = (prob.F + prob.B * sol.G_seq[k]) * m;
  return m;
}

FlightRun run_flight(const FlightParams& p, std::uint64_t seed, std::size_t steps,
                     std::ostream* csv, const QVector* x1) {
  validate(p);
  const LqrProblem prob = flight_problem(p);
  const std::size_t apply = whole_steps(p.apply, p.dt, "apply");
  // The problem is time invariant, so every re-plan yields the same gains;
  // only the state the plan starts from changes.
  const LqrSolution sol = lqr_backward(prob);

  Rng init_rng(child_seed(seed, 0)), noise_rng(child_seed(seed, 1));
  QVector x(2);
  if (x1) {
    if (x1->size() != 2) throw UsageError("flight: initial state needs two entries");
    x = *x1;
  } else {
    x[0] = init_rng.pure(p.init_std);
  }

  FlightRun run;
  auto emit = [&](std::size_t n, const Quaternion* u) {
    if (!csv) return;
    *csv << n << ',' << format_real(static_cast<double>(n) * p.dt) << ',' << quat_fields(x[0])
         << ',' << quat_fields(x[1]) << ',' << (u ? quat_fields(*u) : std::string(",,,")) << ','
         << format_real(norm(x[0])) << '\n';
  };
  if (csv)
    *csv << "step,t,phi_r,phi_i,phi_j,phi_k,phidot_r,phidot_i,phidot_j,phidot_k,u_r,u_i,u_j,u_k,"
            "phi_norm\n";
  std::size_t k = 1;  // position within the current plan
  for (std::size_t n = 0; n < steps; ++n) {
    if (k > apply) k = 1;  // re-plan from the current state
    const QVector ua = lqr_gain_input(sol, k, augment_stacked(x));
    const Quaternion u = deaugment(ua, false)[0];
    run.max_input_inconsistency =
        std::max(run.max_input_inconsistency, max_abs_diff(ua, augment_stacked(QVector{u})));
    run.states.push_back(x);
    run.inputs.push_back(u);
    run.phi_norm.push_back(norm(x[0]));
    emit(n, &u);
    QVector next{x[0] + p.dt * x[1] + (p.dt * p.dt / 2.0) * u, x[1] + p.dt * u};
    if (p.proc_noise > 0.0)
      for (auto& q : next) q += noise_rng.pure(p.proc_noise);
    x = std::move(next);
    ++k;
  }
  run.states.push_back(x);
  run.phi_norm.push_back(norm(x[0]));
  emit(steps, nullptr);
  return run;
}

}  // namespace hrcalc::experiments
