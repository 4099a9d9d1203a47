#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hrcalc/control.hpp"
#include "hrcalc/experiments/common.hpp"

namespace hrcalc::experiments {

// Double integrator on quaternions, state (phi, phidot), input nu:
//   x[n+1] = [1 dt; 0 1] x[n] + [dt^2/2; dt] u[n].
struct FlightParams {
  double dt = 0.04;
  double segment = 1.6;  // s, planning horizon
  double apply = 0.8;    // s, applied before re-planning
  double q_scale = 1.0;
  double t_scale = 50.0;
  double r_diag = 10.0;
  double r_coupling = 1.875;  // R = r_diag I - r_coupling 1 1^T
  double init_std = 1.0;      // std of each imaginary component of phi[1]
  double proc_noise = 0.0;    // std of additive noise on each state component
};

void declare_flight(ParamSet& p);
FlightParams flight_params(const ParamSet& p);
// Positive dt, whole numbers of steps per segment with 0 < apply <= segment,
// and Q, T, R passing LQR validation (R positive definite).
void validate(const FlightParams& p);

// Augmented LQR problem over one planning segment (inputs for every step of
// the segment).
LqrProblem flight_problem(const FlightParams& p);

// Augmented state map over one applied portion of a plan (closed loop,
// noiseless). The receding-horizon loop is stable iff its spectral radius
// is below one.
QMatrix flight_monodromy(const FlightParams& p);

struct FlightRun {
  std::vector<QVector> states;  // base (phi, phidot) per step, steps + 1 entries
  std::vector<Quaternion> inputs;
  std::vector<double> phi_norm;
  double max_input_inconsistency = 0.0;  // deviation of u^a from augmented form
};

// Receding horizon: plan a segment, apply the first `apply` seconds, repeat.
// `x1` overrides the random initial phi (pure, N(0, init_std^2) components).
FlightRun run_flight(const FlightParams& p, std::uint64_t seed, std::size_t steps,
                     std::ostream* csv = nullptr, const QVector* x1 = nullptr);

}  // namespace hrcalc::experiments
