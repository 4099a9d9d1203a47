#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hrcalc/experiments/common.hpp"

namespace hrcalc::experiments {

// Synthetic Euler-angle tracks: roll and pitch oscillate, yaw sweeps at a
// constant rate and is wrapped to (-pi, pi]. Random phases and the initial
// yaw come from the seed; angle noise is added before the quaternion map.
struct MotionParams {
  double dt = 0.01;
  double roll_amp = 0.6, roll_freq = 0.35;
  double pitch_amp = 0.4, pitch_freq = 0.2;
  double yaw_rate = 1.5;  // rad/s
  double angle_noise = 0.01;
  bool constant = false;  // hold all angles at their initial values
  std::size_t order = 4;  // taps of both predictors
  double gamma = 0.05;    // QLMS step
  double lms_mu = 0.3;    // channel-wise real LMS step
};

void declare_motion(ParamSet& p);
MotionParams motion_params(const ParamSet& p);
void validate(const MotionParams& p);

// Wraps to (-pi, pi].
double wrap_angle(double a);
// exp(k yaw/2) exp(j pitch/2) exp(i roll/2).
Quaternion euler_to_quaternion(double roll, double pitch, double yaw);

struct MotionRun {
  std::vector<double> yaw_wrapped;
  std::vector<Quaternion> q;  // sign-continuous quaternion track
  std::vector<double> err_qlms, err_lms;      // squared one-step prediction errors
  std::vector<double> phase_true, phase_qlms, phase_lms;  // |phase| from the polar form
  double mse_qlms = 0.0, mse_lms = 0.0;  // over the second half of the run
};

// One-step-ahead prediction of q[n] from q[n-1..n-order] by the augmented
// QLMS filter and by a real LMS per component (each channel from its own past).
MotionRun run_motion(const MotionParams& p, std::uint64_t seed, std::size_t steps,
                     std::ostream* csv = nullptr);

}  // namespace hrcalc::experiments
