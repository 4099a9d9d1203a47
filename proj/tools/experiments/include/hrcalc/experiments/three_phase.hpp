#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hrcalc/experiments/common.hpp"

namespace hrcalc::experiments {

struct ThreePhaseParams {
  double f = 50.0;   // Hz
  double dt = 1e-3;  // s
  double va = 1.0, vb = 1.0, vc = 1.0;
  double phase_a = 0.0, phase_b = 0.0, phase_c = 0.0;  // rad
  double noise_std = 0.0;                              // per imaginary component
  // Fault from fault_time (s, negative = none): phase `fault_phase` (0, 1, 2)
  // keeps (1 - fault_sag) of its amplitude, the two others shift by
  // +fault_shift and -fault_shift (rad), in phase order.
  double fault_time = -1.0;
  int fault_phase = 0;
  double fault_sag = 0.8;
  double fault_shift = 0.3490658503988659;  // 20 degrees
  // Tracker tuning.
  double f_init = 49.5;
  double obs_var = 1e-4;
  double proc_var_phi = 1e-11;
  double proc_var_seq = 1e-6;
  double init_var_phi = 1e-4;
  double init_var_seq = 1.0;
};

void declare_three_phase(ParamSet& p);
ThreePhaseParams three_phase_params(const ParamSet& p);
// dt > 0, f dt < 0.5, finite amplitudes, valid fault phase, positive variances.
void validate(const ThreePhaseParams& p);

// Normal of the balanced plane, oriented so a balanced signal is the positive
// sequence: -(i + j + k)/sqrt(3).
Quaternion three_phase_axis();

// Noiseless voltage quaternion at sample n.
Quaternion three_phase_voltage(const ThreePhaseParams& p, std::size_t n);

// Exact counter-rotating split of the noiseless voltage at sample n:
// q = q+ - q-, q+ rotating by exp(zeta w) and q- by exp(-zeta w) per sample.
struct SequenceSplit {
  Quaternion plus, minus;
};
SequenceSplit three_phase_sequences(const ThreePhaseParams& p, std::size_t n);

// Frequency from a rotation estimate: atan(|Im phi| / Re phi) / (2 pi dt).
double frequency_from_phi(const Quaternion& phi, double dt);

struct ThreePhaseRun {
  std::vector<double> f_hat, f_true;
  std::vector<double> qplus_norm, qminus_norm;  // tracker estimates
  std::vector<double> qminus_true;
};

// Samples 0..steps-1. Sample 0 initialises q+ and later samples drive the
// extended filter on (phi, q+, q-). Writes per-step CSV rows when `csv` is
// given (no header).
ThreePhaseRun run_three_phase(const ThreePhaseParams& p, std::uint64_t seed, std::size_t steps,
                              std::ostream* csv = nullptr);

}  // namespace hrcalc::experiments
